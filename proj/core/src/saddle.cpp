#include "stfem/saddle.hpp"

#include <Eigen/SparseLU>
#include <chrono>
#include <cmath>
#include <json.hpp>

#ifdef STFEM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "squares.hpp"
#include "stfem/error.hpp"

namespace stfem {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void append_block(Triplets& out, const SparseMatrix& m, int row0, int col0, double scale,
                  bool transpose = false) {
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      const auto r = static_cast<int>(transpose ? it.col() : it.row());
      const auto cc = static_cast<int>(transpose ? it.row() : it.col());
      out.emplace_back(row0 + r, col0 + cc, scale * it.value());
    }
  }
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Ok: return "ok";
    case SolveStatus::Singular: return "singular";
    case SolveStatus::IllConditioned: return "ill_conditioned_warning";
  }
  return "unknown";
}

std::string SolveReport::to_json() const {
  nlohmann::json j;
  j["residual"] = residual;
  j["status"] = to_string(status);
  j["seconds"] = seconds;
  j["ndof_primal"] = ndof_primal;
  j["ndof_dual"] = ndof_dual;
  j["solver"] = solver;
  return j.dump();
}

SparseMatrix assemble_h1_gram(const FESpace& space, int threads) {
  detail::SquareRecipe r;
  r.value_volume = 1.0;
  r.grad_volume = 1.0;
  return detail::assemble_squares(space, r, {}, {}, threads);
}

SaddleSystem build_system(const std::shared_ptr<const FESpace>& primal,
                          const std::shared_ptr<const FESpace>& dual, const ObservationData& data,
                          const SaddleOptions& options) {
  if (!primal->same_mesh(*dual)) {
    throw Error(ErrorCode::MeshMismatch, "primal and dual spaces live on different meshes");
  }
  const int p = primal->degree();
  const int q = dual->degree();
  if (q > p && !options.allow_locking) {
    throw Error(ErrorCode::DegreeOrder, "dual degree " + std::to_string(q) +
                                            " exceeds primal degree " + std::to_string(p));
  }
  if (!(options.gamma > 0.0 && options.gamma_star > 0.0) && !options.allow_unstable) {
    throw Error(ErrorCode::UnstableParameters, "gamma and gamma* must be positive");
  }
  if (options.gamma < 0.0 || options.gamma_star < 0.0) {
    throw Error(ErrorCode::UnstableParameters, "negative stabilization weight");
  }

  SaddleSystem sys;
  sys.primal = primal;
  sys.dual = dual;
  sys.options = options;
  sys.omega = data.omega;
  sys.mass_o = assemble_observation_mass(primal, data.omega, options.threads).matrix;
  sys.stab = assemble_primal_stabilizer(primal, options.variant.primal, q, options.threads).matrix;
  sys.dual_stab = assemble_dual_stabilizer(dual, options.variant.dual, options.threads).matrix;
  sys.wave = assemble_wave_form(primal, dual, options.threads).matrix;
  sys.load = assemble_data_functional(primal, data, options.quad, options.threads);

  const int np = sys.np();
  const int nq = sys.nq();
  Triplets t;
  t.reserve(sys.mass_o.nonZeros() + sys.stab.nonZeros() + 2 * sys.wave.nonZeros() +
            sys.dual_stab.nonZeros());
  append_block(t, sys.mass_o, 0, 0, 1.0);
  if (options.gamma != 0.0) append_block(t, sys.stab, 0, 0, options.gamma);
  append_block(t, sys.wave, 0, np, 1.0, true);
  append_block(t, sys.wave, np, 0, 1.0);
  if (options.gamma_star != 0.0) append_block(t, sys.dual_stab, np, np, -options.gamma_star);
  sys.matrix.resize(np + nq, np + nq);
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.rhs = Eigen::VectorXd::Zero(np + nq);
  sys.rhs.head(np) = sys.load;
  return sys;
}

SaddleSolution solve(const SaddleSystem& system) {
  const auto start = std::chrono::steady_clock::now();
  SparseMatrix k = system.matrix;
  k.makeCompressed();
  Eigen::VectorXd x;
  SolveReport report;
  report.ndof_primal = system.np();
  report.ndof_dual = system.nq();

#ifdef STFEM_HAVE_UMFPACK
  Eigen::UmfPackLU<SparseMatrix> lu;
  report.solver = "umfpack";
#else
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  report.solver = "sparselu";
#endif
  lu.compute(k);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::Singular, "sparse factorization failed (singular system)");
  }
  x = lu.solve(system.rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    throw Error(ErrorCode::Singular, "sparse solve failed");
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const double bnorm = system.rhs.norm();
  const double rnorm = (k * x - system.rhs).norm();
  report.residual = bnorm > 0.0 ? rnorm / bnorm : rnorm;
  report.status = report.residual <= system.options.residual_gate ? SolveStatus::Ok
                                                                   : SolveStatus::IllConditioned;

  SaddleSolution sol;
  sol.u = DiscreteField(system.primal, x.head(system.np()));
  sol.z = DiscreteField(system.dual, x.tail(system.nq()));
  sol.report = report;
  return sol;
}

double check_galerkin_orthogonality(const SaddleSystem& sys, const DiscreteField& u_exact,
                                    const DiscreteField& u_h, const DiscreteField& z_h,
                                    std::span<const TestPair> tests) {
  if (tests.empty()) return 0.0;
  const auto& rich = u_exact.space;
  if (!rich->same_mesh(*sys.primal) || rich->degree() < sys.primal->degree()) {
    throw Error(ErrorCode::MeshMismatch, "exact field must share the mesh and have degree >= p");
  }
  const auto& opt = sys.options;
  const SparseMatrix mo = assemble_observation_mass(rich, sys.omega, opt.threads).matrix;
  const SparseMatrix s =
      assemble_primal_stabilizer(rich, opt.variant.primal, 0, opt.threads).matrix;
  const SparseMatrix b = assemble_wave_form(rich, sys.dual, opt.threads).matrix;
  const SparseMatrix gp = assemble_h1_gram(*sys.primal, opt.threads);
  const SparseMatrix gq = assemble_h1_gram(*sys.dual, opt.threads);

  const Eigen::VectorXd err = u_exact.coeffs - embed(u_h, rich).coeffs;
  const Eigen::VectorXd mo_err = mo * err + opt.gamma * (s * err);
  const Eigen::VectorXd b_err = b * err;
  const Eigen::VectorXd bt_z = b.transpose() * z_h.coeffs;
  const Eigen::VectorXd s_z = sys.dual_stab * z_h.coeffs;

  double worst = 0.0;
  for (const auto& pair : tests) {
    const Eigen::VectorXd v = embed(DiscreteField(sys.primal, pair.v), rich).coeffs;
    const double value = v.dot(mo_err) - v.dot(bt_z) + pair.w.dot(b_err) +
                         opt.gamma_star * pair.w.dot(s_z);
    const double norm = std::sqrt(std::max(0.0, pair.v.dot(gp * pair.v))) +
                        std::sqrt(std::max(0.0, pair.w.dot(gq * pair.w)));
    if (norm > 0.0) worst = std::max(worst, std::abs(value) / norm);
  }
  return worst;
}

}  // namespace stfem
