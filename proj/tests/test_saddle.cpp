#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "support.hpp"

using namespace stfem;
using namespace stfem::testing;

namespace {

const Interval kOmega{0.1, 0.3};

ObservationData zero_data() {
  return {kOmega, [](double, double) { return 0.0; }};
}

double max_abs(const SparseMatrix& m) {
  double a = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) a = std::max(a, std::abs(it.value()));
  }
  return a;
}

struct Solved {
  SaddleSystem sys;
  SaddleSolution sol;
};

Solved solve_ex1(int nx, int nt, int p, int q) {
  auto m = mesh_of(nx, nt, 2.0, kOmega);
  const auto ex = example1();
  auto sys = build_system(space_of(m, p), space_of(m, q), make_observation(ex, kOmega));
  auto sol = solve(sys);
  return {std::move(sys), std::move(sol)};
}

}  // namespace

TEST_CASE("system structure") {
  auto m = mesh_of(10, 13, 2.0, kOmega);
  auto sp = space_of(m, 2);
  auto sq1 = space_of(m, 1);
  const auto sys = build_system(sp, sq1, make_observation(example1(), kOmega));
  CHECK(sys.matrix.rows() == sp->dof_count() + sq1->dof_count());
  CHECK(sys.np() == sp->dof_count());
  CHECK(sys.nq() == sq1->dof_count());
  CHECK(sys.rhs.tail(sys.nq()).norm() == 0.0);
  CHECK(sys.rhs.head(sys.np()).norm() > 0.0);

  const SparseMatrix asym = sys.matrix - SparseMatrix(sys.matrix.transpose());
  CHECK(max_abs(asym) <= 1e-13 * max_abs(sys.matrix));

  // (1,1) block PSD and (2,2) block NSD on random vectors.
  for (unsigned seed = 0; seed < 5; ++seed) {
    const auto u = random_field(sp, seed);
    const auto z = random_field(sq1, 50 + seed);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.np() + sys.nq());
    x.head(sys.np()) = u.coeffs;
    CHECK(x.dot(sys.matrix * x) >= 0.0);
    x.setZero();
    x.tail(sys.nq()) = z.coeffs;
    CHECK(x.dot(sys.matrix * x) <= 0.0);
  }

  const auto zero = build_system(sp, sq1, zero_data());
  CHECK(zero.rhs.norm() == 0.0);
}

TEST_CASE("parameter and degree checks") {
  auto m = mesh_of(10, 13, 2.0, kOmega);
  const auto data = zero_data();
  try {
    build_system(space_of(m, 1), space_of(m, 2), data);
    FAIL("expected DegreeOrder");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegreeOrder);
  }
  SaddleOptions lock;
  lock.allow_locking = true;
  CHECK_NOTHROW(build_system(space_of(m, 1), space_of(m, 2), data, lock));

  SaddleOptions g0;
  g0.gamma = 0.0;
  try {
    build_system(space_of(m, 2), space_of(m, 1), data, g0);
    FAIL("expected UnstableParameters");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnstableParameters);
  }
  g0.allow_unstable = true;
  CHECK_NOTHROW(build_system(space_of(m, 2), space_of(m, 1), data, g0));

  try {
    build_system(space_of(m, 2), space_of(mesh_of(10, 13, 2.0, kOmega), 1), data);
    FAIL("expected MeshMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MeshMismatch);
  }

  SaddleOptions face;
  face.variant.primal = PrimalStab::FaceOnly;
  CHECK_NOTHROW(build_system(space_of(m, 3), space_of(m, 1), data, face));
}

TEST_CASE("zero data gives the zero solution") {
  auto m = mesh_of(10, 13, 2.0, kOmega);
  for (auto [p, q] : {std::pair{1, 1}, {2, 1}, {2, 2}, {3, 1}}) {
    const auto sys = build_system(space_of(m, p), space_of(m, q), zero_data());
    const auto sol = solve(sys);
    CHECK(sol.u.coeffs.norm() + sol.z.coeffs.norm() <= 1e-10);
    CHECK(sol.report.status == SolveStatus::Ok);
  }
}

TEST_CASE("stability identity with the sign-flipped test") {
  // x^T K' x with K' = K and the dual test negated: u^T (M_O + g S) u + g* z^T S* z,
  // which vanishes for the zero-data solution and is the triple norm otherwise.
  const auto s = solve_ex1(10, 13, 2, 1);
  const auto& sys = s.sys;
  const Eigen::VectorXd& u = s.sol.u.coeffs;
  const Eigen::VectorXd& z = s.sol.z.coeffs;
  Eigen::VectorXd x(sys.np() + sys.nq()), y(sys.np() + sys.nq());
  x << u, z;
  y << u, -z;
  const double lhs = y.dot(sys.matrix * x);
  const double rhs = u.dot(sys.mass_o * u) + sys.options.gamma * u.dot(sys.stab * u) +
                     sys.options.gamma_star * z.dot(sys.dual_stab * z);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("solve report") {
  const auto s = solve_ex1(10, 13, 1, 1);
  const auto& r = s.sol.report;
  CHECK(r.residual <= 1e-8);
  CHECK(std::isfinite(r.residual));
  CHECK(r.ndof_primal == s.sys.np());
  CHECK(r.ndof_dual == s.sys.nq());
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["status"] == "ok");
  CHECK(j["ndof_primal"] == r.ndof_primal);
  CHECK(to_string(SolveStatus::IllConditioned) == "ill_conditioned_warning");
}

TEST_CASE("singular configuration is reported") {
  // gamma = gamma* = 0 with p > q leaves the primal block without control of
  // functions vanishing on O and in the range of B^T.
  auto m = mesh_of(10, 13, 2.0, kOmega);
  SaddleOptions o;
  o.gamma = 0.0;
  o.gamma_star = 0.0;
  o.allow_unstable = true;
  const auto sys = build_system(space_of(m, 2), space_of(m, 1), make_observation(example1(), kOmega), o);
  try {
    const auto sol = solve(sys);
    CHECK(sol.report.status != SolveStatus::Ok);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Singular);
  }
}

TEST_CASE("error magnitudes on the second ladder level") {
  const auto s = solve_ex1(20, 24, 2, 1);
  const auto ex = example1();
  const auto rel = error_l2_spacetime(s.sol.u, ex.as_function(), NormOptions::for_solution(ex)).value;
  const double dual = dual_norm_l2h10(s.sol.z);
  MESSAGE("h=" << s.sys.primal->mesh().h() << " rel L2 " << rel << " dual " << dual);
  CHECK(rel >= 1.48e-2 / 3);
  CHECK(rel <= 1.48e-2 * 3);
  CHECK(dual >= 8.30e-4 / 5);
  CHECK(dual <= 8.30e-4 * 5);
}

TEST_CASE("Galerkin orthogonality") {
  const auto s = solve_ex1(20, 32, 2, 1);
  CHECK(s.sys.primal->mesh().h() == doctest::Approx(1.0 / 16));
  auto rich = space_of(s.sys.primal->mesh_ptr(), 3);
  const auto u3 = interpolate_nodal(rich, example1().as_function());

  std::vector<TestPair> none{{Eigen::VectorXd::Zero(s.sys.np()), Eigen::VectorXd::Zero(s.sys.nq())}};
  CHECK(check_galerkin_orthogonality(s.sys, u3, s.sol.u, s.sol.z, none) == 0.0);

  std::vector<TestPair> tests;
  for (unsigned seed = 0; seed < 20; ++seed) {
    tests.push_back({random_field(s.sys.primal, seed).coeffs, random_field(s.sys.dual, 99 + seed).coeffs});
  }
  const double v = check_galerkin_orthogonality(s.sys, u3, s.sol.u, s.sol.z, tests);
  MESSAGE("orthogonality violation " << v);
  CHECK(v <= 1e-4);

  // With u replaced by u_h only the dual block remains:
  // A_h[(0, -z_h), (v, w)] = -a_h(v, z_h) + g* s*(z_h, w).
  const auto uh3 = embed(s.sol.u, rich);
  const auto& t = tests.front();
  const double expected = -t.v.dot(s.sys.wave.transpose() * s.sol.z.coeffs) +
                          s.sys.options.gamma_star * t.w.dot(s.sys.dual_stab * s.sol.z.coeffs);
  const SparseMatrix gp = assemble_h1_gram(*s.sys.primal);
  const SparseMatrix gq = assemble_h1_gram(*s.sys.dual);
  const double norm = std::sqrt(t.v.dot(gp * t.v)) + std::sqrt(t.w.dot(gq * t.w));
  const std::vector<TestPair> one{t};
  CHECK(check_galerkin_orthogonality(s.sys, uh3, s.sol.u, s.sol.z, one) ==
        doctest::Approx(std::abs(expected) / norm).epsilon(1e-10));
}

TEST_CASE("all default degree pairs factor") {
  auto m = mesh_of(10, 13, 2.0, kOmega);
  const auto data = make_observation(example1(), kOmega);
  for (int p = 1; p <= 3; ++p) {
    for (int q = 1; q <= p; ++q) {
      for (auto dual : {DualStab::GradientPenalty, DualStab::ResidualStyle}) {
        SaddleOptions o;
        o.variant.dual = dual;
        const auto sol = solve(build_system(space_of(m, p), space_of(m, q), data, o));
        CHECK(sol.report.status == SolveStatus::Ok);
      }
    }
  }
}
