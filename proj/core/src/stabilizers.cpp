#include <Eigen/Dense>
#include <cmath>

#include "squares.hpp"
#include "stfem/error.hpp"

namespace stfem {
namespace detail {

namespace {

constexpr int idx(BoundaryTag t) { return static_cast<int>(t); }

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter_symmetric(Triplets& out, std::span<const int> dofs, const Eigen::MatrixXd& local) {
  const Eigen::Index m = local.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (local(i, j) != 0.0) out.emplace_back(dofs[i], dofs[j], local(i, j));
    }
  }
}

// Accumulate w g g^T into the upper triangle; mirrored by finish().
struct LocalMatrix {
  Eigen::MatrixXd m;

  void reset(Eigen::Index n) { m.setZero(n, n); }
  void add(std::size_t n, const double* g, double w) {
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = w * g[i];
      if (wi == 0.0) continue;
      for (std::size_t j = i; j < n; ++j) m(i, j) += wi * g[j];
    }
  }
  void finish() {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < i; ++j) m(i, j) = m(j, i);
    }
  }
};

}  // namespace

SquareRecipe primal_recipe(PrimalStab variant, double h) {
  SquareRecipe r;
  r.boundary_value[idx(BoundaryTag::Sigma)] = 1.0 / h;
  r.jump_grad = h;
  if (variant == PrimalStab::ResidualJump) {
    r.box_volume = h * h;
  } else {
    r.jump_box = h * h * h;
  }
  return r;
}

SquareRecipe dual_recipe(DualStab variant, double h) {
  if (variant == DualStab::GradientPenalty) {
    SquareRecipe r;
    r.grad_volume = 1.0;
    r.boundary_value = {0.0, 1.0 / h, 1.0 / h, 1.0 / h};
    return r;
  }
  SquareRecipe r = primal_recipe(PrimalStab::ResidualJump, h);
  for (BoundaryTag t : {BoundaryTag::Initial, BoundaryTag::Final}) {
    r.boundary_value[idx(t)] = 1.0 / h;
    r.boundary_dt[idx(t)] = h;
  }
  return r;
}

SparseMatrix assemble_squares(const FESpace& space, const SquareRecipe& recipe,
                              const std::vector<char>& mask, const QuadratureOptions& quad,
                              int threads) {
  const SquareEngine engine(space, recipe, quad);
  const SpacetimeMesh& mesh = space.mesh();
  SquareRecipe boundary_only = recipe;
  boundary_only.value_volume = boundary_only.grad_volume = boundary_only.box_volume = 0.0;
  const SquareEngine boundary_engine(space, boundary_only, quad);

  auto cell_chunks = chunked<Triplets>(mesh.num_triangles(), threads,
                                       [&](std::size_t b, std::size_t e, Triplets& out) {
    LocalMatrix lm;
    for (std::size_t c = b; c < e; ++c) {
      const int ci = static_cast<int>(c);
      const bool inside = mask.empty() || mask[c] != 0;
      const SquareEngine& eng = inside ? engine : boundary_engine;
      const auto dofs = space.cell_dofs(ci);
      lm.reset(static_cast<Eigen::Index>(dofs.size()));
      eng.cell(ci, [&](std::span<const int> d, const double* g, double w, SampleKind, Point) {
        lm.add(d.size(), g, w);
      });
      lm.finish();
      scatter_symmetric(out, dofs, lm.m);
    }
  });

  std::vector<int> interior;
  if (recipe.any_facet()) {
    for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
      if (mesh.facets()[f].interior()) interior.push_back(static_cast<int>(f));
    }
  }
  auto facet_chunks = chunked<Triplets>(interior.size(), threads,
                                        [&](std::size_t b, std::size_t e, Triplets& out) {
    LocalMatrix lm;
    std::vector<int> dofs;
    for (std::size_t k = b; k < e; ++k) {
      lm.reset(2 * space.dofs_per_cell());
      engine.facet(interior[k], [&](std::span<const int> d, const double* g, double w, SampleKind,
                                    Point) {
        dofs.assign(d.begin(), d.end());
        lm.add(d.size(), g, w);
      });
      lm.finish();
      scatter_symmetric(out, dofs, lm.m);
    }
  });

  Triplets all;
  std::size_t total = 0;
  for (const auto& c : cell_chunks) total += c.size();
  for (const auto& c : facet_chunks) total += c.size();
  all.reserve(total);
  for (const auto& c : cell_chunks) all.insert(all.end(), c.begin(), c.end());
  for (const auto& c : facet_chunks) all.insert(all.end(), c.begin(), c.end());
  SparseMatrix m(space.dof_count(), space.dof_count());
  m.setFromTriplets(all.begin(), all.end());
  return m;
}

std::vector<double> local_squares(const DiscreteField& field, const SquareRecipe& recipe,
                                  const std::vector<char>& mask, const QuadratureOptions& quad,
                                  const JetFunction* exact) {
  const FESpace& space = *field.space;
  const SpacetimeMesh& mesh = space.mesh();
  const Eigen::VectorXd& u = field.coeffs;
  const SquareEngine engine(space, recipe, quad);
  SquareRecipe boundary_only = recipe;
  boundary_only.value_volume = boundary_only.grad_volume = boundary_only.box_volume = 0.0;
  const SquareEngine boundary_engine(space, boundary_only, quad);

  auto sample = [&](std::span<const int> d, const double* g, double w, SampleKind kind, Point p) {
    double v = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) v += g[i] * u(d[i]);
    if (exact) v -= exact_sample(kind, (*exact)(p.t, p.x));
    return w * v * v;
  };

  std::vector<double> out(mesh.num_triangles(), 0.0);
  for (std::size_t c = 0; c < mesh.num_triangles(); ++c) {
    const bool inside = mask.empty() || mask[c] != 0;
    const SquareEngine& eng = inside ? engine : boundary_engine;
    double acc = 0.0;
    eng.cell(static_cast<int>(c), [&](std::span<const int> d, const double* g, double w,
                                       SampleKind kind, Point p) { acc += sample(d, g, w, kind, p); });
    out[c] = acc;
  }
  if (recipe.any_facet()) {
    for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
      const Facet& facet = mesh.facets()[f];
      if (!facet.interior()) continue;
      double acc = 0.0;
      engine.facet(static_cast<int>(f), [&](std::span<const int> d, const double* g, double w,
                                            SampleKind kind, Point p) {
        acc += sample(d, g, w, kind, p);
      });
      out[facet.tri[0]] += 0.5 * acc;
      out[facet.tri[1]] += 0.5 * acc;
    }
  }
  return out;
}

double global_squares(const DiscreteField& field, const SquareRecipe& recipe,
                      const QuadratureOptions& quad) {
  const FESpace& space = *field.space;
  const SpacetimeMesh& mesh = space.mesh();
  const Eigen::VectorXd& u = field.coeffs;
  const SquareEngine engine(space, recipe, quad);
  double total = 0.0;
  auto add = [&](std::span<const int> d, const double* g, double w, SampleKind, Point) {
    double v = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) v += g[i] * u(d[i]);
    total += w * v * v;
  };
  for (std::size_t c = 0; c < mesh.num_triangles(); ++c) engine.cell(static_cast<int>(c), add);
  if (recipe.any_facet()) {
    for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
      if (mesh.facets()[f].interior()) engine.facet(static_cast<int>(f), add);
    }
  }
  return total;
}

}  // namespace detail

SparseBilinear assemble_primal_stabilizer(const std::shared_ptr<const FESpace>& space,
                                          PrimalStab variant, int dual_degree, int threads) {
  const int p = space->degree();
  if (variant == PrimalStab::FaceOnly && dual_degree > 0 &&
      (dual_degree > p || dual_degree < p - 2)) {
    throw Error(ErrorCode::VariantConstraint,
                "face-only stabilizer requires p-2 <= q <= p (p=" + std::to_string(p) +
                    ", q=" + std::to_string(dual_degree) + ")");
  }
  const auto recipe = detail::primal_recipe(variant, space->mesh().h());
  return {space, space, detail::assemble_squares(*space, recipe, {}, {}, threads)};
}

SparseBilinear assemble_dual_stabilizer(const std::shared_ptr<const FESpace>& space,
                                        DualStab variant, int threads) {
  const auto recipe = detail::dual_recipe(variant, space->mesh().h());
  return {space, space, detail::assemble_squares(*space, recipe, {}, {}, threads)};
}

SparseBilinear assemble_mass(const std::shared_ptr<const FESpace>& space, int threads) {
  detail::SquareRecipe r;
  r.value_volume = 1.0;
  return {space, space, detail::assemble_squares(*space, r, {}, {}, threads)};
}

SparseBilinear assemble_observation_mass(const std::shared_ptr<const FESpace>& space,
                                         Interval omega, int threads) {
  const auto mask = observation_cells(space->mesh(), omega);
  detail::SquareRecipe r;
  r.value_volume = 1.0;
  return {space, space, detail::assemble_squares(*space, r, mask, {}, threads)};
}

std::vector<double> primal_stabilizer_local(const DiscreteField& u, PrimalStab variant) {
  return detail::local_squares(u, detail::primal_recipe(variant, u.space->mesh().h()));
}

std::vector<double> dual_stabilizer_local(const DiscreteField& z, DualStab variant) {
  return detail::local_squares(z, detail::dual_recipe(variant, z.space->mesh().h()));
}

}  // namespace stfem
