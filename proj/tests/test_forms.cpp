#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <sstream>

#include "support.hpp"

using namespace stfem;
using namespace stfem::testing;

namespace {

constexpr double pi = std::numbers::pi;

double ex1(double t, double x) { return std::sin(3 * pi * x) * std::cos(3 * pi * t); }

double box_at(const DiscreteField& u, int c, Point p) {
  const auto& mesh = u.space->mesh();
  const AffineMap map = AffineMap::of(mesh, c);
  BasisEval be;
  u.space->element().eval(map.to_reference(Vec2(p.t, p.x)), be, true);
  push_forward(map, be, true);
  const auto dofs = u.space->cell_dofs(c);
  double s = 0.0;
  for (std::size_t i = 0; i < dofs.size(); ++i) s += u.coeffs(dofs[i]) * (be.hess[i](0, 0) - be.hess[i](1, 1));
  return s;
}

double max_asym(const SparseMatrix& m) {
  const SparseMatrix d = m - SparseMatrix(m.transpose());
  double a = 0.0;
  for (int k = 0; k < d.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(d, k); it; ++it) a = std::max(a, std::abs(it.value()));
  }
  return a;
}

double min_eig(const SparseMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

SpacetimeMesh glued_pair() {
  // Two triangles of (0,2) x (0,1) sharing the diagonal from (2,0) to (0,1).
  std::vector<Point> v{{0, 0}, {2, 0}, {0, 1}, {2, 1}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}, {1, 3, 2}};
  return SpacetimeMesh(v, t, 2.0);
}

}  // namespace

TEST_CASE("minkowski metric") {
  const Mat2 A = minkowski_metric();
  CHECK(A(0, 0) == -1.0);
  CHECK(A(1, 1) == 1.0);
  CHECK((A - A.transpose()).norm() == 0.0);
  CHECK((A * A - Mat2::Identity()).norm() == 0.0);
}

TEST_CASE("wave form: constants and dimensions") {
  auto m = mesh_of(4, 8);
  auto s2 = space_of(m, 2);
  auto s1 = space_of(m, 1);
  const auto B = assemble_wave_form(s2, s1);
  CHECK(B.matrix.rows() == s1->dof_count());
  CHECK(B.matrix.cols() == s2->dof_count());

  // a_h(1, w) = -(A grad w . n, 1)_Sigma; for w = x^2 this is -2T.
  const auto Bq = assemble_wave_form(s2, s2);
  const auto one = interpolate_nodal(s2, [](double, double) { return 1.0; });
  const auto w = interpolate_nodal(s2, [](double, double x) { return x * x; });
  CHECK(Bq.form(w.coeffs, one.coeffs) == doctest::Approx(-4.0).epsilon(1e-12));

  CHECK_THROWS_AS(assemble_wave_form(s2, space_of(mesh_of(4, 8), 1)), Error);
}

TEST_CASE("wave form: Sigma couplings are symmetric for p = q") {
  auto m = mesh_of(3, 6);
  auto s = space_of(m, 2);
  const auto B = assemble_wave_form(s, s);
  // a_h(u,w) - a_h(w,u) = -(A grad u . n, w)_{Initial u Final} + (A grad w . n, u)_{Initial u Final}.
  // Restricted to fields vanishing at t = 0 and t = T the form is symmetric.
  auto u = random_field(s, 1);
  auto w = random_field(s, 2);
  for (auto tag : {BoundaryTag::Initial, BoundaryTag::Final}) {
    for (int d : s->boundary_dofs(tag)) u.coeffs(d) = w.coeffs(d) = 0.0;
  }
  CHECK(B.form(w.coeffs, u.coeffs) == doctest::Approx(B.form(u.coeffs, w.coeffs)).epsilon(1e-12));
}

TEST_CASE("wave form: elementwise integration by parts") {
  // For u vanishing on Sigma: a_h(u, w) = sum_K (box u, w)_K + sum_F ([A grad u . n], w)_F.
  for (int k = 1; k <= 3; ++k) {
    auto m = mesh_of(3, 4);
    auto s = space_of(m, k);
    auto u = random_field(s, 10 + k);
    for (int d : s->boundary_dofs(BoundaryTag::Sigma)) u.coeffs(d) = 0.0;
    const auto w = random_field(s, 20 + k);
    const double lhs = assemble_wave_form(s, s).form(w.coeffs, u.coeffs);

    double rhs = integrate_cells(w, 2 * k + 2, [&](int c, Point p, const FieldSample& ws) {
      return box_at(u, c, p) * ws.value;
    });
    const auto& line = line_rule_for(2 * k + 2);
    for (std::size_t fi = 0; fi < m->num_facets(); ++fi) {
      const Facet& f = m->facets()[fi];
      if (!f.interior()) continue;
      const Point& a = m->vertices()[f.v[0]];
      const Point& b = m->vertices()[f.v[1]];
      for (std::size_t q = 0; q < line.size(); ++q) {
        const double r = line.points[q];
        const Point p{a.t + r * (b.t - a.t), a.x + r * (b.x - a.x)};
        rhs += line.weights[q] * f.length * facet_jump(u, static_cast<int>(fi), p) *
               eval_on_cell(w, f.tri[0], p).value;
      }
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }

  // Smooth case on two triangles: u = x(1-x) has box u = 2, no jumps, u = 0 on Sigma.
  auto m = std::make_shared<const SpacetimeMesh>(glued_pair());
  auto s = space_of(m, 2);
  const auto u = interpolate_nodal(s, [](double, double x) { return x * (1 - x); });
  const auto B = assemble_wave_form(s, s);
  const auto one = interpolate_nodal(s, [](double, double) { return 1.0; });
  CHECK(B.form(one.coeffs, u.coeffs) == doctest::Approx(4.0).epsilon(1e-13));
  const auto t = interpolate_nodal(s, [](double t, double) { return t; });
  CHECK(B.form(t.coeffs, u.coeffs) == doctest::Approx(4.0).epsilon(1e-13));  // 2 * int t = 2 * 2
}

TEST_CASE("wave form: consistency on the smooth solution") {
  const auto worst_ratio = [](std::shared_ptr<const SpacetimeMesh> m) {
    auto s3 = space_of(m, 3);
    const auto u = interpolate_nodal(s3, ex1);
    const auto B = assemble_wave_form(s3, s3);
    double worst = 0.0;
    for (unsigned seed = 0; seed < 20; ++seed) {
      const auto w = random_field(s3, 100 + seed);
      worst = std::max(worst, std::abs(B.form(w.coeffs, u.coeffs)) / h1_norm(w));
    }
    return worst;
  };
  // Square cells: the half-diagonals are characteristics and the P3 nodes sit on
  // lines x +/- t = const, so the interpolant of a travelling wave is annihilated.
  auto square = mesh_of(32, 64);
  CHECK(square->h() == doctest::Approx(1.0 / 32));
  CHECK(worst_ratio(square) <= 1e-6);

  // Stretched cells break that alignment; the residual is then interpolation
  // error, O(h^3) at least.
  const double coarse = worst_ratio(mesh_of(20, 32));
  const double fine = worst_ratio(mesh_of(40, 64));
  MESSAGE("consistency residual " << coarse << " -> " << fine);
  CHECK(fine <= 1e-4);
  CHECK(coarse / fine >= 8.0);
}

TEST_CASE("bilinearity") {
  auto s = space_of(mesh_of(3, 4), 2);
  const auto u = random_field(s, 3);
  const auto w = random_field(s, 4);
  const auto B = assemble_wave_form(s, s);
  const double base = B.form(w.coeffs, u.coeffs);
  CHECK(B.form(-0.5 * w.coeffs, 3.0 * u.coeffs) == doctest::Approx(-1.5 * base).epsilon(1e-13));
  const auto S = assemble_primal_stabilizer(s);
  CHECK(S.form(2.0 * u.coeffs, 7.0 * w.coeffs) == doctest::Approx(14.0 * S.form(u.coeffs, w.coeffs)).epsilon(1e-13));
}

TEST_CASE("observation mass") {
  auto m = mesh_of(10, 20, 2.0, {0.1, 0.3});
  auto s = space_of(m, 2);
  const auto full = assemble_observation_mass(s, {0.0, 1.0});
  const auto mass = assemble_mass(s);
  CHECK((full.matrix - mass.matrix).norm() < 1e-14 * mass.matrix.norm());

  const auto mo = assemble_observation_mass(s, {0.1, 0.3});
  const auto one = interpolate_nodal(s, [](double, double) { return 1.0; });
  CHECK(mo.form(one.coeffs, one.coeffs) == doctest::Approx(0.4).epsilon(1e-13));
  CHECK(max_asym(mo.matrix) == 0.0);

  const auto off = interpolate_nodal(s, [](double, double x) { return x >= 0.3 ? x - 0.3 : 0.0; });
  CHECK(std::abs(mo.form(off.coeffs, off.coeffs)) < 1e-16);

  auto unaligned = space_of(mesh_of(4, 8, 2.0, {0.25, 0.5}), 1);
  try {
    assemble_observation_mass(unaligned, {0.1, 0.3});
    FAIL("expected OmegaNotAligned");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OmegaNotAligned);
  }
}

TEST_CASE("primal stabilizer") {
  SUBCASE("affine field sees only the Sigma penalty") {
    auto m = mesh_of(4, 6);
    auto s = space_of(m, 1);
    const double al = 0.7, be = -1.3, T = 2.0;
    const auto u = interpolate_nodal(s, [&](double t, double x) { return al * t + be * x; });
    const auto S = assemble_primal_stabilizer(s);
    const double sigma = 2 * al * al * T * T * T / 3 + al * be * T * T + be * be * T;
    CHECK(S.form(u.coeffs, u.coeffs) == doctest::Approx(sigma / m->h()).epsilon(1e-12));
  }
  SUBCASE("P1 residual block vanishes") {
    auto m = mesh_of(3, 4);
    auto s = space_of(m, 1);
    const auto u = random_field(s, 9);
    // Remove the facet and Sigma parts by hand; what is left must be zero.
    double jumps = 0.0;
    const auto& line = line_rule_for(4);
    for (std::size_t fi = 0; fi < m->num_facets(); ++fi) {
      const Facet& f = m->facets()[fi];
      if (!f.interior()) continue;
      const Point& a = m->vertices()[f.v[0]];
      const Point& b = m->vertices()[f.v[1]];
      for (std::size_t q = 0; q < line.size(); ++q) {
        const double r = line.points[q];
        const Point p{a.t + r * (b.t - a.t), a.x + r * (b.x - a.x)};
        jumps += line.weights[q] * f.length * sq(facet_jump(u, static_cast<int>(fi), p));
      }
    }
    const double sig = integrate_boundary(u, 4, {BoundaryTag::Sigma},
                                          [](const Facet&, Point, const FieldSample& v) { return sq(v.value); });
    const double h = m->h();
    const double sUU = assemble_primal_stabilizer(s).form(u.coeffs, u.coeffs);
    CHECK(sUU == doctest::Approx(h * jumps + sig / h).epsilon(1e-12));
  }
  SUBCASE("exact solution is nearly invisible") {
    const auto relative = [](std::shared_ptr<const SpacetimeMesh> m) {
      auto s = space_of(m, 3);
      const auto u = interpolate_nodal(s, ex1);
      return assemble_primal_stabilizer(s).form(u.coeffs, u.coeffs) / sq(h1_norm(u));
    };
    CHECK(relative(mesh_of(32, 64)) <= 1e-8);
    // Off the characteristic-aligned grid, s(Pi u, Pi u) = s(u - Pi u, u - Pi u) ~ h^6.
    const double coarse = relative(mesh_of(20, 32));
    const double fine = relative(mesh_of(40, 64));
    MESSAGE("s(Pi3 u, Pi3 u) / ||u||_H1^2: " << coarse << " -> " << fine);
    CHECK(coarse / fine >= 0.7 * 64);
  }
  SUBCASE("symmetric and semidefinite") {
    for (int k = 1; k <= 3; ++k) {
      auto s = space_of(mesh_of(2, 3), k);
      for (auto v : {PrimalStab::ResidualJump, PrimalStab::FaceOnly}) {
        const auto S = assemble_primal_stabilizer(s, v);
        const double norm = Eigen::MatrixXd(S.matrix).cwiseAbs().maxCoeff();
        CHECK(max_asym(S.matrix) <= 1e-13 * norm);
        CHECK(min_eig(S.matrix) >= -1e-10 * norm);
      }
    }
  }
  SUBCASE("face-only needs q in {p-2, p-1, p}") {
    auto s = space_of(mesh_of(2, 3), 3);
    CHECK_NOTHROW(assemble_primal_stabilizer(s, PrimalStab::FaceOnly, 1));
    try {
      assemble_primal_stabilizer(space_of(mesh_of(2, 3), 1), PrimalStab::FaceOnly, 2);
      FAIL("expected VariantConstraint");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::VariantConstraint);
    }
  }
}

TEST_CASE("dual stabilizer") {
  auto m = mesh_of(4, 6);
  const double h = m->h();
  SUBCASE("constants") {
    auto s = space_of(m, 2);
    const auto S = assemble_dual_stabilizer(s);
    const auto one = interpolate_nodal(s, [](double, double) { return 1.0; });
    CHECK(S.form(one.coeffs, one.coeffs) == doctest::Approx(6.0 / h).epsilon(1e-13));
    const DiscreteField zero(s);
    CHECK(S.form(zero.coeffs, zero.coeffs) == 0.0);
  }
  SUBCASE("bubble against an independent quadrature") {
    auto s = space_of(m, 2);
    const auto z = interpolate_nodal(s, [](double t, double x) { return x * (1 - x) * t * (2 - t); });
    const double grad = integrate_cells(z, 10, [](int, Point, const FieldSample& v) { return v.grad.squaredNorm(); });
    const double bnd = integrate_boundary(z, 10, {BoundaryTag::Sigma, BoundaryTag::Initial, BoundaryTag::Final},
                                          [](const Facet&, Point, const FieldSample& v) { return sq(v.value); });
    const double val = assemble_dual_stabilizer(s).form(z.coeffs, z.coeffs);
    CHECK(val == doctest::Approx(grad + bnd / h).epsilon(1e-10));
  }
  SUBCASE("identity for random fields") {
    for (int k = 1; k <= 3; ++k) {
      auto s = space_of(m, k);
      const auto S = assemble_dual_stabilizer(s);
      for (unsigned seed = 0; seed < 10; ++seed) {
        const auto z = random_field(s, 40 + seed);
        const double grad = integrate_cells(z, 2 * k + 2, [](int, Point, const FieldSample& v) { return v.grad.squaredNorm(); });
        const double bnd = integrate_boundary(z, 2 * k + 2, {BoundaryTag::Sigma, BoundaryTag::Initial, BoundaryTag::Final},
                                              [](const Facet&, Point, const FieldSample& v) { return sq(v.value); });
        CHECK(S.form(z.coeffs, z.coeffs) == doctest::Approx(grad + bnd / h).epsilon(1e-12));
      }
    }
  }
  SUBCASE("residual style adds the time-boundary terms") {
    auto s = space_of(m, 2);
    const auto z = random_field(s, 77);
    const double primal = assemble_primal_stabilizer(s).form(z.coeffs, z.coeffs);
    const double extra = integrate_boundary(z, 6, {BoundaryTag::Initial, BoundaryTag::Final},
                                            [&](const Facet&, Point, const FieldSample& v) {
                                              return sq(v.value) / h + h * sq(v.grad.x());
                                            });
    const double val = assemble_dual_stabilizer(s, DualStab::ResidualStyle).form(z.coeffs, z.coeffs);
    CHECK(val == doctest::Approx(primal + extra).epsilon(1e-12));
    const auto S = assemble_dual_stabilizer(s, DualStab::ResidualStyle);
    CHECK(max_asym(S.matrix) <= 1e-13 * Eigen::MatrixXd(S.matrix).cwiseAbs().maxCoeff());
  }
}

TEST_CASE("data functional") {
  auto m = mesh_of(10, 20, 2.0, {0.1, 0.3});
  auto s = space_of(m, 2);
  ObservationData zero{{0.1, 0.3}, [](double, double) { return 0.0; }};
  CHECK(assemble_data_functional(s, zero).norm() == 0.0);
  ObservationData one{{0.1, 0.3}, [](double, double) { return 1.0; }};
  CHECK(assemble_data_functional(s, one).sum() == doctest::Approx(0.4).epsilon(1e-13));
  CHECK_THROWS_AS(one(1.0, 0.5), Error);

  // l - M_O I(u) = (u - I u, phi)_O shrinks like h^{p+1}.
  double prev = 0.0;
  for (int nx : {10, 20}) {
    auto mm = mesh_of(nx, 2 * nx, 2.0, {0.1, 0.3});
    auto sp = space_of(mm, 2);
    ObservationData d{{0.1, 0.3}, ex1};
    const Eigen::VectorXd l = assemble_data_functional(sp, d);
    const auto mo = assemble_observation_mass(sp, {0.1, 0.3});
    const Eigen::VectorXd diff = l - mo.matrix * interpolate_nodal(sp, ex1).coeffs;
    // Scale by the l2 -> L2 factor of a basis function (~h) to get a function-space norm.
    const double err = diff.norm() / mm->h();
    if (prev > 0.0) {
      MESSAGE("data functional ratio " << prev / err);
      CHECK(prev / err > 0.8 * 8.0);
    }
    prev = err;
  }
}

TEST_CASE("facet jumps") {
  auto m = std::make_shared<const SpacetimeMesh>(glued_pair());
  auto s1 = space_of(m, 1);
  int diag = -1;
  for (std::size_t f = 0; f < m->num_facets(); ++f) {
    if (m->facets()[f].interior()) diag = static_cast<int>(f);
  }
  REQUIRE(diag >= 0);
  // Zero on one triangle, t/2 + x - 1 on the other: the jump is
  // n_out . A grad with n_out = -(1,2)/sqrt(5) and A grad = (-1/2, 1).
  const auto kink = interpolate_nodal(s1, [](double t, double x) { return std::max(0.0, t / 2 + x - 1); });
  CHECK(facet_jump(kink, diag, {1.0, 0.5}) == doctest::Approx(-1.5 / std::sqrt(5.0)).epsilon(1e-13));

  const auto affine = interpolate_nodal(s1, [](double t, double x) { return 3 * t - x; });
  CHECK(std::abs(facet_jump(affine, diag, {1.0, 0.5})) < 1e-13);

  auto big = mesh_of(3, 4);
  auto s2 = space_of(big, 2);
  const auto quad = interpolate_nodal(s2, [](double t, double x) { return t * t - 2 * t * x + 0.5 * x * x; });
  for (std::size_t f = 0; f < big->num_facets(); ++f) {
    const Facet& fc = big->facets()[f];
    if (!fc.interior()) continue;
    const Point& a = big->vertices()[fc.v[0]];
    const Point& b = big->vertices()[fc.v[1]];
    CHECK(std::abs(facet_jump(quad, static_cast<int>(f), {0.5 * (a.t + b.t), 0.5 * (a.x + b.x)})) < 1e-11);
  }

  int boundary = -1;
  for (std::size_t f = 0; f < m->num_facets(); ++f) {
    if (!m->facets()[f].interior()) boundary = static_cast<int>(f);
  }
  try {
    facet_jump(kink, boundary, {0.0, 0.5});
    FAIL("expected BoundaryFacet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BoundaryFacet);
  }
}

TEST_CASE("local stabilizer pieces sum to the global form") {
  auto m = mesh_of(3, 5, 2.0, {0.0, 1.0 / 3});
  auto s = space_of(m, 2);
  const auto u = random_field(s, 5);
  for (auto v : {PrimalStab::ResidualJump, PrimalStab::FaceOnly}) {
    const auto loc = primal_stabilizer_local(u, v);
    double sum = 0.0;
    for (double x : loc) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(sum == doctest::Approx(assemble_primal_stabilizer(s, v).form(u.coeffs, u.coeffs)).epsilon(1e-11));
  }
  const auto dl = dual_stabilizer_local(u);
  double dsum = 0.0;
  for (double x : dl) dsum += x;
  CHECK(dsum == doctest::Approx(assemble_dual_stabilizer(s).form(u.coeffs, u.coeffs)).epsilon(1e-11));
}

TEST_CASE("matrix market export") {
  SparseMatrix a(2, 3);
  a.insert(0, 1) = 2.5;
  a.insert(1, 2) = -1.0;
  a.makeCompressed();
  std::ostringstream os;
  write_matrix_market(os, a);
  const std::string out = os.str();
  CHECK(out.rfind("%%MatrixMarket matrix coordinate real general", 0) == 0);
  CHECK(out.find("2 3 2") != std::string::npos);
  CHECK(out.find("1 2 2.5") != std::string::npos);
  CHECK(out.find("2 3 -1") != std::string::npos);
}
