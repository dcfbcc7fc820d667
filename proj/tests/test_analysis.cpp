#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "support.hpp"

using namespace stfem;
using namespace stfem::testing;

namespace {

constexpr double pi = std::numbers::pi;
const Interval kOmega{0.1, 0.3};

}  // namespace

TEST_CASE("spacetime L2 error") {
  auto m = mesh_of(4, 6);
  auto s2 = space_of(m, 2);
  const auto f = [](double t, double x) { return 1 + t * x - 0.3 * x * x; };
  const auto u = interpolate_nodal(s2, f);
  const auto e = error_l2_spacetime(u, f);
  CHECK(e.value <= 1e-13);
  CHECK_FALSE(e.absolute);
  CHECK(l2_norm_exact(*m, [](double, double) { return 1.0; }) == doctest::Approx(std::sqrt(2.0)));

  const auto z = error_l2_spacetime(u, [](double, double) { return 0.0; });
  CHECK(z.absolute);
  CHECK(z.value == doctest::Approx(z.numerator));
  CHECK(z.value > 0.0);
}

TEST_CASE("traces at t = 0") {
  auto m = mesh_of(20, 24);
  auto s3 = space_of(m, 3);
  const auto ex = example1();
  const auto u = interpolate_nodal(s3, ex.as_function());
  const auto tr = trace_at_initial(u);
  const auto dtr = dt_trace_at_initial(u);
  CHECK(tr.segments() == 20);
  for (double x : {0.05, 0.2, 0.5, 0.77}) {
    CHECK(tr(x) == doctest::Approx(std::sin(3 * pi * x)).epsilon(2e-3));
    CHECK(std::abs(dtr(x)) < 0.05);
  }
  CHECK(error_trace0(u, ex).value < 1e-3);

  auto s1 = space_of(m, 1);
  const auto t = interpolate_nodal(s1, [](double t, double) { return t; });
  const auto c = interpolate_nodal(s1, [](double, double) { return 4.0; });
  for (double x : {0.0, 0.33, 0.9, 1.0}) {
    CHECK(trace_at_initial(t)(x) == doctest::Approx(0.0));
    CHECK(dt_trace_at_initial(t)(x) == doctest::Approx(1.0));
    CHECK(dt_trace_at_initial(c)(x) == doctest::Approx(0.0));
  }
}

TEST_CASE("H^-1 norm by the Riesz map") {
  for (int k : {1, 2, 4}) {
    const double v = hminus1_norm([k](double x) { return std::sin(k * pi * x); });
    CHECK(std::abs(v - 1.0 / (std::sqrt(2.0) * k * pi)) <= 1e-4);
  }
  CHECK(hminus1_norm([](double) { return 0.0; }) == 0.0);
  const auto f = [](double x) { return x < 0.4 ? 1.0 : -2.0 * x; };
  const std::vector<double> br{0.0, 0.4, 1.0};
  const double a = hminus1_norm(f, br);
  const double b = hminus1_norm([&](double x) { return -3.5 * f(x); }, br);
  CHECK(b == doctest::Approx(3.5 * a).epsilon(1e-12));
  // Refining the auxiliary mesh changes little.
  CHECK(hminus1_norm(f, br, 4000) == doctest::Approx(a).epsilon(1e-5));
}

TEST_CASE("dual norm") {
  auto m = mesh_of(4, 6);
  auto s1 = space_of(m, 1);
  CHECK(dual_norm_l2h10(DiscreteField(s1)) == 0.0);
  CHECK(dual_norm_l2h10(interpolate_nodal(s1, [](double, double x) { return x; })) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  CHECK(dual_norm_l2h10(interpolate_nodal(s1, [](double t, double) { return t; })) < 1e-13);
}

TEST_CASE("triple norm") {
  auto m = mesh_of(10, 13, 2.0, kOmega);
  auto sp = space_of(m, 2);
  auto sq1 = space_of(m, 1);
  const auto sys = build_system(sp, sq1, make_observation(example1(), kOmega));
  CHECK(triple_norm(sys, Eigen::VectorXd::Zero(sys.np()), Eigen::VectorXd::Zero(sys.nq())) == 0.0);
  const auto u = random_field(sp, 1);
  const double t = triple_norm(sys, u.coeffs, Eigen::VectorXd::Zero(sys.nq()));
  CHECK(t * t == doctest::Approx(u.coeffs.dot(sys.mass_o * u.coeffs) + u.coeffs.dot(sys.stab * u.coeffs)).epsilon(1e-13));

  // With exact derivatives, the error form of a discrete field against the
  // zero function equals the matrix form of that field.
  const JetFunction zero = [](double, double) { return Jet{}; };
  const double te = triple_norm_error(u, nullptr, zero, kOmega);
  CHECK(te == doctest::Approx(t).epsilon(1e-9));
}

TEST_CASE("interpolation errors decay at order p") {
  const auto ex = example1();
  const auto ladder = level_ladder();
  for (int p = 1; p <= 3; ++p) {
    std::vector<double> h, tn, cn;
    for (int l = 0; l < 3; ++l) {
      auto m = mesh_of(ladder[l].nx, ladder[l].nt, 2.0, kOmega);
      const auto pi_u = interpolate_nodal(space_of(m, p), ex.as_function());
      h.push_back(m->h());
      tn.push_back(triple_norm_error(pi_u, nullptr, ex.jet, kOmega));
      cn.push_back(continuity_norm(pi_u, &ex.jet));
    }
    const auto ft = fit_rate(h, tn);
    const auto fc = fit_rate(h, cn);
    MESSAGE("P" << p << " triple slope " << ft.tau << ", continuity slope " << fc.tau);
    CHECK(ft.tau >= p - 0.3);
    CHECK(fc.tau >= p - 0.3);
  }
}

TEST_CASE("continuity norm of a known field") {
  // v = x on (0,2)x(0,1): grad = (0,1), ||grad v|| = sqrt 2; A grad v . n is +/-1 on
  // Sigma only, so the flux part is sqrt(h * 2 * 2); v = 1 on x = 1 gives sqrt(2/h).
  auto m = mesh_of(4, 8);
  const double h = m->h();
  const auto v = interpolate_nodal(space_of(m, 1), [](double, double x) { return x; });
  const double expected = std::sqrt(2.0) + std::sqrt(4.0 * h) + std::sqrt(2.0 / h);
  CHECK(continuity_norm(v) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("estimator") {
  auto m = mesh_of(10, 13, 2.0, kOmega);
  auto sp = space_of(m, 2);
  auto sq1 = space_of(m, 1);

  SUBCASE("zero fields and data") {
    ObservationData zero{kOmega, [](double, double) { return 0.0; }};
    const auto eta = eta_indicators(DiscreteField(sp), DiscreteField(sq1), zero);
    CHECK(eta.eta2.size() == m->num_triangles());
    for (double e : eta.eta2) CHECK(e == 0.0);
    CHECK(eta.total() == 0.0);
  }
  SUBCASE("local values sum to the global forms") {
    for (auto variant : {StabVariant{}, StabVariant{PrimalStab::FaceOnly, DualStab::ResidualStyle}}) {
      const auto data = make_observation(example1(), kOmega);
      SaddleOptions o;
      o.variant = variant;
      const auto sys = build_system(sp, sq1, data, o);
      const auto sol = solve(sys);
      const auto eta = eta_indicators(sol.u, sol.z, data, variant);
      for (std::size_t k = 0; k < eta.eta2.size(); ++k) {
        CHECK(eta.eta2[k] >= 0.0);
        CHECK(eta.eta2[k] == doctest::Approx(eta.misfit[k] + eta.primal[k] + eta.dual[k]));
        if (!observation_cells(*m, kOmega)[k]) CHECK(eta.misfit[k] == 0.0);
      }
      const double global = eta_global(sys, sol.u, sol.z, data);
      CHECK(std::abs(eta.total() - global) <= 1e-12 * global);
      // The matrix forms agree up to the cancellation in u^T S u.
      const double via_matrix = sol.u.coeffs.dot(sys.stab * sol.u.coeffs) +
                                sol.z.coeffs.dot(sys.dual_stab * sol.z.coeffs);
      double parts = 0.0;
      for (std::size_t k = 0; k < eta.eta2.size(); ++k) parts += eta.primal[k] + eta.dual[k];
      CHECK(via_matrix == doctest::Approx(parts).epsilon(1e-6));
    }
  }
}

TEST_CASE("estimator decreases under refinement") {
  const auto ladder = level_ladder();
  const auto ex = example1();
  const auto data = make_observation(ex, kOmega);
  double prev = 0.0;
  for (int l = 0; l < 3; ++l) {
    auto m = mesh_of(ladder[l].nx, ladder[l].nt, 2.0, kOmega);
    const auto sol = solve(build_system(space_of(m, 2), space_of(m, 1), data));
    const double total = eta_indicators(sol.u, sol.z, data).total();
    if (l > 0) CHECK(total < prev);
    prev = total;
  }
}

TEST_CASE("Doerfler marking") {
  const std::vector<double> eta{1.0, 5.0, 2.0, 2.0, 0.0};
  CHECK(dorfler_mark(eta, 0.5) == std::vector<int>{1});
  CHECK(dorfler_mark(eta, 0.6) == std::vector<int>{1, 2});
  CHECK(dorfler_mark(eta, 1.0) == std::vector<int>{0, 1, 2, 3});
  CHECK(dorfler_mark(std::vector<double>(3, 0.0), 0.5).empty());
  CHECK_THROWS_AS(dorfler_mark(eta, 0.0), Error);
}

TEST_CASE("rate fitting") {
  const std::vector<double> h{0.2, 0.1, 0.05, 0.025};
  std::vector<double> e2, e15;
  for (double x : h) {
    e2.push_back(x * x);
    e15.push_back(3 * std::pow(x, 1.5));
  }
  const auto a = fit_rate(h, e2);
  CHECK(std::abs(a.tau - 2.0) < 1e-10);
  CHECK(std::abs(a.beta - 1.0) < 1e-10);
  CHECK(a.r2 == doctest::Approx(1.0));
  CHECK(a.points == 4);
  const auto b = fit_rate(h, e15);
  CHECK(std::abs(b.tau - 1.5) < 1e-10);
  CHECK(std::abs(b.beta - 3.0) < 1e-10);

  // Relative L2 errors of a P2 x P1 study on five meshes.
  const std::vector<double> hp{1.57e-1, 8.22e-2, 4.03e-2, 2.29e-2, 1.25e-2};
  const std::vector<double> ep{9.18e-2, 1.48e-2, 2.80e-3, 8.01e-4, 2.42e-4};
  CHECK(std::abs(fit_rate(hp, ep).tau - 2.33) <= 0.15);

  try {
    fit_rate(std::vector<double>{0.1, 0.05, 0.025}, std::vector<double>{1.0, 0.0, 0.5});
    FAIL("expected NonPositive");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositive);
  }
  CHECK_THROWS_AS(fit_rate(std::vector<double>{0.1, 0.05}, std::vector<double>{1.0, 0.5}), Error);
}

TEST_CASE("error report csv") {
  CHECK(std::string(ErrorReport::csv_header()) ==
        "level,h,ndof_p,ndof_q,rel_l2_M,rel_l2_trace0,hm1_dt_trace0,dual_norm,triple_norm,eta_total,solve_seconds");
  ErrorReport r;
  r.level = 2;
  r.h = 0.04;
  r.ndof_p = 10;
  r.ndof_q = 5;
  r.rel_l2_M = 1.5e-3;
  std::ostringstream os;
  r.write_csv(os);
  CHECK(os.str().rfind("2,0.04,10,5,0.0015,", 0) == 0);
  CHECK(os.str().back() == '\n');
}
