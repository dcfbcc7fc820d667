#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stfem/problems.hpp"
#include "stfem/saddle.hpp"

namespace stfem {

/// Quadrature for norms involving exact solutions: a fixed-degree rule on
/// each triangle, subdivided so that sub-cells are no larger than
/// `length_scale`.
struct NormOptions {
  int degree = 12;
  double length_scale = 1.0;

  static NormOptions for_solution(const ExactSolution& s) { return {12, s.length_scale}; }
};

struct RelativeError {
  double value = 0.0;        // relative error, or the absolute error if `absolute`
  double numerator = 0.0;
  double denominator = 0.0;
  bool absolute = false;     // set when the exact norm vanishes
};

/// ||u - u_h||_M / ||u||_M.
RelativeError error_l2_spacetime(const DiscreteField& u_h, const SpacetimeFunction& u,
                                 const NormOptions& opt = {});

/// ||u||_M with the same quadrature.
double l2_norm_exact(const SpacetimeMesh& mesh, const SpacetimeFunction& u,
                     const NormOptions& opt = {});

/// Piecewise function on (0,1) with breakpoints at trace-mesh vertices.
struct Piecewise1D {
  std::vector<double> breaks;                          // sorted, from 0 to 1
  std::function<double(std::size_t seg, double x)> on;  // evaluation on segment seg

  double operator()(double x) const;
  std::size_t segments() const { return breaks.empty() ? 0 : breaks.size() - 1; }
};

/// u_h(0, .) and d_t u_h(0, .), from the triangles adjacent to t = 0.
Piecewise1D trace_at_initial(const DiscreteField& u_h);
Piecewise1D dt_trace_at_initial(const DiscreteField& u_h);

/// ||f||_{H^-1(0,1)} via the Riesz map: solve -w'' = f, w(0) = w(1) = 0 with
/// P1 elements on a uniform mesh of `cells` cells merged with `breaks`, and
/// return ||w'||_{L2}.
double hminus1_norm(const std::function<double(double)>& f, std::span<const double> breaks = {},
                    int cells = 1000, double length_scale = 1.0);

/// ||(u - u_h)(0, .)||_{L2(0,1)} / ||u(0, .)||.
RelativeError error_trace0(const DiscreteField& u_h, const ExactSolution& u);

/// ||d_t (u - u_h)(0, .)||_{H^-1}, relative to ||u_t(0, .)||_{H^-1}.
RelativeError error_dt_trace0_hminus1(const DiscreteField& u_h, const ExactSolution& u,
                                      int cells = 1000);

/// (int_M |d_x z_h|^2)^{1/2}.
double dual_norm_l2h10(const DiscreteField& z_h);

/// sqrt(u^T M_O u + u^T S u + z^T S* z) with the system's matrices.
double triple_norm(const SaddleSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& z);

/// sqrt(||u - u_h||_O^2 + s(u - u_h, u - u_h)) with exact derivatives of u,
/// plus s*(z_h, z_h) when z_h is given.
double triple_norm_error(const DiscreteField& u_h, const DiscreteField* z_h, const JetFunction& u,
                         Interval omega, StabVariant variant = {}, int extra_degree = 6);

/// s(u - u_h, u - u_h) with exact derivatives of u.
double stabilizer_error(const DiscreteField& u_h, const JetFunction& u,
                        PrimalStab variant = PrimalStab::ResidualJump, int extra_degree = 6);

/// ||v||_* = ||grad v||_M + ||h^{1/2} A grad v . n||_dM + ||h^{-1/2} v||_Sigma
/// for v = u - u_h (or v = u_h when u is null).
double continuity_norm(const DiscreteField& u_h, const JetFunction* u = nullptr,
                       int extra_degree = 6);

struct EtaField {
  std::vector<double> eta2;  // per triangle
  std::vector<double> misfit;
  std::vector<double> primal;
  std::vector<double> dual;

  double total() const;
};

/// eta_K^2 = ||u_h - u_O||^2_{O cap K} + s_K(u_h, u_h) + s*_K(z_h, z_h).
EtaField eta_indicators(const DiscreteField& u_h, const DiscreteField& z_h,
                        const ObservationData& data, StabVariant variant = {});

/// ||u_h - u_O||_O^2 + s(u_h, u_h) + s*(z_h, z_h), each integrated over the
/// whole mesh in one pass. The variant comes from the system options.
double eta_global(const SaddleSystem& sys, const DiscreteField& u_h, const DiscreteField& z_h,
                  const ObservationData& data);

/// Smallest set of triangles carrying a fraction theta of sum eta^2, largest
/// first (ties broken by index). Returned ids are sorted ascending.
std::vector<int> dorfler_mark(std::span<const double> eta2, double theta);

struct RateFit {
  double beta = 0.0;
  double tau = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/// Least-squares line through (log h, log e): e ~ beta h^tau.
RateFit fit_rate(std::span<const double> h, std::span<const double> e);

struct ErrorReport {
  int level = 0;
  double h = 0.0;
  int ndof_p = 0;
  int ndof_q = 0;
  double rel_l2_M = 0.0;
  double rel_l2_trace0 = 0.0;
  double hm1_dt_trace0 = 0.0;
  double dual_norm = 0.0;
  double triple_norm = 0.0;
  double eta_total = 0.0;
  double solve_seconds = 0.0;

  static const char* csv_header();
  void write_csv(std::ostream& os) const;
};

}  // namespace stfem
