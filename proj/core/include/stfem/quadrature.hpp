#pragma once

#include <array>
#include <vector>

namespace stfem {

/// Rule on the reference triangle {xi >= 0, eta >= 0, xi + eta <= 1}.
/// Weights sum to the reference area 1/2.
struct QuadratureRule {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Gauss rule on [0,1]; weights sum to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

inline constexpr int kMaxQuadratureDegree = 24;

/// Collapsed (Duffy) Gauss-Legendre product rule exact for all polynomials of
/// total degree <= degree_needed. Throws UnsupportedDegree above
/// kMaxQuadratureDegree. Rules are cached.
const QuadratureRule& quadrature_for(int degree_needed);

/// Gauss-Legendre rule on [0,1] exact to degree_needed.
const LineRule& line_rule_for(int degree_needed);

/// n-point Gauss-Legendre nodes and weights on [-1,1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace stfem
