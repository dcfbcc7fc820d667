#include "stfem/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "stfem/error.hpp"

namespace stfem {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // Returns P_n(x) and P_n'(x) by the three-term recurrence.
  const auto legendre = [n](double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

namespace {

QuadratureRule make_triangle_rule(int degree) {
  // The collapse map (a,b) -> (a(1-b), b) has Jacobian (1-b), which raises the
  // degree in b by one.
  const int n = (degree + 3) / 2;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule rule;
  rule.degree = degree;
  for (int j = 0; j < n; ++j) {
    const double b = 0.5 * (x[j] + 1.0);
    for (int i = 0; i < n; ++i) {
      const double a = 0.5 * (x[i] + 1.0);
      rule.points.push_back({a * (1.0 - b), b});
      rule.weights.push_back(0.25 * w[i] * w[j] * (1.0 - b));
    }
  }
  return rule;
}

LineRule make_line_rule(int degree) {
  const int n = degree / 2 + 1;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  LineRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    rule.points.push_back(0.5 * (x[i] + 1.0));
    rule.weights.push_back(0.5 * w[i]);
  }
  return rule;
}

std::mutex cache_mutex;

}  // namespace

const QuadratureRule& quadrature_for(int degree_needed) {
  if (degree_needed < 0 || degree_needed > kMaxQuadratureDegree) {
    throw Error(ErrorCode::UnsupportedDegree,
                "no triangle rule for degree " + std::to_string(degree_needed));
  }
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(cache_mutex);
  auto it = cache.find(degree_needed);
  if (it == cache.end()) it = cache.emplace(degree_needed, make_triangle_rule(degree_needed)).first;
  return it->second;
}

const LineRule& line_rule_for(int degree_needed) {
  if (degree_needed < 0 || degree_needed > 2 * kMaxQuadratureDegree) {
    throw Error(ErrorCode::UnsupportedDegree,
                "no line rule for degree " + std::to_string(degree_needed));
  }
  static std::map<int, LineRule> cache;
  std::lock_guard lock(cache_mutex);
  auto it = cache.find(degree_needed);
  if (it == cache.end()) it = cache.emplace(degree_needed, make_line_rule(degree_needed)).first;
  return it->second;
}

}  // namespace stfem
