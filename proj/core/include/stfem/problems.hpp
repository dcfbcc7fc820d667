#pragma once

#include <string>
#include <vector>

#include "stfem/forms.hpp"

namespace stfem {

enum class Smoothness { Smooth, H1Only };

struct ExactSolution {
  std::string name;
  JetFunction jet;
  Smoothness smoothness = Smoothness::Smooth;
  int k_max = 0;             // series truncation, 0 for closed forms
  double length_scale = 1.0;  // shortest oscillation length, drives norm quadrature

  double value(double t, double x) const { return jet(t, x).u; }
  double dt(double t, double x) const { return jet(t, x).ut; }
  double dx(double t, double x) const { return jet(t, x).ux; }
  SpacetimeFunction as_function() const {
    return [j = jet](double t, double x) { return j(t, x).u; };
  }
};

/// u = sin(3 pi x) cos(3 pi t).
ExactSolution example1();

/// Truncated Fourier series with initial position 1 - |2x - 1| and initial
/// velocity the indicator of (1/3, 2/3), both expanded in sqrt(2) sin(k pi x).
ExactSolution example2(int k_max = 50);

/// Position and velocity coefficients of example2.
double example2_a(int k);
double example2_b(int k);

/// Data on (0,T) x omega taken from the exact solution.
ObservationData make_observation(const ExactSolution& sol, Interval omega);

struct ExperimentConfig {
  int example = 1;
  double T = 2.0;
  Interval omega{0.1, 0.3};
  double gamma = 1e-3;
  double gamma_star = 1.0;
  int p = 1;
  int q = 1;
  StabVariant variant;
  int level_lo = 0;
  int level_hi = 3;
  int k_max = 50;

  /// Throws InvalidArgument (or DegreeOrder for q > p unless allowed).
  void validate(bool allow_locking = false) const;
  ExactSolution solution() const;
};

}  // namespace stfem
