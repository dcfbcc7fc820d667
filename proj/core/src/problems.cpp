#include "stfem/problems.hpp"

#include <cmath>
#include <numbers>

#include "stfem/error.hpp"

namespace stfem {

using std::numbers::pi;

ExactSolution example1() {
  ExactSolution s;
  s.name = "example1";
  s.length_scale = 1.0 / 3.0;
  s.jet = [](double t, double x) {
    const double w = 3.0 * pi;
    const double sx = std::sin(w * x), cx = std::cos(w * x);
    const double st = std::sin(w * t), ct = std::cos(w * t);
    Jet j;
    j.u = sx * ct;
    j.ut = -w * sx * st;
    j.ux = w * cx * ct;
    j.utt = -w * w * j.u;
    j.uxx = -w * w * j.u;
    return j;
  };
  return s;
}

double example2_a(int k) {
  // sin(pi k / 2) by k mod 4, so even modes vanish exactly.
  static constexpr double sign[4] = {0.0, 1.0, 0.0, -1.0};
  return 4.0 * std::sqrt(2.0) / (pi * pi * k * k) * sign[k % 4];
}

double example2_b(int k) {
  // cos(pi k / 3) - cos(2 pi k / 3) by k mod 6.
  static constexpr double diff[6] = {0.0, 1.0, 0.0, -2.0, 0.0, 1.0};
  return std::sqrt(2.0) / (pi * k) * diff[k % 6];
}

ExactSolution example2(int k_max) {
  if (k_max < 1) throw Error(ErrorCode::InvalidArgument, "k_max must be at least 1");
  std::vector<double> a(k_max + 1), b(k_max + 1);
  for (int k = 1; k <= k_max; ++k) {
    a[k] = example2_a(k);
    b[k] = example2_b(k);
  }
  ExactSolution s;
  s.name = "example2";
  s.smoothness = Smoothness::H1Only;
  s.k_max = k_max;
  s.length_scale = 1.0 / k_max;
  s.jet = [a, b, k_max](double t, double x) {
    const double r2 = std::sqrt(2.0);
    const double c1t = std::cos(pi * t), s1t = std::sin(pi * t);
    const double c1x = std::cos(pi * x), s1x = std::sin(pi * x);
    double ckt = 1.0, skt = 0.0, ckx = 1.0, skx = 0.0;
    Jet j;
    for (int k = 1; k <= k_max; ++k) {
      // angle addition: (k-1) theta -> k theta
      const double nct = ckt * c1t - skt * s1t;
      skt = skt * c1t + ckt * s1t;
      ckt = nct;
      const double ncx = ckx * c1x - skx * s1x;
      skx = skx * c1x + ckx * s1x;
      ckx = ncx;
      if (a[k] == 0.0 && b[k] == 0.0) continue;
      const double kp = k * pi;
      const double time = a[k] * ckt + b[k] / kp * skt;
      const double time_t = -a[k] * kp * skt + b[k] * ckt;
      j.u += time * r2 * skx;
      j.ut += time_t * r2 * skx;
      j.ux += time * r2 * kp * ckx;
      j.uxx -= time * r2 * kp * kp * skx;
    }
    j.utt = j.uxx;
    return j;
  };
  return s;
}

ObservationData make_observation(const ExactSolution& sol, Interval omega) {
  ObservationData d;
  d.omega = omega;
  d.fn = sol.as_function();
  d.source = sol.k_max > 0 ? ObservationData::Source::SampledSeries
                           : ObservationData::Source::ExactFunction;
  return d;
}

void ExperimentConfig::validate(bool allow_locking) const {
  if (example != 1 && example != 2) throw Error(ErrorCode::InvalidArgument, "example must be 1 or 2");
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be positive");
  if (!(omega.lo >= 0.0 && omega.hi <= 1.0 && omega.lo < omega.hi)) {
    throw Error(ErrorCode::InvalidArgument, "omega must be a nonempty subinterval of (0,1)");
  }
  if (p < 1 || p > 3 || q < 1 || q > 3) throw Error(ErrorCode::InvalidArgument, "degrees must be in 1..3");
  if (q > p && !allow_locking) throw Error(ErrorCode::DegreeOrder, "q must not exceed p");
  if (level_lo < 0 || level_hi < level_lo) throw Error(ErrorCode::InvalidArgument, "bad level range");
  if (k_max < 1) throw Error(ErrorCode::InvalidArgument, "k_max must be at least 1");
}

ExactSolution ExperimentConfig::solution() const {
  return example == 1 ? example1() : example2(k_max);
}

}  // namespace stfem
