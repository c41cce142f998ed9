#pragma once

// Shared helpers for the unit tests. Reference CDFs here come from Boost.Math
// (regularized incomplete gamma, erfc) rather than from the library's own closed forms.

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "majorant/rngdist.hpp"

namespace testing {

inline std::vector<double> draw(std::size_t n, const std::function<double()>& f) {
  std::vector<double> out(n);
  for (auto& v : out) v = f();
  return out;
}

// CDF of the chi distribution with k degrees of freedom, scaled by sigma.
inline double chi_cdf(double x, int k, double sigma = 1.0) {
  if (x <= 0.0) return 0.0;
  const double s = x / sigma;
  return boost::math::gamma_p(0.5 * k, 0.5 * s * s);
}

// Gamma(shape 1/2, rate r) CDF.
inline double gamma_half_cdf(double x, double rate) {
  return x <= 0.0 ? 0.0 : boost::math::gamma_p(0.5, rate * x);
}

inline double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double variance(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

// Standard error of the mean.
inline double sem(const std::vector<double>& x) {
  return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

}  // namespace testing
