#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "majorant/errors.hpp"
#include "majorant/stats.hpp"

namespace majorant {

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // 1 - sqrt(2 pi)/lambda sum_k exp(-(2k-1)^2 pi^2 / (8 lambda^2))
    const double base = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const double j = 2.0 * k - 1.0;
      sum += std::exp(-j * j * base);
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_p_value(double d, double ne) {
  const double root = std::sqrt(ne);
  return kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
}

TestReport ks_two_sample(std::span<const double> s1, std::span<const double> s2) {
  if (s1.empty() || s2.empty()) throw InputError("ks_two_sample: empty sample");
  std::vector<double> a(s1.begin(), s1.end());
  std::vector<double> b(s2.begin(), s2.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  TestReport r;
  r.name = "ks_two_sample";
  r.n = {a.size(), b.size()};
  r.statistic = d;
  r.p_value = ks_p_value(d, na * nb / (na + nb));
  r.passed = r.p_value > r.threshold;
  return r;
}

TestReport ks_one_sample(std::span<const double> s, const std::function<double(double)>& cdf) {
  if (s.empty()) throw InputError("ks_one_sample: empty sample");
  std::vector<double> x(s.begin(), s.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    if (!(f >= -1e-12 && f <= 1.0 + 1e-12) || f < prev - 1e-12) {
      std::ostringstream msg;
      msg << "ks_one_sample: cdf value " << f << " at " << x[i]
          << " is outside [0, 1] or decreasing";
      throw InputError(msg.str());
    }
    prev = std::max(prev, f);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  TestReport r;
  r.name = "ks_one_sample";
  r.n = {x.size()};
  r.statistic = d;
  r.p_value = ks_p_value(d, n);
  r.passed = r.p_value > r.threshold;
  return r;
}

double chi_square_survival(double statistic, double dof) {
  if (!(dof > 0.0)) throw InputError("chi_square: need at least one degree of freedom");
  if (!(statistic > 0.0)) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

TestReport chi_square(std::span<const double> observed, std::span<const double> expected,
                      int fitted_parameters) {
  if (observed.size() != expected.size() || observed.empty()) {
    throw InputError("chi_square: observed and expected must be nonempty and the same length");
  }
  std::vector<double> obs;
  std::vector<double> exp;
  double o = 0.0;
  double e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o += observed[i];
    e += expected[i];
    if (e >= 5.0) {
      obs.push_back(o);
      exp.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (exp.empty()) {
      obs.push_back(o);
      exp.push_back(e);
    } else {
      obs.back() += o;
      exp.back() += e;
    }
  }
  double stat = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!(exp[i] > 0.0)) throw InputError("chi_square: zero expected count");
    const double d = obs[i] - exp[i];
    stat += d * d / exp[i];
    total += obs[i];
  }
  TestReport r;
  r.name = "chi_square";
  r.n = {static_cast<std::size_t>(std::llround(total))};
  r.statistic = stat;
  r.p_value = chi_square_survival(stat, static_cast<double>(obs.size()) - 1.0 - fitted_parameters);
  r.passed = r.p_value > r.threshold;
  r.metadata["bins"] = obs.size();
  return r;
}

MeanSe mean_se(std::span<const double> x) {
  if (x.empty()) throw InputError("mean_se: empty sample");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double n = static_cast<double>(x.size());
  return {mean, x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

}  // namespace majorant
