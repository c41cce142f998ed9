#pragma once

// Goodness-of-fit machinery and the report type every experiment returns.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace majorant {

struct TestReport {
  std::string name;
  std::vector<std::size_t> n;  // sample sizes
  double statistic = 0.0;
  double p_value = 1.0;
  std::uint64_t seed = 0;
  double threshold = 0.01;  // the declared pass criterion, meaning depends on the test
  bool passed = false;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
  double runtime_seconds = 0.0;  // serialized only on request, to keep reruns byte-identical
};

/// P(sup |Brownian bridge| > lambda), alternating series for lambda >= 1.18 and
/// the theta-function series below.
double kolmogorov_survival(double lambda);

/// Asymptotic p-value for statistic d at effective sample size ne, with
/// Stephens' finite-sample correction (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) d.
double ks_p_value(double d, double ne);

/// Exact two-sample statistic sup |F1 - F2|, asymptotic p-value. Passes when p > 0.01.
TestReport ks_two_sample(std::span<const double> s1, std::span<const double> s2);

/// sup |F_n - F|. Throws InputError when cdf decreases along the sorted
/// sample or leaves [0, 1]. Passes when p > 0.01.
TestReport ks_one_sample(std::span<const double> s, const std::function<double(double)>& cdf);

/// Pearson chi-square on counts against expected counts (same total). Adjacent
/// bins are pooled left to right until each expected count is at least 5.
/// dof = pooled bins - 1 - fitted_parameters. Passes when p > 0.01.
TestReport chi_square(std::span<const double> observed, std::span<const double> expected,
                      int fitted_parameters = 0);

/// Upper tail of the chi-square distribution.
double chi_square_survival(double statistic, double dof);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};
MeanSe mean_se(std::span<const double> x);

}  // namespace majorant
