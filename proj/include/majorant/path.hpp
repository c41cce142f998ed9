#pragma once

#include <span>
#include <vector>

namespace majorant {

/// A sampled path: strictly increasing times and one value per time.
struct PathGrid {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
};

/// Throws InputError unless times is nonempty and strictly increasing.
void require_increasing(std::span<const double> times, const char* who);

/// Uniform grid first, first + step, ..., up to and including last (within step / 1e6).
std::vector<double> uniform_grid(double first, double last, double step);

/// In place running sum starting from start: x[i] <- start + x[0] + ... + x[i].
void running_sum(std::span<double> x, double start);

}  // namespace majorant
