#include "majorant/path.hpp"

#include <cmath>
#include <string>

#include "majorant/errors.hpp"

namespace majorant {

void require_increasing(std::span<const double> times, const char* who) {
  if (times.empty()) throw InputError(std::string(who) + ": empty time grid");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw InputError(std::string(who) + ": non-finite time");
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw InputError(std::string(who) + ": times must be strictly increasing");
    }
  }
}

std::vector<double> uniform_grid(double first, double last, double step) {
  if (!(step > 0.0) || !(last >= first)) throw InputError("uniform_grid: bad range or step");
  const auto n = static_cast<std::size_t>(std::floor((last - first) / step + 1e-6));
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid[i] = first + static_cast<double>(i) * step;
  return grid;
}

void running_sum(std::span<double> x, double start) {
  double acc = start;
  for (double& v : x) {
    acc += v;
    v = acc;
  }
}

}  // namespace majorant
