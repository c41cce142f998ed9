#include <algorithm>

#include "majorant/bessel.hpp"
#include "majorant/errors.hpp"

namespace majorant {

double PiecewiseLinear::slope(std::size_t segment) const {
  if (segment + 1 >= breakpoints.size()) throw InputError("PiecewiseLinear: segment out of range");
  return (values[segment + 1] - values[segment]) / (breakpoints[segment + 1] - breakpoints[segment]);
}

std::size_t PiecewiseLinear::segment_index(double t) const {
  if (segments() == 0) throw InputError("PiecewiseLinear: no segments");
  if (t < breakpoints.front() || t > breakpoints.back()) {
    throw HorizonError("PiecewiseLinear: time outside the breakpoint range");
  }
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  const auto i = static_cast<std::size_t>(it - breakpoints.begin());
  return std::min(i == 0 ? 0 : i - 1, segments() - 1);
}

double PiecewiseLinear::operator()(double t) const {
  const std::size_t i = segment_index(t);
  const double lambda = (t - breakpoints[i]) / (breakpoints[i + 1] - breakpoints[i]);
  return values[i] + lambda * (values[i + 1] - values[i]);
}

double PiecewiseLinear::derivative(double t) const { return slope(segment_index(t)); }

PiecewiseLinear convex_minorant(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw InputError("convex_minorant: size mismatch");
  if (times.size() < 2) throw InputError("convex_minorant: need at least two points");
  require_increasing(times, "convex_minorant");

  // Monotone chain lower hull; a non-left turn (cross <= 0) pops the middle point.
  std::vector<std::size_t> hull;
  hull.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull.back();
      const double cross = (times[b] - times[a]) * (values[i] - values[a]) -
                           (values[b] - values[a]) * (times[i] - times[a]);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }
  PiecewiseLinear out;
  out.breakpoints.reserve(hull.size());
  out.values.reserve(hull.size());
  for (std::size_t i : hull) {
    out.breakpoints.push_back(times[i]);
    out.values.push_back(values[i]);
  }
  return out;
}

double first_vertex_after(const PiecewiseLinear& hull, double t) {
  if (hull.breakpoints.empty() || t < hull.breakpoints.front() || !(t < hull.breakpoints.back())) {
    throw HorizonError("first_vertex_after: time not before the last breakpoint");
  }
  return *std::upper_bound(hull.breakpoints.begin(), hull.breakpoints.end(), t);
}

}  // namespace majorant
