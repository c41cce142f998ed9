#include "majorant/bessel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "majorant/errors.hpp"
#include "majorant/simd.hpp"

namespace majorant {

namespace {

std::vector<double> increments_from(std::span<const double> times, double origin) {
  std::vector<double> dt(times.size());
  double prev = origin;
  for (std::size_t i = 0; i < times.size(); ++i) {
    dt[i] = times[i] - prev;
    prev = times[i];
  }
  return dt;
}

std::vector<double> normals(RngStream& rng, std::size_t n) {
  std::vector<double> z(n);
  for (double& v : z) v = rng.normal();
  return z;
}

// x0 + B(t) + mu (t - origin) at each time, with B started at `origin`.
void brownian_into(RngStream& rng, std::span<const double> dt, double x0, double mu,
                   std::span<double> out) {
  const auto z = normals(rng, dt.size());
  simd::gaussian_steps(dt, z, mu, out);
  running_sum(out, x0);
}

void check_origin(std::span<const double> times, double origin, const char* who) {
  require_increasing(times, who);
  if (times.front() < origin) throw InputError(std::string(who) + ": times precede the origin");
}

}  // namespace

PathGrid sample_bm(RngStream& rng, std::span<const double> times, double x0, double mu) {
  check_origin(times, 0.0, "sample_bm");
  PathGrid path{{times.begin(), times.end()}, std::vector<double>(times.size())};
  brownian_into(rng, increments_from(times, 0.0), x0, mu, path.values);
  return path;
}

PathGrid sample_radial_bm(RngStream& rng, int n, double x0, double mu, double origin,
                          std::span<const double> times) {
  if (n < 1) throw ParameterError("sample_radial_bm: dimension must be >= 1");
  check_origin(times, origin, "sample_radial_bm");
  const auto dt = increments_from(times, origin);
  PathGrid path{{times.begin(), times.end()}, std::vector<double>(times.size(), 0.0)};
  std::vector<double> coord(times.size());
  for (int d = 0; d < n; ++d) {
    brownian_into(rng, dt, d == 0 ? x0 : 0.0, d == 0 ? mu : 0.0, coord);
    simd::accumulate_squares(coord, path.values);
  }
  simd::sqrt_inplace(path.values);
  return path;
}

PathGrid sample_bes(RngStream& rng, int n, double h, double mu, std::span<const double> times,
                    const BesOptions& options) {
  if (n < 1) throw ParameterError("sample_bes: dimension must be >= 1");
  if (!(h >= 0.0) || !(mu >= 0.0)) throw ParameterError("sample_bes: need h >= 0 and mu >= 0");
  if (mu == 0.0 || options.drift == BesDrift::radial) {
    return sample_radial_bm(rng, n, h, mu, 0.0, times);
  }
  check_origin(times, 0.0, "sample_bes");
  const double dt_max = options.dt_max > 0.0 ? options.dt_max : 1e-4 * times.back();
  const double k = 0.5 * (n - 1);
  PathGrid path{{times.begin(), times.end()}, std::vector<double>(times.size())};
  double x = h;
  double t = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double span = times[i] - t;
    if (span > 0.0) {
      const auto steps = static_cast<std::size_t>(std::ceil(span / dt_max));
      const double dt = span / static_cast<double>(steps);
      const double sq = std::sqrt(dt);
      for (std::size_t s = 0; s < steps; ++s) {
        // The 1/x singularity is capped at the scale of one step.
        const double drift = k / std::max(x, sq) + mu;
        x = std::abs(x + drift * dt + sq * rng.normal());
      }
    }
    t = times[i];
    path.values[i] = x;
  }
  return path;
}

namespace {

void check_bridge(const BridgeSpec& spec, const char* who) {
  if (spec.n < 1 || !(spec.t1 > spec.t0) || !(spec.h >= 0.0) || !(spec.g >= 0.0)) {
    throw ParameterError(std::string(who) + ": need n >= 1, t1 > t0, h >= 0, g >= 0");
  }
  if (spec.n != 3) throw UnsupportedError(std::string(who) + ": only n = 3 is supported");
}

void check_within(std::span<const double> times, double t0, double t1, const char* who) {
  require_increasing(times, who);
  if (times.front() < t0 || times.back() > t1) {
    throw InputError(std::string(who) + ": times outside [t0, t1]");
  }
}

}  // namespace

PathGrid sample_bessel_bridge(RngStream& rng, const BridgeSpec& spec, std::span<const double> times) {
  check_bridge(spec, "sample_bessel_bridge");
  check_within(times, spec.t0, spec.t1, "sample_bessel_bridge");

  // Free Brownian coordinates on the requested times plus t1, then pinned.
  std::vector<double> grid(times.begin(), times.end());
  if (grid.back() < spec.t1) grid.push_back(spec.t1);
  const auto dt = increments_from(grid, spec.t0);
  const double length = spec.t1 - spec.t0;
  std::vector<double> frac(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) frac[i] = (times[i] - spec.t0) / length;

  // Conditioning the norm on its endpoint leaves the endpoint direction random:
  // given |W(t1)| = g it is von Mises-Fisher around the start direction with
  // concentration h g / (t1 - t0). Only matters when both ends are off the origin.
  std::array<double, 3> end_dir{1.0, 0.0, 0.0};
  if (spec.h > 0.0 && spec.g > 0.0) {
    const double kappa = spec.h * spec.g / length;
    const double u = rng.uniform();
    const double cos_theta =
        std::max(-1.0, 1.0 + std::log1p((1.0 - u) * std::expm1(-2.0 * kappa)) / kappa);
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    end_dir = {cos_theta, sin_theta * std::cos(angle), sin_theta * std::sin(angle)};
  }

  PathGrid path{{times.begin(), times.end()}, std::vector<double>(times.size(), 0.0)};
  std::vector<double> w(grid.size());
  std::vector<double> coord(times.size());
  for (int d = 0; d < 3; ++d) {
    brownian_into(rng, dt, 0.0, 0.0, w);
    const double start = d == 0 ? spec.h : 0.0;
    const double end = spec.g * end_dir[d];
    simd::pin_bridge(std::span<const double>(w).first(times.size()), frac, w.back(), start, end,
                     coord);
    simd::accumulate_squares(coord, path.values);
  }
  simd::sqrt_inplace(path.values);
  if (times.front() == spec.t0) path.values.front() = spec.h;
  if (times.back() == spec.t1) path.values.back() = spec.g;
  return path;
}

PathGrid sample_excursion(RngStream& rng, double t0, double t1, std::span<const double> times) {
  return sample_bessel_bridge(rng, BridgeSpec{3, t0, 0.0, t1, 0.0}, times);
}

namespace {

// Positive root of a w^2 - r w - q = 0 (a, q > 0), written so that it is
// nondecreasing in r under rounding.
double implicit_step(double a, double r, double q) {
  const double root = std::sqrt(r * r + 4.0 * a * q);
  return r >= 0.0 ? (r + root) / (2.0 * a) : (2.0 * q) / (root - r);
}

// One drift-implicit Euler step of the BES(3) bridge to g over [s, s + d], with
// rest = t1 - (s + d) remaining. Solves w = r + d b(w), where
//   b(w) = (2g / rest) / expm1(2 w g / rest) - (w - g) / rest
// is the bridge drift (1/w - w / rest when g = 0). b decreases in w and does not
// decrease in g, so the solution is monotone in both the previous value and g.
double bridge_step(double r, double d, double rest, double g) {
  const double c = d / rest;
  const double hi = implicit_step(1.0 + c, r + g * c, d);
  if (g == 0.0) return hi;
  const double scale = 2.0 * g / rest;
  auto residual = [&](double w) { return w * (1.0 + c) - r - c * g - d * scale / std::expm1(scale * w); };
  auto slope = [&](double w) {
    const double u = scale * w;
    return 1.0 + c + d * scale * scale / (std::expm1(u) * -std::expm1(-u));
  };
  // b(w) <= 1/w - (w - g)/rest puts the root below hi; b(w) >= -(w - g)/rest above lo.
  // The residual is concave, so Newton from hi lands left of the root and then
  // climbs monotonically; the bracket only guards the first step.
  double lo = std::max(0.0, (r + c * g) / (1.0 + c));
  double w = hi;
  for (int it = 0; it < 60; ++it) {
    const double f = residual(w);
    if (f <= 0.0) lo = std::max(lo, w);
    double next = w - f / slope(w);
    if (!(next > lo)) next = 0.5 * (lo + w);
    if (std::abs(next - w) <= 4e-16 * next) return next;
    w = next;
  }
  return w;
}

}  // namespace

std::pair<PathGrid, PathGrid> sample_coupled_bridges(RngStream& rng, const BridgeSpec& lower,
                                                     const BridgeSpec& upper,
                                                     std::span<const double> times,
                                                     const CouplingOptions& options) {
  check_bridge(lower, "sample_coupled_bridges");
  check_bridge(upper, "sample_coupled_bridges");
  if (lower.t0 != upper.t0 || lower.t1 != upper.t1) {
    throw ParameterError("sample_coupled_bridges: bridges must share [t0, t1]");
  }
  if (lower.h > upper.h || lower.g > upper.g) {
    throw ParameterError("sample_coupled_bridges: need h1 <= h2 and g1 <= g2");
  }
  check_within(times, lower.t0, lower.t1, "sample_coupled_bridges");

  const double t0 = lower.t0;
  const double t1 = lower.t1;
  const double max_step = options.max_step > 0.0 ? options.max_step : (t1 - t0) * 1e-3;

  PathGrid w1{{times.begin(), times.end()}, std::vector<double>(times.size())};
  PathGrid w2 = w1;
  double x1 = lower.h;
  double x2 = upper.h;
  double s = t0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double span = times[i] - s;
    if (span > 0.0) {
      const auto steps = static_cast<std::size_t>(std::ceil(span / max_step));
      for (std::size_t j = 1; j <= steps; ++j) {
        const double next = j == steps ? times[i] : s + span * static_cast<double>(j) / steps;
        const double prev = j == 1 ? s : s + span * static_cast<double>(j - 1) / steps;
        const double d = next - prev;
        const double db = std::sqrt(d) * rng.normal();
        if (next >= t1) {
          x1 = lower.g;
          x2 = upper.g;
          continue;
        }
        x1 = bridge_step(x1 + db, d, t1 - next, lower.g);
        x2 = bridge_step(x2 + db, d, t1 - next, upper.g);
      }
    }
    s = times[i];
    w1.values[i] = x1;
    w2.values[i] = x2;
  }
  return {std::move(w1), std::move(w2)};
}

PathGrid sample_hit_then_bes3(RngStream& rng, double start, double floor, double tau,
                              std::span<const double> times) {
  if (!(start >= floor) || !(tau >= 0.0) || (start > floor && tau == 0.0)) {
    throw ParameterError("sample_hit_then_bes3: need start >= floor, tau > 0 unless start == floor");
  }
  check_origin(times, 0.0, "sample_hit_then_bes3");
  const auto split = static_cast<std::size_t>(
      std::upper_bound(times.begin(), times.end(), tau) - times.begin());
  PathGrid path{{times.begin(), times.end()}, std::vector<double>(times.size())};
  if (split > 0 && tau > 0.0) {
    const auto pre = sample_bessel_bridge(rng, BridgeSpec{3, 0.0, start - floor, tau, 0.0},
                                          times.first(split));
    std::copy(pre.values.begin(), pre.values.end(), path.values.begin());
  }
  if (split < times.size()) {
    const auto post = sample_radial_bm(rng, 3, 0.0, 0.0, tau, times.subspan(split));
    std::copy(post.values.begin(), post.values.end(), path.values.begin() + split);
  }
  for (double& v : path.values) v += floor;
  return path;
}

PathGrid williams_sample_given_minimum(RngStream& rng, double h, double minimum,
                                       std::span<const double> times) {
  if (!(h > 0.0)) throw ParameterError("williams_sample: h must be > 0");
  if (!(minimum >= 0.0) || minimum > h) throw ParameterError("williams_sample: need 0 <= J <= h");
  const double drop = h - minimum;
  const double tau = drop > 0.0 ? sample_ig(rng, IGParams{0.0, drop}) : 0.0;
  return sample_hit_then_bes3(rng, h, minimum, tau, times);
}

PathGrid williams_sample(RngStream& rng, double h, std::span<const double> times) {
  if (!(h > 0.0)) throw ParameterError("williams_sample: h must be > 0");
  const double minimum = h * rng.uniform();
  return williams_sample_given_minimum(rng, h, minimum, times);
}

}  // namespace majorant
