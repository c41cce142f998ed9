#include "majorant/zprocess.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "majorant/bessel.hpp"
#include "majorant/errors.hpp"
#include "majorant/quadrature.hpp"

namespace majorant {

ZVariant parse_z_variant(std::string_view name) {
  if (name == "limit") return ZVariant::limit;
  if (name == "path-decomposition") return ZVariant::path_decomposition;
  if (name == "mixture") return ZVariant::mixture;
  throw ParameterError("unknown Z variant '" + std::string(name) + "'");
}

std::string_view z_variant_name(ZVariant v) {
  switch (v) {
    case ZVariant::limit: return "limit";
    case ZVariant::path_decomposition: return "path-decomposition";
    case ZVariant::mixture: return "mixture";
  }
  return "?";
}

MixingDensity::MixingDensity(double z, std::function<double(double)> density)
    : z_(z), density_(std::move(density)), bound_(0.0) {
  if (!(z > 0.0)) throw ParameterError("mixing density: z must be > 0");
  if (!density_) throw ParameterError("mixing density: empty function");
  constexpr int grid = 2000;
  for (int i = 0; i <= grid; ++i) {
    const double v = density_(z * i / grid);
    if (!std::isfinite(v) || v < 0.0) {
      throw ParameterError("mixing density: negative or non-finite value on [0, z]");
    }
    bound_ = std::max(bound_, v);
  }
  bound_ *= 1.05;
  QuadOptions opts;
  opts.throw_on_failure = false;
  const double mass = integrate(density_, 0.0, z, opts).value;
  if (!(std::abs(mass - 1.0) <= 1e-8)) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "mixing density integrates to " << mass << " over [0, " << z << "], not 1";
    throw ParameterError(msg.str());
  }
}

MixingDensity MixingDensity::uniform(double z) {
  return MixingDensity(z, [z](double) { return 1.0 / z; });
}

MixingDensity MixingDensity::z_infimum(double z) {
  return MixingDensity(z, [z](double x) {
    const double u = x / z;
    return (6.0 * u * u - 4.0 * u * u * u) / z;
  });
}

double MixingDensity::sample(RngStream& rng) const {
  for (;;) {
    const double x = z_ * rng.uniform();
    const double f = density_(x);
    if (f > bound_) {
      std::ostringstream msg;
      msg << "mixing density value " << f << " at " << x << " exceeds the envelope " << bound_;
      throw NumericError(msg.str());
    }
    if (rng.uniform() * bound_ < f) return x;
  }
}

namespace {

double polynomial_quantile(RngStream& rng, const std::function<double(double)>& cdf,
                           const std::function<double(double)>& pdf) {
  return invert_cdf(cdf, pdf, rng.uniform(), 0.0, 1.0);
}

void check_z_times(std::span<const double> times) {
  require_increasing(times, "sample_z");
  if (times.front() != 0.0) throw InputError("sample_z: times must start at 0");
}

ZPath hitting_branch(RngStream& rng, double z, double level, std::span<const double> times) {
  ZPath out;
  out.floor = level;
  out.minimum = level;
  out.tau = level < z ? sample_ig(rng, IGParams{0.0, z - level}) : 0.0;
  out.path = sample_hit_then_bes3(rng, z, level, out.tau, times);
  return out;
}

// shift + BES_h(3) by the direct 3-d norm.
ZPath shifted_bes(RngStream& rng, double shift, double h, std::span<const double> times) {
  ZPath out;
  out.floor = shift;
  out.tau = 0.0;
  out.path = sample_radial_bm(rng, 3, h, 0.0, 0.0, times);
  for (double& v : out.path.values) v += shift;
  return out;
}

}  // namespace

double sample_z_minimum(RngStream& rng, double z) {
  return z * polynomial_quantile(
                 rng, [](double u) { return u * u * u * (2.0 - u); },
                 [](double u) { return u * u * (6.0 - 4.0 * u); });
}

double sample_limit_level(RngStream& rng, double z) {
  return z * polynomial_quantile(
                 rng, [](double u) { return u * u * (3.0 - 2.0 * u); },
                 [](double u) { return 6.0 * u * (1.0 - u); });
}

double sample_mixture_level(RngStream& rng, double z) {
  return z * polynomial_quantile(
                 rng, [](double u) { return u * u * u * (4.0 - 3.0 * u); },
                 [](double u) { return 12.0 * u * u * (1.0 - u); });
}

ZPath sample_general_mixture(RngStream& rng, double z, const MixingDensity& gamma,
                             std::span<const double> times) {
  if (!(z > 0.0)) throw ParameterError("sample_general_mixture: z must be > 0");
  if (gamma.z() != z) throw ParameterError("sample_general_mixture: density is for another z");
  check_z_times(times);
  return hitting_branch(rng, z, gamma.sample(rng), times);
}

ZPath sample_z(RngStream& rng, const ZSpec& spec, std::span<const double> times) {
  if (!(spec.z > 0.0)) throw ParameterError("sample_z: z must be > 0");
  if (spec.gamma) return sample_general_mixture(rng, spec.z, *spec.gamma, times);
  check_z_times(times);
  const double z = spec.z;
  switch (spec.variant) {
    case ZVariant::limit: {
      const double level = sample_limit_level(rng, z);
      const double p = rng.uniform() * level / z;
      if (rng.uniform() < p) return hitting_branch(rng, z, level, times);
      return shifted_bes(rng, level, z - level, times);
    }
    case ZVariant::path_decomposition:
      return hitting_branch(rng, z, sample_z_minimum(rng, z), times);
    case ZVariant::mixture: {
      const double h = sample_mixture_level(rng, z);
      return shifted_bes(rng, z - h, h, times);
    }
  }
  throw ParameterError("sample_z: invalid variant");
}

namespace {

// Minimum of a positive Brownian bridge (a 3-d Bessel bridge) from a to b over
// time h: P(min > m) = (1 - exp(-2(a-m)(b-m)/h)) / (1 - exp(-2ab/h)), inverted.
double positive_bridge_minimum(RngStream& rng, double a, double b, double h) {
  if (!(a > 0.0) || !(b > 0.0)) return std::max(0.0, std::min(a, b));
  const double mass = -std::expm1(-2.0 * a * b / h);
  const double c = -0.5 * h * std::log1p(-rng.uniform() * mass);
  const double m = 0.5 * ((a + b) - std::sqrt((a - b) * (a - b) + 4.0 * c));
  return std::clamp(m, 0.0, std::min(a, b));
}

}  // namespace

PathGrid future_infimum(const ZPath& zp, RngStream& rng) {
  const auto& p = zp.path;
  if (p.empty()) throw InputError("future_infimum: empty path");
  const double t_end = p.times.back();
  const double z_end = p.values.back();
  double running = t_end >= zp.tau ? zp.floor + rng.uniform() * (z_end - zp.floor) : zp.floor;
  PathGrid j{p.times, std::vector<double>(p.size())};
  for (std::size_t i = p.size(); i-- > 0;) {
    running = std::min(running, p.values[i]);
    if (i + 1 < p.size()) {
      const double dip = positive_bridge_minimum(rng, p.values[i] - zp.floor, p.values[i + 1] - zp.floor,
                                                 p.times[i + 1] - p.times[i]);
      running = std::min(running, zp.floor + dip);
    }
    // Up to the hitting time the future minimum is the floor itself.
    j.values[i] = zp.tau > 0.0 && p.times[i] <= zp.tau ? zp.floor : running;
  }
  return j;
}

PathGrid reflect_at_future_infimum(const ZPath& zp, const PathGrid& J) {
  const auto& p = zp.path;
  if (p.empty() || J.times != p.times || J.values.size() != p.values.size()) {
    throw InputError("reflect_at_future_infimum: J must share the grid of Z");
  }
  const double z = p.values.front();
  const double j0 = J.values.front();
  PathGrid b{p.times, std::vector<double>(p.size())};
  for (std::size_t i = 0; i < p.size(); ++i) {
    b.values[i] = (2.0 * J.values[i] - 2.0 * j0 + z) - p.values[i];
  }
  return b;
}

}  // namespace majorant
