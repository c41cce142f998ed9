#pragma once

// The flat degeneration Z at level z: three constructions of the same law,
// general mixtures of shifted BES(3) processes, and the future infimum.

#include <functional>
#include <optional>
#include <span>
#include <string_view>

#include "majorant/path.hpp"
#include "majorant/rngdist.hpp"

namespace majorant {

enum class ZVariant {
  /// K~ with density 6k(z-k)/z^3, P = Unif(0, K~)/z; with probability 1 - P
  /// K~ + BES_{z-K~}(3), otherwise z + B until it hits K~, then BES(3).
  limit,
  /// J with density 6x^2/z^3 - 4x^3/z^4; z + B until it hits J, then J + BES(3).
  path_decomposition,
  /// h with density 12h^2(z-h)/z^4; z - h + BES_h(3).
  mixture,
};

ZVariant parse_z_variant(std::string_view name);
std::string_view z_variant_name(ZVariant v);

/// Density of the minimum J on [0, z] for the generalized process. Checked at
/// construction: it must integrate to 1 within 1e-8 and be finite on a grid.
class MixingDensity {
 public:
  MixingDensity(double z, std::function<double(double)> density);

  /// Unif(0, z): the generalized process is then BES_z(3).
  static MixingDensity uniform(double z);
  /// 6x^2/z^3 - 4x^3/z^4: the generalized process is then Z.
  static MixingDensity z_infimum(double z);

  double z() const { return z_; }
  double operator()(double x) const { return density_(x); }
  /// Rejection envelope: 1.05 times the largest density value on a 2001-point grid.
  double bound() const { return bound_; }
  /// Uniform-proposal rejection. Throws NumericError if the density ever exceeds the envelope.
  double sample(RngStream& rng) const;

 private:
  double z_;
  std::function<double(double)> density_;
  double bound_;
};

struct ZSpec {
  double z = 1.0;
  ZVariant variant = ZVariant::path_decomposition;
  /// When set, sample_z draws the generalized process with this minimum density.
  std::optional<MixingDensity> gamma;
};

/// A sampled path of Z with enough structure to continue it past the last time:
/// from time tau on, Z - floor is a BES(3) process (from 0 when tau > 0).
/// Before tau (only when tau > 0) the path stays above floor, which is then the
/// global minimum.
struct ZPath {
  PathGrid path;
  double floor = 0.0;
  double tau = 0.0;
  /// Global infimum, when the construction draws it explicitly.
  std::optional<double> minimum;
};

/// times must start at 0 (Z(0) = z exactly).
ZPath sample_z(RngStream& rng, const ZSpec& spec, std::span<const double> times);

/// J ~ gamma, z + B until the first hit of J (exact hitting time), then J + BES(3).
ZPath sample_general_mixture(RngStream& rng, double z, const MixingDensity& gamma,
                             std::span<const double> times);

/// Inverse-CDF draws of the three polynomial laws used above, in units of z.
double sample_z_minimum(RngStream& rng, double z);      // CDF 2u^3 - u^4
double sample_limit_level(RngStream& rng, double z);    // CDF 3u^2 - 2u^3
double sample_mixture_level(RngStream& rng, double z);  // CDF 4u^3 - 3u^4

/// J(t) = inf of Z over [t, inf) at every grid time. Z - floor is a 3-d Bessel
/// process or bridge in every construction, so the minimum over each grid
/// interval is drawn exactly from the positive Brownian bridge law given the
/// endpoints; after T_end the infimum is floor + U (Z(T_end) - floor) when
/// T_end >= tau, and floor otherwise. J(t) = floor exactly for t <= tau when tau > 0.
PathGrid future_infimum(const ZPath& zp, RngStream& rng);

/// B~(t) = 2J(t) - 2J(0) + z - Z(t); requires J on the same grid as Z.
PathGrid reflect_at_future_infimum(const ZPath& zp, const PathGrid& J);

}  // namespace majorant
