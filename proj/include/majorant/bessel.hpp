#pragma once

// Path samplers for Brownian motion, Bessel processes, Bessel bridges and
// excursions, the Williams decomposition, the monotone bridge coupling, and
// convex minorants of sampled paths.
//
// Time convention: unbridged processes start at time 0; requested times must
// be >= 0 and strictly increasing. Radial samplers return values >= 0.

#include <span>
#include <utility>
#include <vector>

#include "majorant/path.hpp"
#include "majorant/rngdist.hpp"

namespace majorant {

/// How sample_bes realizes a positive drift mu.
enum class BesDrift {
  /// Euler-Maruyama on the generator ((n-1)/(2x) + mu) d/dx + 1/2 d^2/dx^2,
  /// reflected with |.| each step; weak order one in the step size.
  generator_euler,
  /// Exact: the norm of an n-dimensional Brownian motion with drift mu e_1.
  /// Its drift is (n-1)/(2x) + mu I_{n/2}(mu x) / I_{n/2-1}(mu x), which for n = 3
  /// is mu coth(mu x): Brownian motion with drift mu conditioned to stay positive.
  radial,
};

struct BesOptions {
  BesDrift drift = BesDrift::generator_euler;
  double dt_max = 0.0;  // Euler step bound; 0 selects 1e-4 * (last requested time)
};

PathGrid sample_bm(RngStream& rng, std::span<const double> times, double x0, double mu);

/// BES_h(n, mu). For mu = 0 the sample is exact regardless of options.drift.
PathGrid sample_bes(RngStream& rng, int n, double h, double mu, std::span<const double> times,
                    const BesOptions& options = {});

/// Norm of an n-dimensional Brownian motion started at (x0, 0, ..., 0) at time
/// `origin`, with drift mu along the first axis. Exact at every requested time >= origin.
PathGrid sample_radial_bm(RngStream& rng, int n, double x0, double mu, double origin,
                          std::span<const double> times);

/// n-dimensional Bessel bridge from (t0, h) to (t1, g).
struct BridgeSpec {
  int n = 3;
  double t0 = 0.0;
  double h = 0.0;
  double t1 = 1.0;
  double g = 0.0;
};

/// Exact: the norm of a 3-d Brownian bridge from (h, 0, 0) to g u, where the unit
/// vector u is drawn from the law of the endpoint direction given the endpoint norm.
/// Times must lie in [t0, t1]; values at t0 and t1 are exactly h and g.
PathGrid sample_bessel_bridge(RngStream& rng, const BridgeSpec& spec, std::span<const double> times);

/// Brownian excursion on [t0, t1]: the Bessel bridge with h = g = 0.
PathGrid sample_excursion(RngStream& rng, double t0, double t1, std::span<const double> times);

struct CouplingOptions {
  double max_step = 0.0;  // internal step bound; 0 selects (t1 - t0) * 1e-3
};

/// Two Bessel bridges driven by the same Brownian motion. Each step solves the
/// drift-implicit Euler equation of the 3-d bridge SDE
///   dW = dB + ((2g/r) / expm1(2 W g / r) - (W - g)/r) dt,   r = t1 - t,
/// (the h-transform of BES(3) by its transition density to g; 1/W - W/r for
/// g = 0) whose update is increasing in both the previous value and g, so
/// lower <= upper holds at every grid time for h1 <= h2 and g1 <= g2.
std::pair<PathGrid, PathGrid> sample_coupled_bridges(RngStream& rng, const BridgeSpec& lower,
                                                     const BridgeSpec& upper,
                                                     std::span<const double> times,
                                                     const CouplingOptions& options = {});

/// floor + (3-d Bessel bridge from start - floor down to 0 over [0, tau]),
/// followed by floor + BES(3) from 0 after tau. This is start + B run until B
/// first hits floor - start at time tau, conditioned on that hitting time.
PathGrid sample_hit_then_bes3(RngStream& rng, double start, double floor, double tau,
                              std::span<const double> times);

/// BES_h(3) by the Williams decomposition at its global minimum J ~ Unif(0, h).
PathGrid williams_sample(RngStream& rng, double h, std::span<const double> times);
/// Same with the minimum supplied; minimum == h gives hitting time 0.
PathGrid williams_sample_given_minimum(RngStream& rng, double h, double minimum,
                                       std::span<const double> times);

/// Continuous piecewise linear function through (breakpoints[i], values[i]).
struct PiecewiseLinear {
  std::vector<double> breakpoints;
  std::vector<double> values;

  std::size_t segments() const { return breakpoints.empty() ? 0 : breakpoints.size() - 1; }
  double slope(std::size_t segment) const;
  /// Index i of the segment [b_i, b_{i+1}) containing t; the last segment is closed.
  std::size_t segment_index(double t) const;
  double operator()(double t) const;
  /// Right derivative (slope of the segment containing t).
  double derivative(double t) const;
};

/// Greatest convex function below the linear interpolation of the path: the
/// lower convex hull of the points (time, value). Collinear points are dropped,
/// so returned slopes are strictly increasing.
PiecewiseLinear convex_minorant(std::span<const double> times, std::span<const double> values);
inline PiecewiseLinear convex_minorant(const PathGrid& path) {
  return convex_minorant(path.times, path.values);
}

/// Smallest breakpoint strictly greater than t. Throws HorizonError when t is
/// outside the hull or not before its last breakpoint.
double first_vertex_after(const PiecewiseLinear& hull, double t);

}  // namespace majorant
