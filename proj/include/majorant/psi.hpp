#pragma once

// The Markov lift Psi(t) = (K'(t), K(t), K(t) - B(t), D(t) - t) of X = 2K - B.

#include "majorant/bessel.hpp"
#include "majorant/rngdist.hpp"

namespace majorant {

struct PsiState {
  double a = 0.0;  // slope K'(t)
  double k = 0.0;  // level K(t)
  double y = 0.0;  // gap K(t) - B(t)
  double w = 0.0;  // time to the next vertex D(t) - t

  double x() const { return k + y; }
};

/// Psi(t) conditional on X(t) = z: y with density 6y(z-y)/z^3, k = z - y,
/// a ~ Unif(0, k/t), and w from the mixture (at/z) f_{a,y} + (1 - at/z) f*_{a,y}.
PsiState sample_psi_given_x(RngStream& rng, double t, double z);

/// How evolve_psi continues past the next vertex D.
enum class PsiRoute {
  /// Sample R = BES(3, a) from 0 on a grid and read the state off its convex
  /// minorant C: (a - C'(s), k + a t - C(s), R(s) - C(s), D^R(s) - s) at s = t - w.
  /// The grid step is grid_dt up to s and grid_dt u / s at u beyond.
  hull,
  /// Continue the slope chain past D (next slope Unif(0, a), lengths N^2 / alpha^2,
  /// excursions in between). Exact and cheap; the same law as the hull route
  /// with BesDrift::radial in the limit of a fine grid.
  chain,
};

struct EvolveOptions {
  PsiRoute route = PsiRoute::hull;
  BesDrift drift = BesDrift::radial;
  /// Horizon doublings allowed before the straddling hull segment must settle.
  int max_doublings = 40;
  std::size_t max_segments = 1'000'000;
};

PsiState evolve_psi(RngStream& rng, const PsiState& state, double t, double grid_dt,
                    const EvolveOptions& options = {});

}  // namespace majorant
