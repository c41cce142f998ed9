#pragma once

// Seedable random streams, elementary samplers and the Gaussian special
// functions every other module builds on.

#include <array>
#include <cstdint>
#include <functional>
#include <limits>

namespace majorant {

/// Philox4x32-10 counter-based block function (Salmon et al., Random123).
/// Maps a 128-bit counter and a 64-bit key to 128 random bits.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter block(Counter ctr, Key key);
};

/// Deterministic stream of random draws.
///
/// The key is the seed and the upper half of the counter is the stream id, so
/// distinct stream ids walk disjoint counter ranges of the same bijection: no
/// two (seed, stream_id) pairs ever share a block. Each stream has 2^64 blocks.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  std::uint64_t operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal (Box-Muller, pairs cached).
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  /// Number of 64-bit words drawn so far.
  std::uint64_t words_consumed() const { return consumed_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
  std::uint64_t consumed_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Gaussian special functions

struct GaussEval {
  double phi;   // standard normal density
  double cdf;   // (1 + erf(x / sqrt 2)) / 2
};

GaussEval eval_gauss(double x);
double normal_pdf(double x);
double normal_cdf(double x);

/// CDF of the chi distribution with 3 or 5 degrees of freedom (closed forms).
double chi3_cdf(double s);
double chi5_cdf(double s);

/// Solve F(x) = target on [lo, hi] for a nondecreasing F with derivative f.
/// Newton steps, falling back to bisection whenever a step leaves the bracket.
double invert_cdf(const std::function<double(double)>& cdf, const std::function<double(double)>& pdf,
                  double target, double lo, double hi, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Inverse Gaussian family

/// Drift mu >= 0 and level h > 0 of the first passage T_{mu,h} of B(t) + mu t.
struct IGParams {
  double mu;
  double h;
};

struct IGDensities {
  double f;       // first passage density f_{mu,h}
  double f_star;  // size-biased density (mu/h) t f_{mu,h}(t), last passage time
};

IGDensities eval_ig_densities(IGParams p, double t);

/// Gamma(1/2, rate alpha^2 / 2), drawn as N^2 / alpha^2.
double sample_gamma_half(RngStream& rng, double alpha);
/// The transform used by sample_gamma_half, exposed for exact tests.
inline double gamma_half_from_normal(double normal, double alpha) {
  return normal * normal / (alpha * alpha);
}

/// First passage time T_{mu,h}. mu = 0 gives the one-sided stable law h^2 / N^2;
/// mu > 0 uses the Michael-Schucany-Haas transform (one normal, one uniform).
double sample_ig(RngStream& rng, IGParams p);

/// Last passage time G_{mu,h} with density f*_{mu,h}. Drawn as T_{mu,h} + N^2 / mu^2:
/// after the first passage the remaining time is the last exit from 0 of B + mu t.
double sample_sbig(RngStream& rng, IGParams p);

/// sqrt of a sum of n squared normals.
double sample_chi(RngStream& rng, int n);

}  // namespace majorant
