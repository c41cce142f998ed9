#pragma once

// Statistical experiments behind the acceptance criteria. Replicate i of arm j
// draws from RngStream(seed, stream_id(j, i)), so every result is a function of
// the seed alone, whatever the thread count.

#include <algorithm>
#include <array>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string_view>
#include <thread>
#include <vector>

#include "majorant/psi.hpp"
#include "majorant/rngdist.hpp"
#include "majorant/stats.hpp"
#include "majorant/zprocess.hpp"

namespace majorant {

struct RunOptions {
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
};

constexpr std::uint64_t stream_id(std::uint64_t arm, std::uint64_t replicate) {
  return (arm << 40) | replicate;
}

unsigned resolve_threads(unsigned requested);

/// out[i] = f(rng_i, i) for i < n, with rng_i = RngStream(seed, stream_id(arm, first + i)).
/// Rethrows the first exception after all workers stop.
template <class T, class F>
std::vector<T> replicate(const RunOptions& run, std::uint64_t arm, std::size_t n, F&& f,
                         std::size_t first = 0) {
  std::vector<T> out(n);
  const unsigned workers = std::min<std::size_t>(resolve_threads(run.threads), std::max<std::size_t>(n, 1));
  std::exception_ptr failure;
  std::mutex guard;
  auto work = [&](unsigned w) {
    try {
      for (std::size_t i = w; i < n; i += workers) {
        RngStream rng(run.seed, stream_id(arm, first + i));
        out[i] = f(rng, i);
      }
    } catch (...) {
      std::lock_guard lock(guard);
      if (!failure) failure = std::current_exception();
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// X(1) from n majorant chains against the Chi(5) CDF.
TestReport x1_chi5(const RunOptions& run, std::size_t n);

/// The six projection weights (1, 0.1), (1, 0.5), (1, 1), (1, 2), (1, 5), (1, 10).
std::vector<std::array<double, 2>> default_lambdas();

/// n pairs (X(1), X(2)) from majorant chains and n pairs (Y(1), Y(2)) of a
/// 5-d Brownian norm; one two-sample KS per lambda on l0 (.)(1) + l1 (.)(2).
std::vector<TestReport> projection_study(const RunOptions& run, std::size_t n,
                                         std::span<const std::array<double, 2>> lambdas);

enum class DriftProcess { X, bes5 };

struct DriftExperimentSpec {
  double epsilon = 0.1;
  double s = 1e-3;               // finite-difference step
  std::size_t n_accept = 10000;
  std::size_t max_draws = 0;     // 0: 2000 n_accept
  PsiRoute route = PsiRoute::chain;
  double grid_dt = 1e-3;         // hull route only
};

struct DriftArm {
  double mean = 0.0;     // plug-in conditional drift at time 2
  double se = 0.0;
  double fd_mean = 0.0;  // (X(2 + s) - X(2)) / s
  double fd_se = 0.0;
  std::size_t accepted = 0;
  std::size_t draws = 0;
};

/// Start from X(1) ~ Chi(5) restricted to (0, eps), accept X(2) in [1, 1 + eps].
/// The plug-in drift is a + 1/y - y/w from Psi(2) for X and 2 / Y(2) for BES(5).
/// ResourceError when max_draws pass with fewer than n_accept acceptances.
DriftArm conditional_drift(const RunOptions& run, const DriftExperimentSpec& spec, DriftProcess process);

/// Both arms; statistic (X - BES5) / combined se. Passes when the gap is below
/// -0.3 and the statistic below -6.
TestReport drift_experiment(const RunOptions& run, const DriftExperimentSpec& spec);

/// exp(-((x - center) / scale)^2), or the constant 1.
struct TestFunction {
  double center = 1.0;
  double scale = 1.0;
  bool constant = false;

  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;
};

struct GeneratorSpec {
  double z = 1.0;
  /// The Z mixing density (6x^2/z^3 - 4x^3/z^4) when unset.
  std::optional<MixingDensity> gamma;
  TestFunction phi;
  std::vector<double> t_list{0.01, 0.005, 0.0025};
  std::size_t replicates = 1'000'000;
};

struct Extrapolation {
  double limit = 0.0;
  double se = 0.0;
  std::vector<double> weights;  // limit = sum weights[i] f[i]
};

/// Least-squares fit of f(t) = L + sum_k c_k t^p_k, using as many exponents as
/// the points allow (at most exponents.size(), at most t.size() - 1).
Extrapolation extrapolate(std::span<const double> t, std::span<const double> f,
                          std::span<const double> se, std::span<const double> exponents);

/// t^-1 E[phi(Z(t)) - phi(z)] per t, extrapolated to t -> 0 with exponents
/// {1, 1.5}, against phi''(z)/2 + gamma(z) phi'(z). Passes within 3 se.
TestReport generator_experiment(const RunOptions& run, const GeneratorSpec& spec);

struct ReflectionSpec {
  double z = 1.0;
  double horizon = 1.0;
  double dt = 2e-5;
};

/// One path of B~ = 2J - 2J(0) + z - Z on [0, horizon]. Passes when QV / horizon is in [0.98, 1.02], increments
/// pass KS against N(0, dt), and |B~(horizon)| < 3 sqrt(horizon).
TestReport reflection_check(RngStream& rng, const ReflectionSpec& spec);

/// reflection_check over `seeds` streams; passes when at least 95% pass.
TestReport reflection_battery(const RunOptions& run, const ReflectionSpec& spec, std::size_t seeds);

enum class CompensatorForm {
  B,        // B~ = B - int (K' - 1/(K - B) + (K - B)/(D - s))
  X,        // B~ = -(X - int (K' + 1/(K - B) - (K - B)/(D - s)))
  flipped,  // B form with the two singular terms' signs exchanged
  none,     // B~ = B, the negative control
};

CompensatorForm parse_compensator_form(std::string_view name);
std::string_view compensator_form_name(CompensatorForm form);

struct SemimartingaleSpec {
  double start = 0.1;
  double horizon = 1.0;  // window [start, start + horizon]
  double dt = 1e-5;
  double eta = 1e-3;     // half-width excluded around each vertex
  std::size_t paths = 100;
  CompensatorForm form = CompensatorForm::B;
};

/// Residual B~ on grid steps at least eta away from every vertex. Checks QV
/// within 3% of the kept time per path, KS of pooled standardized increments,
/// and the orthogonality statistic sum c dB~ / sqrt(sum c^2 dt) (c the
/// compensator density) over all paths, |.| < 3.
TestReport semimartingale_residual_check(const RunOptions& run, const SemimartingaleSpec& spec);

/// Global infimum of n paths of Z: KS against 2u^3 - u^4 (must pass) and
/// against the BES_z(5) law u^3 (must reject with p < 1e-6).
std::vector<TestReport> infimum_experiment(const RunOptions& run, double z, std::size_t n);

/// Pairwise two-sample KS of the three constructions at each time.
std::vector<TestReport> z_equivalence(const RunOptions& run, double z, std::size_t n,
                                      std::span<const double> times);

/// Closed form against quadrature for the multi-point density of Z at random
/// queries with m = 1, 2, 3 points cycling. Statistic: worst relative difference;
/// passes at or below 1e-8.
TestReport multipoint_agreement(const RunOptions& run, std::size_t queries);

/// Coupled 3-d Bessel bridges with random ordered endpoints (h1 <= h2, g1 <= g2)
/// on a 1e-3 grid over [0, 1]. Statistic: number of trials with lower > upper + 1e-9
/// anywhere; passes at 0.
TestReport coupling_check(const RunOptions& run, std::size_t trials);

/// Mass of the five-variable density on a product double-exponential rule with
/// the given step (abscissae exp(pi/2 sinh u), |u| <= 3.5). Passes within 1e-3 of 1.
TestReport f5_normalization(double step);

/// max over x in [0, 6] (step 1e-3) of |density of Z(t) at x - BES(5) kernel z -> x|.
/// Passes above floor.
TestReport onepoint_gap(double z, double t, double floor);

}  // namespace majorant
