#include "majorant/rngdist.hpp"

#include <cmath>
#include <numbers>

#include "majorant/errors.hpp"

namespace majorant {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {}

void RngStream::refill() {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_),
                                static_cast<std::uint32_t>(block_ >> 32),
                                static_cast<std::uint32_t>(stream_id_),
                                static_cast<std::uint32_t>(stream_id_ >> 32)};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed_),
                            static_cast<std::uint32_t>(seed_ >> 32)};
  const auto out = Philox4x32::block(ctr, key);
  buffer_[0] = static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32);
  buffer_[1] = static_cast<std::uint64_t>(out[2]) | (static_cast<std::uint64_t>(out[3]) << 32);
  available_ = 2;
  ++block_;
}

std::uint64_t RngStream::next_u64() {
  if (available_ == 0) refill();
  ++consumed_;
  return buffer_[2 - available_--];
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

GaussEval eval_gauss(double x) { return {normal_pdf(x), normal_cdf(x)}; }

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) {
  // erfc keeps full relative accuracy in the lower tail.
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double chi3_cdf(double s) {
  if (s <= 0.0) return 0.0;
  return std::erf(s / std::numbers::sqrt2) - 2.0 * s * normal_pdf(s);
}

double chi5_cdf(double s) {
  if (s <= 0.0) return 0.0;
  return chi3_cdf(s) - 2.0 * s * s * s / 3.0 * normal_pdf(s);
}

double invert_cdf(const std::function<double(double)>& cdf, const std::function<double(double)>& pdf,
                  double target, double lo, double hi, double tol) {
  if (!(lo < hi)) throw ParameterError("invert_cdf: empty bracket");
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = cdf(x) - target;
    if (fx > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    if (hi - lo <= tol * (1.0 + std::abs(x))) break;
    const double d = pdf(x);
    double next = d > 0.0 ? x - fx / d : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= tol * (1.0 + std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

IGDensities eval_ig_densities(IGParams p, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) return {0.0, 0.0};
  const double r = p.h - p.mu * t;
  const double f = p.h / std::sqrt(2.0 * std::numbers::pi * t * t * t) * std::exp(-r * r / (2.0 * t));
  if (!(f > 0.0)) return {0.0, 0.0};
  return {f, p.mu / p.h * t * f};
}

double sample_gamma_half(RngStream& rng, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("sample_gamma_half: alpha must be positive");
  return gamma_half_from_normal(rng.normal(), alpha);
}

double sample_ig(RngStream& rng, IGParams p) {
  if (!(p.h > 0.0) || !(p.mu >= 0.0)) {
    throw ParameterError("sample_ig: requires h > 0 and mu >= 0");
  }
  const double n = rng.normal();
  if (p.mu == 0.0) return p.h * p.h / (n * n);
  const double mean = p.h / p.mu;
  const double shape = p.h * p.h;
  const double y = n * n;
  const double my = mean * y;
  if (my == 0.0) return mean;
  // Smaller root of the MSH quadratic, rearranged to avoid cancellation for large y.
  const double s = std::sqrt(4.0 * shape * my + my * my) + my;
  const double x = mean * (4.0 * shape * my) / (s * s);
  const double u = rng.uniform();
  return u <= mean / (mean + x) ? x : mean * mean / x;
}

double sample_sbig(RngStream& rng, IGParams p) {
  if (!(p.mu > 0.0) || !(p.h > 0.0)) {
    throw ParameterError("sample_sbig: requires mu > 0 and h > 0");
  }
  const double first = sample_ig(rng, p);
  const double n = rng.normal();
  return first + n * n / (p.mu * p.mu);
}

double sample_chi(RngStream& rng, int n) {
  if (n < 1) throw ParameterError("sample_chi: dimension must be >= 1");
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.normal();
    s += g * g;
  }
  return std::sqrt(s);
}

}  // namespace majorant
