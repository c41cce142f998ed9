#include <cmath>

#include "majorant/simd.hpp"

namespace majorant::simd::detail {
namespace {

void gaussian_steps(const double* dt, const double* normal, double drift, double* out,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = drift * dt[i];
    const double b = std::sqrt(dt[i]) * normal[i];
    out[i] = a + b;
  }
}

void pin_bridge(const double* w, const double* frac, double w_end, double start, double end,
                double* out, std::size_t n) {
  const double span = end - start;
  for (std::size_t i = 0; i < n; ++i) {
    const double line = start + span * frac[i];
    const double pinned = frac[i] * w_end;
    out[i] = (line + w[i]) - pinned;
  }
}

void accumulate_squares(const double* x, double* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] = acc[i] + x[i] * x[i];
}

void sqrt_inplace(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sqrt(x[i]);
}

void affine(const double* t, double t0, double base, double slope, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = base + slope * (t[i] - t0);
}

void add_scaled(const double* a, const double* b, double sign, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + sign * b[i];
}

double sum_squared_increments(const double* v, std::size_t n) {
  if (n < 2) return 0.0;
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t m = n - 1;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = v[i + 1] - v[i];
    lane[i % 4] = lane[i % 4] + d * d;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels table{gaussian_steps, pin_bridge, accumulate_squares, sqrt_inplace,
                             affine,         add_scaled, sum_squared_increments};
  return table;
}

}  // namespace majorant::simd::detail
