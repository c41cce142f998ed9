#include <immintrin.h>

#include <cmath>

#include "majorant/simd.hpp"

namespace majorant::simd::detail {
namespace {

void gaussian_steps(const double* dt, const double* normal, double drift, double* out,
                    std::size_t n) {
  const __m256d vdrift = _mm256_set1_pd(drift);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_loadu_pd(dt + i);
    const __m256d a = _mm256_mul_pd(vdrift, d);
    const __m256d b = _mm256_mul_pd(_mm256_sqrt_pd(d), _mm256_loadu_pd(normal + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(a, b));
  }
  for (; i < n; ++i) {
    const double a = drift * dt[i];
    const double b = std::sqrt(dt[i]) * normal[i];
    out[i] = a + b;
  }
}

void pin_bridge(const double* w, const double* frac, double w_end, double start, double end,
                double* out, std::size_t n) {
  const double span = end - start;
  const __m256d vstart = _mm256_set1_pd(start);
  const __m256d vspan = _mm256_set1_pd(span);
  const __m256d vend = _mm256_set1_pd(w_end);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d f = _mm256_loadu_pd(frac + i);
    const __m256d line = _mm256_add_pd(vstart, _mm256_mul_pd(vspan, f));
    const __m256d pinned = _mm256_mul_pd(f, vend);
    const __m256d v = _mm256_sub_pd(_mm256_add_pd(line, _mm256_loadu_pd(w + i)), pinned);
    _mm256_storeu_pd(out + i, v);
  }
  for (; i < n; ++i) {
    const double line = start + span * frac[i];
    const double pinned = frac[i] * w_end;
    out[i] = (line + w[i]) - pinned;
  }
}

void accumulate_squares(const double* x, double* acc, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_mul_pd(v, v)));
  }
  for (; i < n; ++i) acc[i] = acc[i] + x[i] * x[i];
}

void sqrt_inplace(double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_sqrt_pd(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] = std::sqrt(x[i]);
}

void affine(const double* t, double t0, double base, double slope, double* out, std::size_t n) {
  const __m256d vt0 = _mm256_set1_pd(t0);
  const __m256d vbase = _mm256_set1_pd(base);
  const __m256d vslope = _mm256_set1_pd(slope);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(t + i), vt0);
    _mm256_storeu_pd(out + i, _mm256_add_pd(vbase, _mm256_mul_pd(vslope, d)));
  }
  for (; i < n; ++i) out[i] = base + slope * (t[i] - t0);
}

void add_scaled(const double* a, const double* b, double sign, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(sign);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_mul_pd(vs, _mm256_loadu_pd(b + i)));
    _mm256_storeu_pd(out + i, v);
  }
  for (; i < n; ++i) out[i] = a[i] + sign * b[i];
}

double sum_squared_increments(const double* v, std::size_t n) {
  if (n < 2) return 0.0;
  const std::size_t m = n - 1;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(v + i + 1), _mm256_loadu_pd(v + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (; i < m; ++i) {
    const double d = v[i + 1] - v[i];
    lane[i % 4] = lane[i % 4] + d * d;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

const Kernels& avx2_kernels() {
  static const Kernels table{gaussian_steps, pin_bridge, accumulate_squares, sqrt_inplace,
                             affine,         add_scaled, sum_squared_increments};
  return table;
}

}  // namespace majorant::simd::detail
