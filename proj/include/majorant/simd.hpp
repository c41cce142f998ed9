#pragma once

// Data-parallel inner loops used by the path samplers.
//
// Every kernel has a scalar reference and (on x86-64) an AVX2 variant. The
// variant is chosen once per process from the CPU features, or forced with
// MAJORANT_ISA=scalar|avx2. Variants are bitwise identical: no fused
// multiply-add, and reductions accumulate in four interleaved lanes in both.

#include <cstddef>
#include <span>
#include <string_view>

namespace majorant::simd {

enum class Isa { scalar, avx2 };

struct Kernels {
  // out[i] = drift * dt[i] + sqrt(dt[i]) * normal[i]
  void (*gaussian_steps)(const double* dt, const double* normal, double drift, double* out,
                         std::size_t n);
  // out[i] = start + (end - start) * frac[i] + w[i] - frac[i] * w_end
  void (*pin_bridge)(const double* w, const double* frac, double w_end, double start, double end,
                     double* out, std::size_t n);
  // acc[i] += x[i] * x[i]
  void (*accumulate_squares)(const double* x, double* acc, std::size_t n);
  void (*sqrt_inplace)(double* x, std::size_t n);
  // out[i] = base + slope * (t[i] - t0)
  void (*affine)(const double* t, double t0, double base, double slope, double* out, std::size_t n);
  // out[i] = a[i] + sign * b[i], sign in {-1, +1}
  void (*add_scaled)(const double* a, const double* b, double sign, double* out, std::size_t n);
  // sum over i of (v[i+1] - v[i])^2
  double (*sum_squared_increments)(const double* v, std::size_t n);
};

bool isa_supported(Isa isa);
Isa active_isa();
std::string_view isa_name(Isa isa);

// Dispatched table.
const Kernels& kernels();
// A specific variant; throws std::invalid_argument if this build or CPU lacks it.
const Kernels& kernels_for(Isa isa);

// Span conveniences over the dispatched table. Sizes must agree.
void gaussian_steps(std::span<const double> dt, std::span<const double> normal, double drift,
                    std::span<double> out);
void pin_bridge(std::span<const double> w, std::span<const double> frac, double w_end,
                double start, double end, std::span<double> out);
void accumulate_squares(std::span<const double> x, std::span<double> acc);
void sqrt_inplace(std::span<double> x);
void affine(std::span<const double> t, double t0, double base, double slope, std::span<double> out);
void add_scaled(std::span<const double> a, std::span<const double> b, double sign,
                std::span<double> out);
double sum_squared_increments(std::span<const double> v);

namespace detail {
const Kernels& scalar_kernels();
#ifdef MAJORANT_BUILD_AVX2
const Kernels& avx2_kernels();
#endif
}  // namespace detail

}  // namespace majorant::simd
