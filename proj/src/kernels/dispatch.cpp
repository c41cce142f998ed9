#include <cstdlib>
#include <stdexcept>
#include <string>

#include "majorant/simd.hpp"

namespace majorant::simd {

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(MAJORANT_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

namespace {

Isa select_isa() {
  if (const char* forced = std::getenv("MAJORANT_ISA")) {
    const std::string name(forced);
    if (name == "scalar") return Isa::scalar;
    if (name == "avx2" && isa_supported(Isa::avx2)) return Isa::avx2;
  }
  return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

void require_same(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("simd kernel: span size mismatch");
}

}  // namespace

Isa active_isa() {
  static const Isa isa = select_isa();
  return isa;
}

const Kernels& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("simd: instruction set not available: " + std::string(isa_name(isa)));
  }
#ifdef MAJORANT_BUILD_AVX2
  if (isa == Isa::avx2) return detail::avx2_kernels();
#endif
  return detail::scalar_kernels();
}

const Kernels& kernels() {
  static const Kernels& table = kernels_for(active_isa());
  return table;
}

void gaussian_steps(std::span<const double> dt, std::span<const double> normal, double drift,
                    std::span<double> out) {
  require_same(dt.size(), normal.size());
  require_same(dt.size(), out.size());
  kernels().gaussian_steps(dt.data(), normal.data(), drift, out.data(), out.size());
}

void pin_bridge(std::span<const double> w, std::span<const double> frac, double w_end,
                double start, double end, std::span<double> out) {
  require_same(w.size(), frac.size());
  require_same(w.size(), out.size());
  kernels().pin_bridge(w.data(), frac.data(), w_end, start, end, out.data(), out.size());
}

void accumulate_squares(std::span<const double> x, std::span<double> acc) {
  require_same(x.size(), acc.size());
  kernels().accumulate_squares(x.data(), acc.data(), acc.size());
}

void sqrt_inplace(std::span<double> x) { kernels().sqrt_inplace(x.data(), x.size()); }

void affine(std::span<const double> t, double t0, double base, double slope, std::span<double> out) {
  require_same(t.size(), out.size());
  kernels().affine(t.data(), t0, base, slope, out.data(), out.size());
}

void add_scaled(std::span<const double> a, std::span<const double> b, double sign,
                std::span<double> out) {
  require_same(a.size(), b.size());
  require_same(a.size(), out.size());
  kernels().add_scaled(a.data(), b.data(), sign, out.data(), out.size());
}

double sum_squared_increments(std::span<const double> v) {
  return kernels().sum_squared_increments(v.data(), v.size());
}

}  // namespace majorant::simd
