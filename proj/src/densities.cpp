#include "majorant/densities.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "majorant/errors.hpp"
#include "majorant/rngdist.hpp"

namespace majorant {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;

double heat(double x, double y, double t) {
  const double d = x - y;
  return kInvSqrt2Pi * std::exp(-0.5 * d * d / t) / std::sqrt(t);
}

// sinh(u)/u and (cosh(u) - sinh(u)/u)/u^2 by their Taylor series, for u < 1.
double sinhc_series(double u) {
  const double u2 = u * u;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 12; ++k) {
    term *= u2 / ((2.0 * k) * (2.0 * k + 1.0));
    sum += term;
  }
  return sum;
}

double coshc_series(double u) {
  // sum_k u^(2k-2) 2k / (2k+1)!, k >= 1
  const double u2 = u * u;
  double fact = 6.0;  // (2k+1)! at k = 1
  double power = 1.0;
  double sum = 2.0 / 6.0;
  for (int k = 2; k < 12; ++k) {
    fact *= (2.0 * k) * (2.0 * k + 1.0);
    power *= u2;
    sum += power * (2.0 * k) / fact;
  }
  return sum;
}

}  // namespace

double gaussian_mass(double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  if (lo >= 0.0) return 0.5 * (std::erfc(lo / std::numbers::sqrt2) - std::erfc(hi / std::numbers::sqrt2));
  if (hi <= 0.0) return 0.5 * (std::erfc(-hi / std::numbers::sqrt2) - std::erfc(-lo / std::numbers::sqrt2));
  return 0.5 * (std::erf(hi / std::numbers::sqrt2) - std::erf(lo / std::numbers::sqrt2));
}

double eval_f5(const F5Point& p) {
  if (!(p.a > 0.0 && p.b > 0.0 && p.y > 0.0 && p.v > 1.0 && p.w > 1.0)) return 0.0;
  const double pv = p.v - 1.0;
  const double qw = p.w - 1.0;
  const double pre = std::sqrt(2.0 / (std::numbers::pi * std::numbers::pi * std::numbers::pi *
                                      pv * pv * pv * qw * qw * qw));
  const double wv1 = p.w * p.v - 1.0;
  const double expo = p.b * p.b * p.w + 2.0 * p.a * p.b + p.a * p.a * p.v +
                      p.y * p.y * wv1 / (pv * qw);
  return pre * p.a * p.b * wv1 * p.y * p.y * std::exp(-0.5 * expo);
}

double eval_f3(double a, double b, double y) {
  if (!(a > 0.0 && b > 0.0 && y > 0.0)) return 0.0;
  const double s = a + b + y;
  return 4.0 * y * s * normal_pdf(s);
}

double eval_dcond(double t, double a, double b, double y) {
  if (!(a > 0.0) || !(y > 0.0) || !(b >= 0.0)) throw ParameterError("eval_dcond: need a, y > 0, b >= 0");
  const auto d = eval_ig_densities(IGParams{a, y}, t);
  const double s = a + b + y;
  return (a / s) * d.f + ((b + y) / s) * d.f_star;
}

KernelValues eval_kernels(double x, double y, double t) {
  if (!(t > 0.0)) throw ParameterError("eval_kernels: t must be > 0");
  KernelValues k{};
  k.p = heat(x, y, t);
  const double mirror = heat(x, -y, t);
  k.p3 = k.p - mirror;
  if (!(x >= 0.0) || !(y >= 0.0)) throw ParameterError("eval_kernels: radial kernels need x, y >= 0");
  const double u = x * y / t;
  if (u < 1.0) {
    const double q = kInvSqrt2Pi * std::exp(-0.5 * (x * x + y * y) / t) / std::sqrt(t);
    k.bes3 = 2.0 * q * (y * y / t) * sinhc_series(u);
    k.bes5 = 2.0 * q * (y * y / t) * (y * y / t) * coshc_series(u);
  } else {
    k.bes3 = (y / x) * k.p3;
    k.bes5 = (y * y) / (x * x) * ((k.p + mirror) - k.p3 / u);
  }
  return k;
}

namespace {

void check_query(const MultipointQuery& q) {
  if (!(q.z > 0.0)) throw ParameterError("multipoint density: z must be > 0");
  if (q.times.empty() || q.times.size() != q.values.size()) {
    throw InputError("multipoint density: need matching nonempty times and values");
  }
  double prev = 0.0;
  for (std::size_t i = 0; i < q.times.size(); ++i) {
    if (!(q.times[i] > prev)) throw InputError("multipoint density: times must increase from 0");
    if (!(q.values[i] > 0.0)) throw InputError("multipoint density: values must be > 0");
    prev = q.times[i];
  }
}

}  // namespace

double eval_z_multipoint_quadrature(const MultipointQuery& q, const QuadOptions& options) {
  check_query(q);
  const double z = q.z;
  const std::size_t m = q.times.size();
  const double x_min = *std::min_element(q.values.begin(), q.values.end());
  const double lo = std::max(z - x_min, 0.0);
  const double z4 = z * z * z * z;
  auto integrand = [&](double h) {
    const double shift = h - z;
    double v = 12.0 * (q.values[m - 1] + shift) * h * (z - h) / z4;
    double prev_x = z;
    double prev_t = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double dt = q.times[i] - prev_t;
      v *= heat(prev_x + shift, q.values[i] + shift, dt) - heat(prev_x + shift, -(q.values[i] + shift), dt);
      prev_x = q.values[i];
      prev_t = q.times[i];
    }
    return v;
  };
  try {
    return integrate(integrand, lo, z, options).value;
  } catch (const NumericError& e) {
    std::ostringstream msg;
    msg << e.what() << " (multipoint query z=" << z << ", m=" << m << ")";
    throw NumericError(msg.str());
  }
}

double eval_z_multipoint_closed(const MultipointQuery& q) {
  check_query(q);
  const std::size_t m = q.times.size();
  if (m > 20) throw ResourceError("eval_z_multipoint_closed: m > 20 needs more than 2^20 terms");
  const double z = q.z;
  const double xm = q.values[m - 1];
  const double c = std::min(*std::min_element(q.values.begin(), q.values.end()), z);
  const double z4 = z * z * z * z;

  std::vector<double> dt(m), s(m), free(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double x_prev = i == 0 ? z : q.values[i - 1];
    dt[i] = q.times[i] - (i == 0 ? 0.0 : q.times[i - 1]);
    s[i] = x_prev + q.values[i];
    free[i] = heat(x_prev, q.values[i], dt[i]);
  }

  const double xi_empty = (3.0 * c * c * c * c - 4.0 * c * c * c * (z + xm) + 6.0 * c * c * xm * z) / z4;
  const double sqrt_2pi = std::sqrt(2.0 * std::numbers::pi);
  double total = 0.0;
  std::vector<std::size_t> members;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    members.clear();
    double complement = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (1u << i)) members.push_back(i);
      else complement *= free[i];
    }
    if (members.empty()) {
      total += xi_empty * complement;
      continue;
    }
    double sw = 0.0;
    double sx = 0.0;
    double root_dt = 1.0;
    for (std::size_t i : members) {
      sw += 1.0 / dt[i];
      sx += s[i] / dt[i];
      root_dt *= std::sqrt(dt[i]);
    }
    const double a = 2.0 * std::sqrt(sw);
    const double b = -sx / std::sqrt(sw);
    // Exponent as a sum of squared differences over pairs, which never overflows.
    double spread = 0.0;
    for (std::size_t p = 0; p < members.size(); ++p) {
      for (std::size_t r = p + 1; r < members.size(); ++r) {
        const std::size_t i = members[p];
        const std::size_t j = members[r];
        const double d = s[i] - s[j];
        spread += d * d / (dt[i] * dt[j]);
      }
    }
    const double c_lambda = std::exp(-spread / (2.0 * sw)) /
                            (std::pow(sqrt_2pi, static_cast<double>(members.size() - 1)) * root_dt);
    // Antiderivative of (u - A)(u - b)(u - C) phi(u).
    const double A = b + a * xm;
    const double C = b + a * z;
    const double S = A + b + C;
    const double Q = A * b + A * C + b * C;
    const double u1 = a * c + b;
    const double poly_part = -(u1 * u1 + 2.0 - S * u1 + Q) * normal_pdf(u1) +
                             (b * b + 2.0 - S * b + Q) * normal_pdf(b);
    const double bracket = poly_part - (S + A * b * C) * gaussian_mass(b, u1);
    const double a2 = a * a;
    const double xi = 12.0 / (a2 * a2) * c_lambda / z4 * bracket;
    total += (members.size() % 2 ? -xi : xi) * complement;
  }
  return total;
}

double eval_z_onepoint(double z, double t, double x) {
  if (!(z > 0.0) || !(t > 0.0)) throw ParameterError("eval_z_onepoint: need z, t > 0");
  if (!(x > 0.0)) return 0.0;
  const double st = std::sqrt(t);
  const double d = std::abs(x - z);
  // Far above z every term is below the smallest double.
  if (d / st > 40.0) return 0.0;
  const double c = std::min(x, z);
  const double z4 = z * z * z * z;
  const double near = (0.5 * c * c * c * (x + z + 3.0 * d) + 1.5 * t * t - 0.75 * t * (z + x) * d) *
                      normal_pdf((x - z) / st) / st;
  const double far = (1.5 * t * t - 0.75 * t * (z - x) * (z - x)) * normal_pdf((x + z) / st) / st;
  const double mass = 0.375 * ((z - x) * (z - x) - t) * (z + x) * 2.0 * gaussian_mass(d / st, (x + z) / st);
  return (near - far + mass) / z4;
}

BoundaryKind parse_boundary_kind(std::string_view name) {
  if (name == "bes-infimum") return BoundaryKind::bes_infimum;
  if (name == "z-infimum") return BoundaryKind::z_infimum;
  if (name == "mixture-weight") return BoundaryKind::mixture_weight;
  if (name == "chi5") return BoundaryKind::chi5;
  throw ParameterError("unknown boundary density '" + std::string(name) + "'");
}

double eval_boundary_density(BoundaryKind kind, double x, const BoundaryParams& params) {
  switch (kind) {
    case BoundaryKind::bes_infimum: {
      if (params.n < 3 || !(params.h > 0.0)) throw ParameterError("bes_infimum: need n >= 3, h > 0");
      if (!(x > 0.0 && x < params.h)) return 0.0;
      return (params.n - 2) * std::pow(x, params.n - 3) / std::pow(params.h, params.n - 2);
    }
    case BoundaryKind::z_infimum: {
      const double z = params.z;
      if (!(z > 0.0)) throw ParameterError("z_infimum: z must be > 0");
      if (!(x > 0.0 && x < z)) return 0.0;
      return 6.0 * x * x / (z * z * z) - 4.0 * x * x * x / (z * z * z * z);
    }
    case BoundaryKind::mixture_weight: {
      const double z = params.z;
      if (!(z > 0.0)) throw ParameterError("mixture_weight: z must be > 0");
      if (!(x > 0.0 && x < z)) return 0.0;
      return 12.0 * x * x * (z - x) / (z * z * z * z);
    }
    case BoundaryKind::chi5:
      if (!(x > 0.0) || x > 40.0) return 0.0;
      return (2.0 / 3.0) * x * x * x * x * normal_pdf(x);
  }
  throw ParameterError("eval_boundary_density: unsupported kind");
}

double gaussian_antiderivative(int k, double x) {
  const double phi = normal_pdf(x);
  switch (k) {
    case 0: return normal_cdf(x);
    case 1: return -phi;
    case 2: return normal_cdf(x) - x * phi;
    case 3: return -(x * x + 2.0) * phi;
    default: throw ParameterError("gaussian_antiderivative: k must be in 0..3");
  }
}

}  // namespace majorant
