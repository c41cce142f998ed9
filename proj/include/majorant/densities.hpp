#pragma once

// Closed-form densities and transition kernels, and the quadrature form of the
// multi-point density of Z that serves as an independent check on the subset-sum
// closed form.

#include <span>
#include <string_view>
#include <vector>

#include "majorant/quadrature.hpp"

namespace majorant {

/// (K'(1), I(1), K(1) - B(1), 1/G(1), D(1)).
struct F5Point {
  double a;
  double b;
  double y;
  double v;
  double w;
};

/// Joint density of F5Point, including the y^2 factor. Zero off the support.
double eval_f5(const F5Point& p);
/// 4y(a+b+y) phi(a+b+y) on the positive octant.
double eval_f3(double a, double b, double y);
/// Density of D(1) - 1 at t given (K'(1), I(1), K(1) - B(1)) = (a, b, y).
double eval_dcond(double t, double a, double b, double y);

struct KernelValues {
  double p;     // heat kernel p(x, y; t)
  double p3;    // p(x, y; t) - p(x, -y; t)
  double bes3;  // BES(3) transition density x -> y
  double bes5;  // BES(5) transition density x -> y
};

/// x >= 0, y >= 0, t > 0. At x = 0 the radial kernels are the scaled Chi(3) and
/// Chi(5) densities. Throws ParameterError for t <= 0.
KernelValues eval_kernels(double x, double y, double t);

struct MultipointQuery {
  double z;
  std::vector<double> times;   // 0 < t_1 < ... < t_m
  std::vector<double> values;  // x_i > 0
};

/// Adaptive quadrature over the mixing level h of the product of p3 factors.
/// Throws NumericError when the quadrature does not converge.
double eval_z_multipoint_quadrature(const MultipointQuery& q, const QuadOptions& options = {});
/// Subset sum over Lambda in {1..m}; m <= 20 (ResourceError otherwise).
double eval_z_multipoint_closed(const MultipointQuery& q);
/// Density of Z(t) at x for Z started at z; zero for x <= 0.
double eval_z_onepoint(double z, double t, double x);

enum class BoundaryKind {
  bes_infimum,     // minimum of BES_h(n): (n-2) x^(n-3) h^-(n-2) on (0, h)
  z_infimum,       // minimum of Z: 6x^2/z^3 - 4x^3/z^4 on (0, z)
  mixture_weight,  // 12 h^2 (z - h) / z^4 on (0, z)
  chi5,            // (2/3) s^4 phi(s), the law of X(1)
};

struct BoundaryParams {
  int n = 3;
  double h = 1.0;
  double z = 1.0;
};

BoundaryKind parse_boundary_kind(std::string_view name);
double eval_boundary_density(BoundaryKind kind, double x, const BoundaryParams& params = {});

/// Antiderivative of x^k phi(x), k in 0..3: Phi, -phi, Phi - x phi, -(x^2 + 2) phi.
double gaussian_antiderivative(int k, double x);

/// Phi(hi) - Phi(lo) without cancellation in either tail.
double gaussian_mass(double lo, double hi);

}  // namespace majorant
