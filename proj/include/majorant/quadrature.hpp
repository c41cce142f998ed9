#pragma once

#include <functional>
#include <span>
#include <vector>

namespace majorant {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  unsigned max_depth = 25;
  bool throw_on_failure = true;
};

/// Globally adaptive 21-point Gauss-Kronrod on [a, b]; b may be +infinity
/// (mapped to [0, 1) by x = a + u / (1 - u)).
/// Throws NumericError (with the interval and error estimate) when the error
/// estimate exceeds max(abs_tol, rel_tol * |value|) and throw_on_failure is set.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& options = {});

/// Integrates over consecutive pieces [p0, p1], [p1, p2], ... so that kinks at
/// the interior points never sit inside a Kronrod panel. The last point may be +infinity.
QuadResult integrate_pieces(const std::function<double(double)>& f, std::span<const double> points,
                            const QuadOptions& options = {});

/// Fixed nodes and weights, for nesting in several dimensions where adaptive
/// rules would be too slow.
struct NodeRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Double exponential rule on (0, inf): x = exp(pi/2 sinh u), u = k * step, |u| <= u_max.
NodeRule half_line_rule(double step = 0.1, double u_max = 4.0);
/// Tanh-sinh rule on (a, b).
NodeRule interval_rule(double a, double b, double step = 0.1, double u_max = 3.5);

}  // namespace majorant
