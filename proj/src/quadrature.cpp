#include "majorant/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

#include "majorant/errors.hpp"

namespace majorant {

namespace {

struct Panel {
  double a, b, value, error;
  unsigned depth;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk_panel(const std::function<double(double)>& f, double a, double b, unsigned depth) {
  using boost::math::quadrature::gauss_kronrod;
  Panel p{a, b, 0.0, 0.0, depth};
  p.value = gauss_kronrod<double, 21>::integrate(f, a, b, 0, 0.0, &p.error);
  return p;
}

// Globally adaptive: split the panel with the largest error until the total
// meets max(abs_tol, rel_tol |I|). Panels stop splitting at max_depth.
QuadResult adaptive(const std::function<double(double)>& f, double a, double b,
                    const QuadOptions& options) {
  std::priority_queue<Panel> queue;
  queue.push(gk_panel(f, a, b, 0));
  std::vector<Panel> done;
  double value = queue.top().value;
  double error = queue.top().error;
  constexpr std::size_t kMaxPanels = 20000;
  while (!queue.empty() && queue.size() + done.size() < kMaxPanels) {
    if (error <= std::max(options.abs_tol, options.rel_tol * std::abs(value))) break;
    const Panel p = queue.top();
    queue.pop();
    if (p.depth >= options.max_depth) {
      done.push_back(p);
      continue;
    }
    const double mid = 0.5 * (p.a + p.b);
    const Panel l = gk_panel(f, p.a, mid, p.depth + 1);
    const Panel r = gk_panel(f, mid, p.b, p.depth + 1);
    value += l.value + r.value - p.value;
    error += l.error + r.error - p.error;
    queue.push(l);
    queue.push(r);
  }
  // Re-sum to shed the drift of the running updates.
  QuadResult out;
  for (; !queue.empty(); queue.pop()) done.push_back(queue.top());
  for (const auto& p : done) {
    out.value += p.value;
    out.error += p.error;
  }
  return out;
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& options) {
  QuadResult r;
  if (a == b) return r;
  if (std::isinf(b)) {
    // x = a + u / (1 - u) on [0, 1).
    auto g = [&](double u) {
      const double v = 1.0 - u;
      return f(a + u / v) / (v * v);
    };
    r = adaptive(g, 0.0, 1.0, options);
  } else {
    r = adaptive(f, a, b, options);
  }
  const double target = std::max(options.abs_tol, options.rel_tol * std::abs(r.value));
  if (!std::isfinite(r.value) || (options.throw_on_failure && r.error > target)) {
    std::ostringstream msg;
    msg << "quadrature did not converge on [" << a << ", " << b << "]: value " << r.value
        << ", error estimate " << r.error << ", target " << target;
    throw NumericError(msg.str());
  }
  return r;
}

QuadResult integrate_pieces(const std::function<double(double)>& f, std::span<const double> points,
                            const QuadOptions& options) {
  QuadResult total;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i] < points[i + 1])) continue;
    const auto piece = integrate(f, points[i], points[i + 1], options);
    total.value += piece.value;
    total.error += piece.error;
  }
  return total;
}

NodeRule half_line_rule(double step, double u_max) {
  NodeRule rule;
  const int k_max = static_cast<int>(std::floor(u_max / step));
  for (int k = -k_max; k <= k_max; ++k) {
    const double u = k * step;
    const double x = std::exp(0.5 * std::numbers::pi * std::sinh(u));
    if (!(x > 0.0) || !std::isfinite(x)) continue;
    rule.nodes.push_back(x);
    rule.weights.push_back(step * x * 0.5 * std::numbers::pi * std::cosh(u));
  }
  return rule;
}

NodeRule interval_rule(double a, double b, double step, double u_max) {
  NodeRule rule;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const int k_max = static_cast<int>(std::floor(u_max / step));
  for (int k = -k_max; k <= k_max; ++k) {
    const double u = k * step;
    const double s = 0.5 * std::numbers::pi * std::sinh(u);
    const double c = std::cosh(s);
    const double x = mid + half * std::tanh(s);
    if (!(x > a && x < b)) continue;
    rule.nodes.push_back(x);
    rule.weights.push_back(step * half * 0.5 * std::numbers::pi * std::cosh(u) / (c * c));
  }
  return rule;
}

}  // namespace majorant
