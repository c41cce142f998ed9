#include "majorant/psi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "majorant/errors.hpp"

namespace majorant {

PsiState sample_psi_given_x(RngStream& rng, double t, double z) {
  if (!(t > 0.0) || !(z > 0.0)) throw ParameterError("sample_psi_given_x: need t > 0 and z > 0");
  const double target = rng.uniform();
  const double u = invert_cdf([](double v) { return v * v * (3.0 - 2.0 * v); },
                              [](double v) { return 6.0 * v * (1.0 - v); }, target, 0.0, 1.0);
  PsiState s;
  s.y = z * u;
  s.k = z - s.y;
  s.a = rng.uniform() * s.k / t;
  const IGParams p{s.a, s.y};
  s.w = rng.uniform() < s.a * t / z ? sample_ig(rng, p) : sample_sbig(rng, p);
  return s;
}

namespace {

PsiState evolve_by_chain(RngStream& rng, const PsiState& s, double t, const EvolveOptions& opt) {
  const double target = t - s.w;  // time after the vertex D
  double alpha = s.a;
  double start = 0.0;
  double level = 0.0;
  for (std::size_t n = 0; n < opt.max_segments; ++n) {
    alpha *= rng.uniform();
    const double length = sample_gamma_half(rng, alpha);
    if (start + length > target) {
      PsiState out;
      out.a = alpha;
      out.k = s.k + s.a * s.w + level + alpha * (target - start);
      if (target > start) {
        const double at[] = {target};
        out.y = sample_excursion(rng, start, start + length, at).values[0];
      }
      out.w = start + length - target;
      return out;
    }
    start += length;
    level += alpha * length;
  }
  throw ResourceError("evolve_psi: chain continuation exceeded the segment cap");
}

// BES(3, a) from 0 grown incrementally on a grid that includes `target`.
class HullPath {
 public:
  HullPath(RngStream& rng, double a, double target, double grid_dt, const EvolveOptions& opt)
      : rng_(rng), a_(a), target_(target), dt_(grid_dt), opt_(opt) {
    fine_end_ = std::max(target, 16.0 * grid_dt);
    times_.push_back(0.0);
    values_.push_back(0.0);
    if (radial()) coords_.push_back({0.0, 0.0, 0.0});
  }

  void extend_to(double horizon) {
    while (times_.back() < horizon) {
      const double now = times_.back();
      // Touching the minorant at s with a slope margin m ~ s^(-1/2) below a, a
      // step h there shifts m by about sqrt(h) / s, so h = dt s / target keeps
      // the relative error at sqrt(dt / target) out to any horizon, for
      // O((target / dt) log horizon) points. Refinement removes the error near
      // the segment that matters.
      const double next = now + dt_ * std::max(1.0, now / fine_end_);
      const double stop = now < target_ && next > target_ ? target_ : next;
      advance(stop - now, now);
      times_.push_back(stop);
    }
  }

  // Bisects, recursively, every interval longer than min_width whose bridge
  // could dip below the line through (t0, v0) with the given slope with
  // probability above exp(-log_tol), judged by the unit-diffusion bridge bound
  // exp(-2 d0 d1 / h). The 3-d coordinates make the midpoint draw exact: drift
  // cancels in a bridge. Returns false when nothing was inserted. Euler paths
  // are never refined.
  bool refine(double t0, double v0, double slope, double min_width, double log_tol) {
    if (!radial()) return false;
    Line line{t0, v0, slope, min_width, log_tol};
    std::vector<Point> out;
    out.reserve(times_.size());
    bool inserted = false;
    for (std::size_t i = 0; i < times_.size(); ++i) {
      const Point p{times_[i], values_[i], coords_[i]};
      if (i > 0) inserted |= split(out.back(), p, line, out);
      out.push_back(p);
    }
    if (inserted) {
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (i < times_.size()) {
          times_[i] = out[i].t;
          values_[i] = out[i].v;
          coords_[i] = out[i].x;
        } else {
          times_.push_back(out[i].t);
          values_.push_back(out[i].v);
          coords_.push_back(out[i].x);
        }
      }
    }
    return inserted;
  }

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }

 private:
  struct Point {
    double t;
    double v;
    std::array<double, 3> x;
  };
  struct Line {
    double t0, v0, slope, min_width, log_tol;
    // Height over the line, or -1 when clearly below it.
    double above(const Point& p) const {
      const double d = p.v - (v0 + slope * (p.t - t0));
      if (d < -1e-12 * (1.0 + std::abs(p.v))) return -1.0;
      return std::max(d, 0.0);
    }
  };

  bool radial() const { return opt_.drift == BesDrift::radial; }

  // Appends the points strictly inside (p, q) that the bisection creates. A
  // point below the line moves the hull, so it ends the pass there.
  bool split(Point p, Point q, const Line& line, std::vector<Point>& out) {
    const double h = q.t - p.t;
    if (!(h > line.min_width)) return false;
    const double dp = line.above(p);
    const double dq = line.above(q);
    if (dp < 0.0 || dq < 0.0 || 2.0 * dp * dq / h >= line.log_tol) return false;
    Point m{p.t + 0.5 * h, 0.0, {}};
    if (!(m.t > p.t && m.t < q.t)) return false;
    const double sd = 0.5 * std::sqrt(h);
    for (int c = 0; c < 3; ++c) m.x[c] = 0.5 * (p.x[c] + q.x[c]) + sd * rng_.normal();
    m.v = norm(m.x);
    split(p, m, line, out);
    out.push_back(m);
    split(m, q, line, out);
    return true;
  }

  static double norm(const std::array<double, 3>& x) {
    return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  }

  void advance(double dt, double now) {
    if (radial()) {
      const double sq = std::sqrt(dt);
      auto x = coords_.back();
      x[0] += a_ * dt + sq * rng_.normal();
      x[1] += sq * rng_.normal();
      x[2] += sq * rng_.normal();
      coords_.push_back(x);
      values_.push_back(norm(x));
      return;
    }
    // Euler steps no coarser than grid_dt scaled by how far out the grid is.
    const double local = dt_ * std::max(1.0, now / fine_end_);
    const auto steps = static_cast<std::size_t>(std::ceil(dt / local));
    const double h = dt / static_cast<double>(steps);
    const double sq = std::sqrt(h);
    double x = values_.back();
    for (std::size_t i = 0; i < steps; ++i) {
      x = std::abs(x + (1.0 / std::max(x, sq) + a_) * h + sq * rng_.normal());
    }
    values_.push_back(x);
  }

  RngStream& rng_;
  double a_;
  double target_;
  double dt_;
  const EvolveOptions& opt_;
  double fine_end_;
  std::vector<std::array<double, 3>> coords_;
  std::vector<double> times_;
  std::vector<double> values_;
};

// -log of the tolerated probability that the straddling segment is still wrong.
constexpr double kSettleLog = 20.0;
// Refined intervals stop at this fraction of grid_dt, and intervals whose
// bridge dips below the segment line with probability under exp(-kRefineLog)
// are left alone.
constexpr double kRefineWidth = 1e-4;
constexpr double kRefineLog = 6.0;

PsiState evolve_by_hull(RngStream& rng, const PsiState& s, double t, double grid_dt,
                        const EvolveOptions& opt) {
  if (!(grid_dt > 0.0)) throw ParameterError("evolve_psi: grid_dt must be > 0");
  const double target = t - s.w;
  HullPath path(rng, s.a, target, grid_dt, opt);
  double horizon = std::max(4.0 * target, 32.0 * grid_dt);
  path.extend_to(horizon);
  double left = -1.0;
  double right = -1.0;
  bool refined = false;
  for (int doubling = 0;;) {
    const auto hull = convex_minorant(path.times(), path.values());
    const std::size_t seg = hull.segment_index(target);
    const double l = hull.breakpoints[seg];
    const double r = hull.breakpoints[seg + 1];
    const double slope = hull.slope(seg);
    // Beyond the horizon R only changes this segment by dipping below its
    // supporting line. R has drift a coth(a R) >= a there, so the chance of that
    // is at most exp(-2 (a - slope) gap), the crossing probability for drift a.
    // The last segment has gap 0 and never settles.
    const double gap = path.values().back() -
                       (hull.values[seg + 1] + slope * (path.times().back() - r));
    const bool tail_ok = slope < s.a && 2.0 * (s.a - slope) * gap > kSettleLog;
    if (tail_ok && (refined || (l == left && r == right))) {
      if (path.refine(l, hull.values[seg], slope, kRefineWidth * grid_dt, kRefineLog)) {
        refined = true;
        continue;
      }
      PsiState out;
      const double c = hull(target);
      const auto at = static_cast<std::size_t>(
          std::lower_bound(path.times().begin(), path.times().end(), target) -
          path.times().begin());
      out.a = s.a - slope;
      out.k = s.k + s.a * t - c;
      out.y = std::max(path.values()[at] - c, 0.0);
      out.w = r - target;
      return out;
    }
    if (doubling >= opt.max_doublings) {
      std::ostringstream msg;
      msg << "evolve_psi: hull segment around " << target << " unsettled after "
          << opt.max_doublings << " doublings (horizon " << horizon << ", slope a " << s.a << ")";
      throw ResourceError(msg.str());
    }
    ++doubling;
    left = l;
    right = r;
    refined = false;
    horizon *= 2.0;
    path.extend_to(horizon);
  }
}

}  // namespace

PsiState evolve_psi(RngStream& rng, const PsiState& state, double t, double grid_dt,
                    const EvolveOptions& options) {
  if (!(t > 0.0)) throw ParameterError("evolve_psi: t must be > 0");
  if (!(state.w > 0.0) || !(state.a >= 0.0) || !(state.y >= 0.0)) {
    throw ParameterError("evolve_psi: need w > 0, a >= 0, y >= 0");
  }
  if (t < state.w) {
    const double at[] = {t};
    PsiState out = state;
    out.k = state.k + state.a * t;
    out.y = sample_bessel_bridge(rng, BridgeSpec{3, 0.0, state.y, state.w, 0.0}, at).values[0];
    out.w = state.w - t;
    return out;
  }
  if (!(state.a > 0.0)) throw ParameterError("evolve_psi: past the vertex the slope must be > 0");
  return options.route == PsiRoute::chain ? evolve_by_chain(rng, state, t, options)
                                          : evolve_by_hull(rng, state, t, grid_dt, options);
}

}  // namespace majorant
