#include "majorant/chain.hpp"

#include <algorithm>
#include <sstream>

#include "majorant/bessel.hpp"
#include "majorant/errors.hpp"
#include "majorant/simd.hpp"

namespace majorant {

std::size_t VertexChain::segment_at(double t) const {
  if (vertices.size() < 2 || t < vertices.front() || !(t < vertices.back())) {
    std::ostringstream msg;
    msg << "time " << t << " outside the chain ["
        << (vertices.empty() ? 0.0 : vertices.front()) << ", "
        << (vertices.empty() ? 0.0 : vertices.back()) << ")";
    throw HorizonError(msg.str());
  }
  const auto it = std::upper_bound(vertices.begin(), vertices.end(), t);
  return static_cast<std::size_t>(it - vertices.begin()) - 1;
}

namespace {

[[noreturn]] void too_many_segments(std::size_t count, double slope, double vertex) {
  std::ostringstream msg;
  msg << "vertex chain exceeded " << count << " segments (last slope " << slope
      << ", last vertex " << vertex << ")";
  throw ResourceError(msg.str());
}

}  // namespace

VertexChain sample_vertex_chain(RngStream& rng, double b, double horizon, double delta,
                                const ChainOptions& options) {
  if (!(b > 0.0) || !(horizon > 0.0) || !(delta > 0.0) || !(delta < horizon)) {
    throw ParameterError("sample_vertex_chain: need b > 0 and 0 < delta < horizon");
  }
  VertexChain chain;
  chain.b = b;
  chain.delta = delta;
  chain.horizon = horizon;

  // Left of theta(b), generated outward and stored reversed.
  std::vector<double> left_slopes;
  std::vector<double> left_lengths;
  double alpha = b;
  while (1.0 / alpha >= options.tail_tolerance) {
    alpha /= rng.uniform();
    left_slopes.push_back(alpha);
    left_lengths.push_back(sample_gamma_half(rng, alpha));
    if (left_slopes.size() >= options.max_segments) {
      too_many_segments(options.max_segments, alpha, 0.0);
    }
  }
  chain.first_index = -static_cast<std::int64_t>(left_slopes.size());
  chain.slopes.assign(left_slopes.rbegin(), left_slopes.rend());
  chain.lengths.assign(left_lengths.rbegin(), left_lengths.rend());

  double v = 0.0;
  double k = 0.0;
  chain.vertices.push_back(v);
  chain.levels.push_back(k);
  for (std::size_t j = 0; j < chain.slopes.size(); ++j) {
    v += chain.lengths[j];
    k += chain.slopes[j] * chain.lengths[j];
    chain.vertices.push_back(v);
    chain.levels.push_back(k);
  }

  alpha = b;
  while (!(v > horizon)) {
    alpha *= rng.uniform();
    const double length = sample_gamma_half(rng, alpha);
    chain.slopes.push_back(alpha);
    chain.lengths.push_back(length);
    v += length;
    k += alpha * length;
    chain.vertices.push_back(v);
    chain.levels.push_back(k);
    if (chain.slopes.size() >= options.max_segments) {
      too_many_segments(options.max_segments, alpha, v);
    }
  }
  return chain;
}

MajorantPaths assemble_paths(RngStream& rng, const VertexChain& chain, std::span<const double> times) {
  require_increasing(times, "assemble_paths");
  if (times.front() < chain.delta || times.back() > chain.horizon) {
    throw HorizonError("assemble_paths: times must lie in [delta, horizon]");
  }
  const std::size_t n = times.size();
  std::vector<double> k(n);
  std::vector<double> gap(n, 0.0);

  std::size_t i = 0;
  std::size_t seg = chain.segment_at(times.front());
  while (i < n) {
    while (!(times[i] < chain.vertices[seg + 1])) {
      ++seg;
      if (seg >= chain.segments()) throw HorizonError("assemble_paths: time beyond the chain");
    }
    const double left = chain.vertices[seg];
    const double right = chain.vertices[seg + 1];
    std::size_t end = i;
    while (end < n && times[end] < right) ++end;

    const auto block = times.subspan(i, end - i);
    simd::affine(block, left, chain.levels[seg], chain.slopes[seg],
                 std::span<double>(k).subspan(i, end - i));
    // A time sitting exactly on the left vertex keeps gap 0.
    const std::size_t first_interior = block.front() == left ? 1 : 0;
    if (first_interior < block.size()) {
      const auto exc = sample_excursion(rng, left, right, block.subspan(first_interior));
      std::copy(exc.values.begin(), exc.values.end(), gap.begin() + i + first_interior);
    }
    i = end;
  }

  MajorantPaths out;
  out.K = PathGrid{{times.begin(), times.end()}, std::move(k)};
  out.B = PathGrid{out.K.times, std::vector<double>(n)};
  out.X = PathGrid{out.K.times, std::vector<double>(n)};
  simd::add_scaled(out.K.values, gap, -1.0, out.B.values);
  simd::add_scaled(out.K.values, gap, 1.0, out.X.values);
  return out;
}

ChainQuery query_chain(const VertexChain& chain, double t) {
  const std::size_t seg = chain.segment_at(t);
  ChainQuery q;
  q.G = chain.vertices[seg];
  q.D = chain.vertices[seg + 1];
  q.Kp = chain.slopes[seg];
  q.K = chain.levels[seg] + q.Kp * (t - q.G);
  q.I = chain.levels[seg] - q.G * q.Kp;
  return q;
}

}  // namespace majorant
