#pragma once

// Joint law of a Brownian motion B and its concave majorant K on [0, inf),
// generated segment by segment from the slope chain: slopes right of the anchor
// are successive uniform thinnings, slopes to the left successive 1/U
// inflations, segment lengths are N^2 / alpha^2, and K - B is an independent
// excursion on every segment.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "majorant/path.hpp"
#include "majorant/rngdist.hpp"

namespace majorant {

/// Segments in time order. Segment j spans [vertices[j], vertices[j+1]] with
/// slope slopes[j]; its index in the anchored numbering is first_index + j
/// (index 0 is the segment whose left vertex is theta(b)).
struct VertexChain {
  double b = 1.0;
  double delta = 0.0;
  double horizon = 0.0;
  std::int64_t first_index = 0;
  std::vector<double> slopes;
  std::vector<double> lengths;
  std::vector<double> vertices;  // size segments() + 1
  std::vector<double> levels;    // K at each vertex

  std::size_t segments() const { return slopes.size(); }
  /// Position of the segment straddling t (left-closed); HorizonError outside the chain.
  std::size_t segment_at(double t) const;
};

struct ChainOptions {
  std::size_t max_segments = 1'000'000;
  /// Left generation stops once 1/alpha falls below this; the unsampled tail
  /// then contributes about tail_tolerance to K and tail_tolerance^2 to time,
  /// and the leftmost vertex is placed at 0.
  double tail_tolerance = 1e-13;
};

VertexChain sample_vertex_chain(RngStream& rng, double b, double horizon, double delta,
                                const ChainOptions& options = {});

struct MajorantPaths {
  PathGrid B;
  PathGrid K;
  PathGrid X;
};

/// B, K and X = 2K - B at the requested times, which must lie in [delta, horizon]
/// and inside the chain. Excursions are sampled exactly at the interior times.
MajorantPaths assemble_paths(RngStream& rng, const VertexChain& chain, std::span<const double> times);

struct ChainQuery {
  double G;   // left vertex of the straddling segment
  double D;   // right vertex
  double K;   // K(t)
  double Kp;  // K'(t)
  double I;   // K(t) - t K'(t)
};

/// At a vertex t, G = t and D is the next vertex.
ChainQuery query_chain(const VertexChain& chain, double t);

}  // namespace majorant
