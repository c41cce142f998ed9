#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "majorant/chain.hpp"
#include "majorant/errors.hpp"
#include "majorant/psi.hpp"
#include "majorant/quadrature.hpp"
#include "majorant/stats.hpp"
#include "support.hpp"

using namespace majorant;

namespace {

// f3(a, b, y) = 4 y (a + b + y) phi(a + b + y) on the positive octant, written
// out here rather than taken from the densities module.
double f3_ref(double a, double b, double y) {
  const double s = a + b + y;
  return 4.0 * y * s * std::exp(-0.5 * s * s) / std::sqrt(2.0 * M_PI);
}

// P(K'(1) > a): integrating f3 over b, y > 0 and slopes above a leaves
// int_a^inf (2/3) (s - a)^3 s phi(s) ds.
double slope_survival(double a) {
  return integrate([a](double s) { return (2.0 / 3.0) * std::pow(s - a, 3) * s * std::exp(-0.5 * s * s) / std::sqrt(2.0 * M_PI); },
                   a, std::numeric_limits<double>::infinity())
      .value;
}

double chi5_ref(double x) { return testing::chi_cdf(x, 5); }

struct Chains {
  std::vector<double> x1;
  std::vector<double> x2;
  std::vector<double> a;
  std::vector<double> k;
  std::vector<double> y;
  std::vector<double> w;
};

// Chains observed at t = 1 and t = 2, keeping those with X(1) in [lo, hi].
Chains slab(RngStream& rng, std::size_t n_accept, double lo, double hi) {
  Chains c;
  const double times[] = {1.0, 2.0};
  while (c.x1.size() < n_accept) {
    const auto chain = sample_vertex_chain(rng, 1.0, 2.0, 0.5);
    const auto q = query_chain(chain, 1.0);
    const auto p = assemble_paths(rng, chain, times);
    const double x = p.X.values[0];
    if (x < lo || x > hi) continue;
    c.x1.push_back(x);
    c.x2.push_back(p.X.values[1]);
    c.a.push_back(q.Kp);
    c.k.push_back(q.K);
    c.y.push_back(q.K - p.B.values[0]);
    c.w.push_back(q.D - 1.0);
  }
  return c;
}

}  // namespace

TEST_CASE("vertex chain structure") {
  RngStream rng(1, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto c = sample_vertex_chain(rng, 1.0, 3.0, 0.01);
    REQUIRE(c.vertices.size() == c.segments() + 1);
    REQUIRE(c.vertices.front() == 0.0);
    REQUIRE(c.vertices[1] < 0.01);
    REQUIRE(c.vertices.back() > 3.0);
    REQUIRE(c.first_index < 0);
    // The anchor slope b sits between segment -1 and segment 0.
    const auto anchor = static_cast<std::size_t>(-c.first_index);
    REQUIRE(c.slopes[anchor - 1] > 1.0);
    REQUIRE(c.slopes[anchor] < 1.0);
    for (std::size_t j = 0; j < c.segments(); ++j) {
      REQUIRE(c.lengths[j] > 0.0);
      REQUIRE(c.slopes[j] > 0.0);
      if (j > 0) REQUIRE(c.slopes[j] < c.slopes[j - 1]);
      REQUIRE(c.vertices[j + 1] == c.vertices[j] + c.lengths[j]);
      REQUIRE(c.levels[j + 1] == doctest::Approx(c.levels[j] + c.slopes[j] * c.lengths[j]).epsilon(1e-15));
    }
  }
  CHECK_THROWS_AS(sample_vertex_chain(rng, 0.0, 1.0, 0.1), ParameterError);
  CHECK_THROWS_AS(sample_vertex_chain(rng, 1.0, 1.0, 1.0), ParameterError);
  CHECK_THROWS_AS(sample_vertex_chain(rng, 1.0, 1e6, 0.1, ChainOptions{10, 1e-13}), ResourceError);
}

TEST_CASE("segment lengths have mean 1 / alpha^2") {
  RngStream rng(2, 0);
  std::vector<double> scaled;
  while (scaled.size() < 100000) {
    const auto c = sample_vertex_chain(rng, 1.0, 2.0, 0.5);
    for (std::size_t j = 0; j < c.segments(); ++j) scaled.push_back(c.lengths[j] * c.slopes[j] * c.slopes[j]);
  }
  CHECK(std::abs(testing::mean(scaled) - 1.0) < 3.0 * testing::sem(scaled));
}

TEST_CASE("K'(1) follows the slope marginal of f3") {
  RngStream rng(3, 0);
  const auto a = testing::draw(100000, [&] { return query_chain(sample_vertex_chain(rng, 1.0, 1.5, 0.5), 1.0).Kp; });
  CHECK(slope_survival(0.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(ks_one_sample(a, [](double v) { return 1.0 - slope_survival(v); }).p_value > 0.01);
}

TEST_CASE("joint (K'(1), I(1)) against binned f3 marginal") {
  RngStream rng(4, 0);
  const std::vector<double> edges{0.0, 0.25, 0.5, 0.8, 1.2, 1.8, 8.0};
  const std::size_t nb = edges.size() - 1;
  std::vector<double> counts(nb * nb, 0.0);
  const std::size_t n = 100000;
  auto bin = [&](double v) {
    return std::min<std::size_t>(nb - 1, std::upper_bound(edges.begin(), edges.end(), v) - edges.begin() - 1);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto q = query_chain(sample_vertex_chain(rng, 1.0, 1.5, 0.5), 1.0);
    counts[bin(q.Kp) * nb + bin(q.I)] += 1.0;
  }
  // Bin masses by nested quadrature of f3; the last edge stands in for infinity
  // (mass beyond s = 8 is below 1e-12).
  std::vector<double> expected(nb * nb);
  QuadOptions loose{1e-11, 1e-9, 20, true};
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double hi_a = i + 1 == nb ? 30.0 : edges[i + 1];
      const double hi_b = j + 1 == nb ? 30.0 : edges[j + 1];
      const double m = integrate([&](double av) {
        return integrate([&](double bv) {
          return integrate([&](double yv) { return f3_ref(av, bv, yv); }, 0.0, 30.0, loose).value;
        }, edges[j], hi_b, loose).value;
      }, edges[i], hi_a, loose).value;
      expected[i * nb + j] = m * n;
    }
  }
  double total = 0.0;
  for (double e : expected) total += e;
  CHECK(total == doctest::Approx(double(n)).epsilon(1e-8));
  CHECK(chi_square(counts, expected).p_value > 0.01);
}

TEST_CASE("X(1) is Chi(5)") {
  RngStream rng(5, 0);
  const double t[] = {1.0};
  const auto x = testing::draw(100000, [&] { return assemble_paths(rng, sample_vertex_chain(rng, 1.0, 1.0, 0.5), t).X.values[0]; });
  CHECK(ks_one_sample(x, chi5_ref).p_value > 0.01);
}

TEST_CASE("chain law does not depend on the anchor slope, and scales like Brownian motion") {
  RngStream rng(6, 0);
  const double t1[] = {1.0};
  const double t4[] = {4.0};
  const auto b1 = testing::draw(50000, [&] { return assemble_paths(rng, sample_vertex_chain(rng, 1.0, 1.0, 0.5), t1).X.values[0]; });
  const auto b5 = testing::draw(50000, [&] { return assemble_paths(rng, sample_vertex_chain(rng, 5.0, 1.0, 0.5), t1).X.values[0]; });
  CHECK(ks_two_sample(b1, b5).p_value > 0.01);
  const auto s4 = testing::draw(50000, [&] { return 0.5 * assemble_paths(rng, sample_vertex_chain(rng, 1.0, 4.0, 0.5), t4).X.values[0]; });
  CHECK(ks_two_sample(b1, s4).p_value > 0.01);
}

TEST_CASE("assembled paths: ordering, vertices and concavity") {
  RngStream rng(7, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto c = sample_vertex_chain(rng, 1.0, 3.0, 0.01);
    auto grid = uniform_grid(0.01, 3.0, 1e-3);
    // Put every vertex inside the range on the grid.
    std::vector<double> vt;
    for (double v : c.vertices) {
      if (v >= 0.01 && v <= 3.0) vt.push_back(v);
    }
    grid.insert(grid.end(), vt.begin(), vt.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const auto p = assemble_paths(rng, c, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const bool vertex = std::binary_search(vt.begin(), vt.end(), grid[i]);
      REQUIRE(p.K.values[i] >= p.B.values[i]);
      REQUIRE(p.X.values[i] >= p.K.values[i]);
      REQUIRE(p.K.values[i] >= 0.0);
      if (vertex) {
        REQUIRE(p.K.values[i] == p.B.values[i]);
      } else {
        REQUIRE(p.K.values[i] > p.B.values[i]);
      }
    }
    // Second differences of K at consecutive vertices.
    for (std::size_t j = 1; j + 1 < c.vertices.size(); ++j) {
      const double left = (c.levels[j] - c.levels[j - 1]) / (c.vertices[j] - c.vertices[j - 1]);
      const double right = (c.levels[j + 1] - c.levels[j]) / (c.vertices[j + 1] - c.vertices[j]);
      REQUIRE(right - left <= 1e-12 * std::max(1.0, left));
    }
  }
  const auto c = sample_vertex_chain(rng, 1.0, 2.0, 0.1);
  const double early[] = {0.05};
  const double late[] = {2.5};
  CHECK_THROWS_AS(assemble_paths(rng, c, early), HorizonError);
  CHECK_THROWS_AS(assemble_paths(rng, c, late), HorizonError);
}

TEST_CASE("query_chain") {
  RngStream rng(8, 0);
  const auto c = sample_vertex_chain(rng, 1.0, 3.0, 0.1);
  const std::size_t j = c.segment_at(1.0);
  const double mid = 0.5 * (c.vertices[j] + c.vertices[j + 1]);
  const auto q = query_chain(c, mid);
  CHECK(q.G == c.vertices[j]);
  CHECK(q.D == c.vertices[j + 1]);
  CHECK(q.Kp == c.slopes[j]);
  const auto q2 = query_chain(c, 0.25 * c.vertices[j] + 0.75 * c.vertices[j + 1]);
  CHECK(q2.I == q.I);
  CHECK(q.K == doctest::Approx(q.I + mid * q.Kp).epsilon(1e-14));
  const auto at = query_chain(c, c.vertices[j]);
  CHECK(at.G == c.vertices[j]);
  CHECK(at.D == c.vertices[j + 1]);
  CHECK(at.K == c.levels[j]);
  CHECK_THROWS_AS(query_chain(c, c.vertices.back() + 1.0), HorizonError);
  CHECK_THROWS_AS(query_chain(c, -1.0), HorizonError);
}

TEST_CASE("sample_psi_given_x marginals") {
  RngStream rng(9, 0);
  const double z = 1.7;
  std::vector<double> y(100000);
  for (double& v : y) {
    const auto s = sample_psi_given_x(rng, 2.0, z);
    const double weight = s.a * 2.0 / z;
    REQUIRE(weight > 0.0);
    REQUIRE(weight < 1.0);
    REQUIRE(s.k + s.y == doctest::Approx(z).epsilon(1e-15));
    REQUIRE(s.w > 0.0);
    v = s.y;
  }
  CHECK(ks_one_sample(y, [z](double v) { const double u = v / z; return u * u * (3.0 - 2.0 * u); }).p_value > 0.01);
  CHECK_THROWS_AS(sample_psi_given_x(rng, 0.0, 1.0), ParameterError);
  CHECK_THROWS_AS(sample_psi_given_x(rng, 1.0, -1.0), ParameterError);
}

TEST_CASE("Psi given X(1) matches chains conditioned on X(1)") {
  // Each accepted chain's own X(1) is fed to the conditional sampler, so the
  // comparison is exact whatever the slab width.
  RngStream rng(10, 0);
  const auto c = slab(rng, 20000, 1.0, 1.3);
  Chains s;
  for (double x : c.x1) {
    const auto p = sample_psi_given_x(rng, 1.0, x);
    s.a.push_back(p.a);
    s.k.push_back(p.k);
    s.y.push_back(p.y);
    s.w.push_back(p.w);
  }
  CHECK(ks_two_sample(c.a, s.a).p_value > 0.01);
  CHECK(ks_two_sample(c.k, s.k).p_value > 0.01);
  CHECK(ks_two_sample(c.y, s.y).p_value > 0.01);
  CHECK(ks_two_sample(c.w, s.w).p_value > 0.01);
}

TEST_CASE("evolve_psi before the vertex pins the gap") {
  RngStream rng(11, 0);
  const PsiState s{0.5, 1.0, 1.0, 1.0};
  for (int rep = 0; rep < 100; ++rep) {
    const auto out = evolve_psi(rng, s, 1.0 - 1e-4, 1e-3);
    REQUIRE(out.y < 0.05);
    REQUIRE(out.a == 0.5);
    REQUIRE(out.k == doctest::Approx(1.0 + 0.5 * (1.0 - 1e-4)).epsilon(1e-15));
    REQUIRE(out.w == doctest::Approx(1e-4).epsilon(1e-9));
  }
  CHECK_THROWS_AS(evolve_psi(rng, s, 0.0, 1e-3), ParameterError);
  CHECK_THROWS_AS(evolve_psi(rng, PsiState{0.0, 1.0, 1.0, 0.1}, 1.0, 1e-3), ParameterError);
}

TEST_CASE("evolve_psi past the vertex: invariants and route agreement") {
  RngStream rng(12, 0);
  const PsiState s{0.8, 1.0, 0.3, 0.2};
  const std::size_t n = 8000;
  EvolveOptions chain_route;
  chain_route.route = PsiRoute::chain;
  std::vector<double> ha, hk, hy, hw, ca, ck, cy, cw;
  for (std::size_t i = 0; i < n; ++i) {
    const auto h = evolve_psi(rng, s, 1.0, 1e-3);
    REQUIRE(h.a > 0.0);
    REQUIRE(h.a <= s.a);
    REQUIRE(h.y >= 0.0);
    REQUIRE(h.w > 0.0);
    ha.push_back(h.a);
    hk.push_back(h.k);
    hy.push_back(h.y);
    hw.push_back(h.w);
    const auto c = evolve_psi(rng, s, 1.0, 1e-3, chain_route);
    REQUIRE(c.a < s.a);
    ca.push_back(c.a);
    ck.push_back(c.k);
    cy.push_back(c.y);
    cw.push_back(c.w);
  }
  CHECK(ks_two_sample(ha, ca).p_value > 0.01);
  CHECK(ks_two_sample(hk, ck).p_value > 0.01);
  CHECK(ks_two_sample(hy, cy).p_value > 0.01);
  CHECK(ks_two_sample(hw, cw).p_value > 0.01);
}

TEST_CASE("semigroup: Psi evolved from X(1) = z matches X(2) of conditioned chains") {
  RngStream rng(13, 0);
  const auto c = slab(rng, 8000, 1.0, 1.3);
  std::vector<double> hull, chain;
  EvolveOptions chain_route;
  chain_route.route = PsiRoute::chain;
  for (double x : c.x1) {
    const auto p = sample_psi_given_x(rng, 1.0, x);
    hull.push_back(evolve_psi(rng, p, 1.0, 1e-3).x());
    chain.push_back(evolve_psi(rng, p, 1.0, 1e-3, chain_route).x());
  }
  CHECK(ks_two_sample(c.x2, hull).p_value > 0.01);
  CHECK(ks_two_sample(c.x2, chain).p_value > 0.01);
}

TEST_CASE("literal BES(3, a) generator in the hull route") {
  // The generator (1/x + a) d/dx + 1/2 d^2/dx^2 is not the law of a - slope
  // Brownian motion kept below its line; record how far X(2) moves.
  RngStream rng(14, 0);
  const PsiState s{0.8, 1.0, 0.3, 0.2};
  EvolveOptions literal;
  literal.drift = BesDrift::generator_euler;
  const auto radial = testing::draw(2000, [&] { return evolve_psi(rng, s, 1.0, 1e-3).x(); });
  const auto euler = testing::draw(2000, [&] { return evolve_psi(rng, s, 1.0, 1e-3, literal).x(); });
  const auto r = ks_two_sample(radial, euler);
  MESSAGE("X after t = 1 from (0.8, 1, 0.3, 0.2): radial mean " << testing::mean(radial) << ", literal mean "
          << testing::mean(euler) << ", KS p " << r.p_value);
  CHECK(std::isfinite(r.statistic));
}
