#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wlnet/error.hpp"
#include "wlnet/graph.hpp"
#include "wlnet/random.hpp"

namespace wlnet {

/// Cycle C_m on vertices 0..m-1.
inline Graph cycle(std::size_t m) {
  detail::require(m >= 3, "cycle: m must be at least 3");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < m; ++i) edges.emplace_back(i, (i + 1) % m);
  return Graph(m, edges);
}

inline Graph path(std::size_t m) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < m; ++i) edges.emplace_back(i, i + 1);
  return Graph(m, edges);
}

inline Graph complete(std::size_t m) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) edges.emplace_back(i, j);
  return Graph(m, edges);
}

inline Graph empty_graph(std::size_t m) { return Graph(m, std::span<const Edge>{}); }

/// K_{1,leaves}; vertex 0 is the center.
inline Graph star(std::size_t leaves) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
  return Graph(leaves + 1, edges);
}

/// Vertices of `b` follow those of `a`. Color widths must agree unless one
/// side has no vertices.
inline Graph disjoint_union(const Graph& a, const Graph& b) {
  std::size_t width = a.color_width();
  if (a.n() == 0) width = b.color_width();
  else detail::require(b.n() == 0 || b.color_width() == width, "disjoint_union: color widths differ");
  std::vector<Edge> edges = a.edges();
  for (auto [u, v] : b.edges()) edges.emplace_back(u + a.n(), v + a.n());
  std::vector<double> colors;
  if (width > 0) {
    colors = a.colors();
    colors.insert(colors.end(), b.colors().begin(), b.colors().end());
  }
  return Graph(a.n() + b.n(), edges, std::move(colors), width);
}

/// Erdős–Rényi G(n, p). Pairs (i < j) are visited in row-major order and each
/// takes one std::mt19937_64 draw: the edge exists iff (draw >> 11) * 2^-53 < p.
inline Graph random_gnp(std::size_t n, double p, std::uint64_t seed) {
  detail::require(p >= 0.0 && p <= 1.0, "random_gnp: p must lie in [0, 1]");
  Rng rng(seed);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (uniform01(rng) < p) edges.emplace_back(i, j);
  return Graph(n, edges);
}

/// 4x4 rook's graph: cell (r, c) is vertex 4r + c; cells sharing a row or a
/// column are adjacent. SRG(16, 6, 2, 2).
inline Graph rook_4x4() {
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < 16; ++u)
    for (std::size_t v = u + 1; v < 16; ++v)
      if (u / 4 == v / 4 || u % 4 == v % 4) edges.emplace_back(u, v);
  return Graph(16, edges);
}

/// Shrikhande graph: Cayley graph on Z4 x Z4 with connection set
/// {±(1,0), ±(0,1), ±(1,1)}; (a, b) is vertex 4a + b. SRG(16, 6, 2, 2).
inline Graph shrikhande() {
  auto connected = [](std::size_t da, std::size_t db) {
    return (da == 0 && (db == 1 || db == 3)) || (db == 0 && (da == 1 || da == 3)) ||
           (da == db && (da == 1 || da == 3));
  };
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < 16; ++u)
    for (std::size_t v = u + 1; v < 16; ++v) {
      const std::size_t da = (v / 4 + 4 - u / 4) % 4, db = (v % 4 + 4 - u % 4) % 4;
      if (connected(da, db)) edges.emplace_back(u, v);
    }
  return Graph(16, edges);
}

}  // namespace wlnet
