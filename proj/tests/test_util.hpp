#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wlnet/graph.hpp"
#include "wlnet/random.hpp"

namespace wlnet::testing {

/// Random graph with n vertices and `width` integer-valued colors in [0, levels).
inline Graph random_colored_graph(std::size_t n, double p, std::size_t width, int levels, Rng& rng) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (uniform01(rng) < p) edges.emplace_back(i, j);
  std::vector<double> colors(n * width);
  for (auto& c : colors) c = static_cast<double>(uniform_index(rng, static_cast<std::uint64_t>(levels)));
  return Graph(n, edges, std::move(colors), width);
}

/// Brute-force common-neighbour count.
inline std::size_t common_neighbours(const Graph& g, std::size_t u, std::size_t v) {
  std::size_t c = 0;
  for (std::size_t w = 0; w < g.n(); ++w) c += g.adjacent(u, w) && g.adjacent(v, w);
  return c;
}

/// Brute-force triangle count over all vertex triples.
inline std::size_t count_triangles(const Graph& g) {
  std::size_t t = 0;
  for (std::size_t a = 0; a < g.n(); ++a)
    for (std::size_t b = a + 1; b < g.n(); ++b)
      for (std::size_t c = b + 1; c < g.n(); ++c)
        t += g.adjacent(a, b) && g.adjacent(b, c) && g.adjacent(a, c);
  return t;
}

}  // namespace wlnet::testing
