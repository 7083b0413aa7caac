#pragma once

// Small-graph corpora: exhaustive enumeration of all uncolored graphs up to
// isomorphism for n <= 8, plus seeded random non-isomorphic pairs.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>
#include <utility>
#include <vector>

#include "wlnet/error.hpp"
#include "wlnet/generators.hpp"
#include "wlnet/graph.hpp"
#include "wlnet/random.hpp"

namespace wlnet {

inline constexpr std::size_t kCanonicalMaxVertices = 11;  // n(n-1)/2 <= 64 bits

namespace detail {

/// Bit layout of a canonical key: pair (i < j) occupies bit j(j-1)/2 + i.
inline std::size_t pair_bit(std::size_t i, std::size_t j) { return j * (j - 1) / 2 + i; }

/// Vertex invariant: stable color-refinement classes, numbered by sorted
/// signature so that the numbering itself is isomorphism-invariant.
inline std::vector<std::size_t> refinement_classes(const Graph& g) {
  const std::size_t n = g.n();
  std::vector<std::size_t> cls(n, 0);
  std::size_t count = 1;
  while (true) {
    std::vector<std::vector<std::size_t>> sig(n);
    for (std::size_t v = 0; v < n; ++v) {
      sig[v].push_back(cls[v]);
      std::vector<std::size_t> nb;
      for (std::size_t u = 0; u < n; ++u)
        if (g.adjacent(v, u)) nb.push_back(cls[u]);
      std::sort(nb.begin(), nb.end());
      sig[v].insert(sig[v].end(), nb.begin(), nb.end());
    }
    auto sorted = sig;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t v = 0; v < n; ++v)
      cls[v] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), sig[v]) - sorted.begin());
    if (sorted.size() == count) return cls;
    count = sorted.size();
  }
}

}  // namespace detail

/// Canonical form of an uncolored graph (n <= 11): the smallest adjacency key
/// over all relabelings that order vertices by refinement class. Two graphs
/// get the same key iff they are isomorphic. Exponential in the size of the
/// largest class; meant for small corpora.
inline std::uint64_t canonical_key(const Graph& g) {
  const std::size_t n = g.n();
  detail::require(n <= kCanonicalMaxVertices, "canonical_key supports at most 11 vertices");
  detail::require(g.color_width() == 0, "canonical_key supports uncolored graphs only");
  auto cls = detail::refinement_classes(g);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return cls[a] < cls[b]; });
  std::vector<std::pair<std::size_t, std::size_t>> cells;  // [begin, end) ranges in `order`
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && cls[order[j]] == cls[order[i]]) ++j;
    cells.emplace_back(i, j);
    i = j;
  }

  std::uint64_t best = UINT64_MAX;
  while (true) {
    std::uint64_t key = 0;
    for (std::size_t j = 1; j < n; ++j)
      for (std::size_t i = 0; i < j; ++i)
        if (g.adjacent(order[i], order[j])) key |= std::uint64_t{1} << detail::pair_bit(i, j);
    best = std::min(best, key);
    // Odometer over per-cell permutations.
    std::size_t c = 0;
    for (; c < cells.size(); ++c) {
      auto [b, e] = cells[c];
      if (std::next_permutation(order.begin() + b, order.begin() + e)) break;
    }
    if (c == cells.size()) break;
  }
  return best;
}

inline Graph graph_from_key(std::size_t n, std::uint64_t key) {
  std::vector<Edge> edges;
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i)
      if ((key >> detail::pair_bit(i, j)) & 1) edges.emplace_back(i, j);
  return Graph(n, edges);
}

inline bool isomorphic_brute_force(const Graph& a, const Graph& b) {
  return a.n() == b.n() && a.edge_count() == b.edge_count() && canonical_key(a) == canonical_key(b);
}

/// All uncolored graphs on exactly n vertices up to isomorphism (n <= 8),
/// in increasing canonical-key order. Built by extending every graph on n - 1
/// vertices with a new vertex in all possible ways and de-duplicating.
inline std::vector<Graph> enumerate_graphs(std::size_t n) {
  detail::require(n <= 8, "enumerate_graphs supports n <= 8");
  std::set<std::uint64_t> keys{0};  // the empty graph on 0 or 1 vertices
  for (std::size_t m = 2; m <= n; ++m) {
    std::set<std::uint64_t> next;
    for (auto base : keys) {
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (m - 1)); ++mask) {
        std::uint64_t key = base;
        for (std::size_t i = 0; i + 1 < m; ++i)
          if ((mask >> i) & 1) key |= std::uint64_t{1} << detail::pair_bit(i, m - 1);
        next.insert(canonical_key(graph_from_key(m, key)));
      }
    }
    keys = std::move(next);
  }
  std::vector<Graph> out;
  for (auto k : keys) out.push_back(graph_from_key(n, k));
  return out;
}

/// All graphs with 1 <= n <= n_max vertices up to isomorphism.
inline std::vector<Graph> enumerate_graphs_up_to(std::size_t n_max) {
  std::vector<Graph> out;
  for (std::size_t n = 1; n <= n_max; ++n) {
    auto level = enumerate_graphs(n);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

/// Index pairs (i < j) of graphs with equal vertex counts.
inline std::vector<std::pair<std::size_t, std::size_t>> same_size_pairs(const std::vector<Graph>& graphs) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < graphs.size(); ++i)
    for (std::size_t j = i + 1; j < graphs.size(); ++j)
      if (graphs[i].n() == graphs[j].n()) out.emplace_back(i, j);
  return out;
}

/// `count` seeded pairs of non-isomorphic G(n, p) graphs with n drawn
/// uniformly from [n_min, n_max] and p from [0.2, 0.8]; both graphs of a pair
/// share n, p and are never isomorphic.
inline std::vector<std::pair<Graph, Graph>> random_graph_pairs(std::size_t count, std::size_t n_min,
                                                               std::size_t n_max, std::uint64_t seed) {
  detail::require(n_min >= 2 && n_min <= n_max && n_max <= kCanonicalMaxVertices,
                  "random_graph_pairs: need 2 <= n_min <= n_max <= 11");
  Rng rng(seed);
  std::vector<std::pair<Graph, Graph>> out;
  while (out.size() < count) {
    const std::size_t n = n_min + uniform_index(rng, n_max - n_min + 1);
    const double p = uniform(rng, 0.2, 0.8);
    auto a = random_gnp(n, p, rng());
    auto b = random_gnp(n, p, rng());
    if (canonical_key(a) == canonical_key(b)) continue;
    out.emplace_back(std::move(a), std::move(b));
  }
  return out;
}

}  // namespace wlnet
