#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "wlnet/error.hpp"
#include "wlnet/random.hpp"

namespace wlnet {

using Edge = std::pair<std::size_t, std::size_t>;

/// Simple undirected graph with an optional real feature vector per vertex.
///
/// Vertices are 0-based. `color_width() == 0` means the graph is uncolored,
/// which every algorithm treats as a single uniform color. Instances are
/// immutable once built.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph on `n` vertices. `colors` is row-major n x width and must
  /// be empty when width is 0. Rejects self-loops, duplicate edges and
  /// out-of-range endpoints.
  Graph(std::size_t n, std::span<const Edge> edges, std::vector<double> colors = {},
        std::size_t color_width = 0)
      : n_(n), width_(color_width), adjacency_(n * n, 0), colors_(std::move(colors)) {
    detail::require(colors_.size() == n_ * width_, "color matrix must have n rows of equal width");
    for (auto [u, v] : edges) {
      detail::require(u < n_ && v < n_, "edge endpoint out of range");
      detail::require(u != v, "self-loops are not allowed");
      detail::require(!adjacency_[u * n_ + v], "duplicate edge");
      adjacency_[u * n_ + v] = 1;
      adjacency_[v * n_ + u] = 1;
    }
  }

  Graph(std::size_t n, std::initializer_list<Edge> edges)
      : Graph(n, std::span<const Edge>(edges.begin(), edges.size())) {}

  /// Builds from a dense symmetric 0/1 matrix (row-major, n*n entries).
  static Graph from_adjacency(std::size_t n, std::span<const std::uint8_t> adjacency,
                              std::vector<double> colors = {}, std::size_t color_width = 0) {
    detail::require(adjacency.size() == n * n, "adjacency must have n*n entries");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
      detail::require(!adjacency[i * n + i], "self-loops are not allowed");
      for (std::size_t j = i + 1; j < n; ++j) {
        detail::require(bool(adjacency[i * n + j]) == bool(adjacency[j * n + i]),
                        "adjacency must be symmetric");
        if (adjacency[i * n + j]) edges.emplace_back(i, j);
      }
    }
    return Graph(n, edges, std::move(colors), color_width);
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t color_width() const noexcept { return width_; }

  bool adjacent(std::size_t u, std::size_t v) const { return adjacency_[u * n_ + v] != 0; }

  std::span<const double> color(std::size_t v) const {
    return {colors_.data() + v * width_, width_};
  }
  const std::vector<double>& colors() const noexcept { return colors_; }
  const std::vector<std::uint8_t>& adjacency() const noexcept { return adjacency_; }

  std::size_t degree(std::size_t v) const {
    std::size_t d = 0;
    for (std::size_t u = 0; u < n_; ++u) d += adjacency_[v * n_ + u];
    return d;
  }

  /// Edges as (u, v) with u < v, in row-major order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        if (adjacent(i, j)) out.emplace_back(i, j);
    return out;
  }

  std::size_t edge_count() const {
    std::size_t m = 0;
    for (auto a : adjacency_) m += a;
    return m / 2;
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> adjacency_;
  std::vector<double> colors_;
};

/// A bijection on {0, ..., n-1}; `(*this)(i)` is the image of i.
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<std::size_t> mapping) : map_(std::move(mapping)) {
    std::vector<bool> seen(map_.size(), false);
    for (auto v : map_) {
      detail::require(v < map_.size() && !seen[v], "permutation must be a bijection");
      seen[v] = true;
    }
  }

  static Permutation identity(std::size_t n) {
    std::vector<std::size_t> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = i;
    return Permutation(std::move(m));
  }

  static Permutation random(std::size_t n, Rng& rng) {
    auto p = identity(n);
    shuffle(p.map_, rng);
    return p;
  }

  std::size_t size() const noexcept { return map_.size(); }
  std::size_t operator()(std::size_t i) const { return map_[i]; }
  const std::vector<std::size_t>& mapping() const noexcept { return map_; }

  Permutation inverse() const {
    std::vector<std::size_t> inv(map_.size());
    for (std::size_t i = 0; i < map_.size(); ++i) inv[map_[i]] = i;
    return Permutation(std::move(inv));
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> map_;
};

/// (a ∘ b)(i) = a(b(i)).
inline Permutation compose(const Permutation& a, const Permutation& b) {
  detail::require(a.size() == b.size(), "permutation sizes differ");
  std::vector<std::size_t> m(a.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = a(b(i));
  return Permutation(std::move(m));
}

/// g·G: vertex v of G becomes vertex g(v).
inline Graph permute_graph(const Graph& g_in, const Permutation& g) {
  const std::size_t n = g_in.n();
  detail::require(g.size() == n, "permutation size must equal vertex count");
  std::vector<Edge> edges;
  for (auto [u, v] : g_in.edges()) edges.emplace_back(g(u), g(v));
  const std::size_t w = g_in.color_width();
  std::vector<double> colors(n * w);
  for (std::size_t v = 0; v < n; ++v)
    std::copy_n(g_in.color(v).begin(), w, colors.begin() + g(v) * w);
  return Graph(n, edges, std::move(colors), w);
}

/// tr(A^3) by cubing the dense adjacency matrix in integer arithmetic.
inline std::int64_t trace_adjacency_cubed(const Graph& g) {
  const std::size_t n = g.n();
  std::vector<std::int64_t> sq(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (g.adjacent(i, k))
        for (std::size_t j = 0; j < n; ++j) sq[i * n + j] += g.adjacent(k, j);
  std::int64_t tr = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (g.adjacent(k, i)) tr += sq[i * n + k];
  return tr;
}

}  // namespace wlnet
