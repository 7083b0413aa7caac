#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "wlnet/error.hpp"
#include "wlnet/graph.hpp"

namespace wlnet {

/// n x n x c real tensor, row-major over (i1, i2, channel):
/// element (i1, i2, ch) lives at data[(i1 * n + i2) * c + ch].
class DenseTensor3 {
 public:
  DenseTensor3() = default;
  DenseTensor3(std::size_t n, std::size_t channels, double fill = 0.0)
      : n_(n), c_(channels), data_(n * n * channels, fill) {}
  DenseTensor3(std::size_t n, std::size_t channels, std::vector<double> data)
      : n_(n), c_(channels), data_(std::move(data)) {
    detail::require(data_.size() == n_ * n_ * c_, "tensor data must have n*n*c entries");
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t channels() const noexcept { return c_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i1, std::size_t i2, std::size_t ch) {
    return data_[(i1 * n_ + i2) * c_ + ch];
  }
  double operator()(std::size_t i1, std::size_t i2, std::size_t ch) const {
    return data_[(i1 * n_ + i2) * c_ + ch];
  }

  /// Feature vector at position (i1, i2).
  std::span<double> at(std::size_t i1, std::size_t i2) { return {data_.data() + (i1 * n_ + i2) * c_, c_}; }
  std::span<const double> at(std::size_t i1, std::size_t i2) const {
    return {data_.data() + (i1 * n_ + i2) * c_, c_};
  }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const DenseTensor3&, const DenseTensor3&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t c_ = 0;
  std::vector<double> data_;
};

/// g·T: entry (i1, i2) moves to (g(i1), g(i2)).
inline DenseTensor3 permute_tensor(const DenseTensor3& t, const Permutation& g) {
  detail::require(g.size() == t.n(), "permutation size must equal tensor side");
  DenseTensor3 out(t.n(), t.channels());
  for (std::size_t i = 0; i < t.n(); ++i)
    for (std::size_t j = 0; j < t.n(); ++j) {
      auto src = t.at(i, j);
      std::copy(src.begin(), src.end(), out.at(g(i), g(j)).begin());
    }
  return out;
}

/// Channel-wise concatenation of tensors with equal side length.
inline DenseTensor3 concat_channels(std::span<const DenseTensor3* const> parts) {
  detail::require(!parts.empty(), "concat needs at least one tensor");
  const std::size_t n = parts.front()->n();
  std::size_t c = 0;
  for (auto* p : parts) {
    detail::require(p->n() == n, "concat: side lengths differ");
    c += p->channels();
  }
  DenseTensor3 out(n, c);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      auto dst = out.at(i, j).begin();
      for (auto* p : parts) dst = std::copy(p->at(i, j).begin(), p->at(i, j).end(), dst);
    }
  return out;
}

inline DenseTensor3 concat_channels(const DenseTensor3& a, const DenseTensor3& b) {
  const DenseTensor3* parts[] = {&a, &b};
  return concat_channels(parts);
}

/// Largest |a - b| over all entries; shapes must match.
inline double max_abs_diff(const DenseTensor3& a, const DenseTensor3& b) {
  detail::require(a.n() == b.n() && a.channels() == b.channels(), "shape mismatch");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

/// Channels 0..e-1 carry vertex colors on the diagonal, channel e the adjacency.
inline DenseTensor3 graph_to_tensor(const Graph& g) {
  const std::size_t n = g.n(), e = g.color_width();
  DenseTensor3 t(n, e + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < e; ++c) t(i, i, c) = g.color(i)[c];
    for (std::size_t j = 0; j < n; ++j) t(i, j, e) = g.adjacent(i, j) ? 1.0 : 0.0;
  }
  return t;
}

/// graph_to_tensor plus a trailing identity-matrix channel (e + 2 channels).
inline DenseTensor3 graph_to_fwl_tensor(const Graph& g) {
  const std::size_t n = g.n(), e = g.color_width();
  DenseTensor3 t(n, e + 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < e; ++c) t(i, i, c) = g.color(i)[c];
    for (std::size_t j = 0; j < n; ++j) t(i, j, e) = g.adjacent(i, j) ? 1.0 : 0.0;
    t(i, i, e + 1) = 1.0;
  }
  return t;
}

/// Colors every 2-tuple by its isomorphism type using only matrix products.
///
/// Input: a graph_to_fwl_tensor layout with e + 2 channels. For e >= 1 the
/// output has 4e + 1 channels: for each color channel j the four products
/// A·Y_j, (11ᵀ-A)·Y_j, Y_j·A, Y_j·(11ᵀ-A) (Y_j = diagonal color matrix), then
/// the identity channel. For e = 0 the output is (A, 11ᵀ-A-I, I).
inline DenseTensor3 fwl_initial_colors(const DenseTensor3& t) {
  detail::require(t.channels() >= 2, "fwl_initial_colors: expected e + 2 >= 2 channels");
  const std::size_t n = t.n(), e = t.channels() - 2;
  const std::size_t adj = e, ident = e + 1;

  if (e == 0) {
    DenseTensor3 out(n, 3);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double a = t(i, j, adj), id = t(i, j, ident);
        out(i, j, 0) = a;
        out(i, j, 1) = 1.0 - a - id;
        out(i, j, 2) = id;
      }
    return out;
  }

  // Plain dense product of two channel slices: (X·Y)[i][j].
  auto product = [n](auto&& x, auto&& y, std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t k = 0; k < n; ++k) s += x(i, k) * y(k, j);
    return s;
  };
  auto a = [&](std::size_t i, std::size_t j) { return t(i, j, adj); };
  auto complement = [&](std::size_t i, std::size_t j) { return 1.0 - t(i, j, adj); };

  DenseTensor3 out(n, 4 * e + 1);
  for (std::size_t c = 0; c < e; ++c) {
    auto y = [&, c](std::size_t i, std::size_t j) { return t(i, j, c); };
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        out(i, j, 4 * c + 0) = product(a, y, i, j);
        out(i, j, 4 * c + 1) = product(complement, y, i, j);
        out(i, j, 4 * c + 2) = product(y, a, i, j);
        out(i, j, 4 * c + 3) = product(y, complement, i, j);
      }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j, 4 * e) = t(i, j, ident);
  return out;
}

}  // namespace wlnet
