#pragma once

// Exact multiset encoding by power-sum multi-symmetric polynomials.
//
// For X with n rows in R^a, u(X) lists p_alpha(X) = sum_i prod_j X[i][j]^alpha_j
// for every multi-index |alpha| <= n in graded-lexicographic order: by total
// degree, then by decreasing first exponent, then second, and so on. Two
// matrices have equal u iff their rows form the same multiset.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "wlnet/error.hpp"
#include "wlnet/tensor.hpp"

namespace wlnet {

using Rational = boost::multiprecision::cpp_rational;

/// Largest multi-index list / u-vector length accepted.
inline constexpr std::size_t kMaxMultiIndices = 200000;
/// Largest row count accepted by u_vector (its degree bound equals the row count).
inline constexpr std::size_t kMaxPmpRows = 8;

struct MultiIndex {
  std::vector<unsigned> exponents;

  std::size_t width() const noexcept { return exponents.size(); }
  unsigned degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0u); }
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// C(n, r) with overflow detection (saturates to SIZE_MAX).
inline std::size_t binomial(std::size_t n, std::size_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  std::size_t out = 1;
  for (std::size_t i = 1; i <= r; ++i) {
    const std::size_t num = n - r + i;
    // out * num is divisible by i; divide by gcd first to delay overflow.
    const std::size_t g = std::gcd(out, i);
    const std::size_t o = out / g, d = i / g;
    if (o > std::numeric_limits<std::size_t>::max() / num) return std::numeric_limits<std::size_t>::max();
    out = o * (num / d);
  }
  return out;
}

namespace detail {

inline void append_degree(std::vector<MultiIndex>& out, std::vector<unsigned>& cur, std::size_t pos, unsigned left) {
  if (pos + 1 == cur.size()) {
    cur[pos] = left;
    out.push_back(MultiIndex{cur});
    return;
  }
  for (unsigned e = left + 1; e-- > 0;) {
    cur[pos] = e;
    append_degree(out, cur, pos + 1, left - e);
  }
}

}  // namespace detail

/// All alpha in N^a with |alpha| <= max_degree, graded-lex order.
/// Count is C(max_degree + a, a).
inline std::vector<MultiIndex> enumerate_multi_indices(std::size_t a, std::size_t max_degree) {
  detail::require(a >= 1, "multi-index width must be at least 1");
  const std::size_t count = binomial(max_degree + a, a);
  detail::require(count <= kMaxMultiIndices, "multi-index count " + std::to_string(count) + " exceeds the limit of " +
                                                 std::to_string(kMaxMultiIndices));
  std::vector<MultiIndex> out;
  out.reserve(count);
  std::vector<unsigned> cur(a);
  for (unsigned d = 0; d <= max_degree; ++d) detail::append_degree(out, cur, 0, d);
  return out;
}

/// Dense exact matrix; rows are multiset elements.
class ExactMatrix {
 public:
  ExactMatrix() = default;
  ExactMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  ExactMatrix(std::size_t rows, std::size_t cols, std::vector<Rational> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    detail::require(data_.size() == rows_ * cols_, "matrix data must have rows*cols entries");
  }
  /// Convenience for integer literals: {{1, 2}, {3, 4}}.
  ExactMatrix(std::initializer_list<std::initializer_list<long>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    for (const auto& r : rows) {
      detail::require(r.size() == cols_, "ragged matrix literal");
      for (long x : r) data_.emplace_back(x);
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<Rational> row(std::size_t r) const {
    return {data_.begin() + r * cols_, data_.begin() + (r + 1) * cols_};
  }

  friend bool operator==(const ExactMatrix&, const ExactMatrix&) = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Rational> data_;
};

inline Rational rational_pow(const Rational& x, unsigned e) {
  Rational r = 1;
  for (unsigned i = 0; i < e; ++i) r *= x;
  return r;
}

/// p_alpha(X) = sum_i prod_j X[i][j]^alpha_j.
inline Rational pmp(const ExactMatrix& x, const MultiIndex& alpha) {
  detail::require(alpha.width() == x.cols(), "pmp: multi-index width must equal the column count");
  Rational sum = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    Rational term = 1;
    for (std::size_t j = 0; j < x.cols() && term != 0; ++j) term *= rational_pow(x(i, j), alpha.exponents[j]);
    sum += term;
  }
  return sum;
}

using PmpVector = std::vector<Rational>;

/// u(X): p_alpha(X) for every |alpha| <= rows(X), graded-lex order.
inline PmpVector u_vector(const ExactMatrix& x) {
  detail::require(x.rows() <= kMaxPmpRows, "u_vector supports at most 8 rows");
  detail::require(x.cols() >= 1, "u_vector needs at least one column");
  const auto alphas = enumerate_multi_indices(x.cols(), x.rows());
  const std::size_t n = x.rows(), a = x.cols();
  // powers[(i * a + j) * (n + 1) + d] = X[i][j]^d
  std::vector<Rational> powers(n * a * (n + 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < a; ++j) {
      Rational* p = &powers[(i * a + j) * (n + 1)];
      p[0] = 1;
      for (std::size_t d = 1; d <= n; ++d) p[d] = p[d - 1] * x(i, j);
    }
  PmpVector out;
  out.reserve(alphas.size());
  for (const auto& alpha : alphas) {
    Rational sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Rational term = 1;
      for (std::size_t j = 0; j < a; ++j)
        if (alpha.exponents[j]) term *= powers[(i * a + j) * (n + 1) + alpha.exponents[j]];
      sum += term;
    }
    out.push_back(std::move(sum));
  }
  return out;
}

/// Brute-force multiset equality: sorted row lists are equal.
inline bool multiset_equal_oracle(const ExactMatrix& x, const ExactMatrix& y) {
  detail::require(x.rows() == y.rows() && x.cols() == y.cols(), "multiset_equal_oracle: shape mismatch");
  auto sorted_rows = [](const ExactMatrix& m) {
    std::vector<std::vector<Rational>> rows;
    for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(m.row(r));
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  return sorted_rows(x) == sorted_rows(y);
}

/// Every alpha in N^(2a) with |alpha| <= n, split into (first a, last a)
/// exponents; same order as enumerate_multi_indices(2a, n).
inline std::vector<std::pair<MultiIndex, MultiIndex>> split_multi_indices(std::size_t a, std::size_t n) {
  std::vector<std::pair<MultiIndex, MultiIndex>> out;
  for (const auto& alpha : enumerate_multi_indices(2 * a, n)) {
    MultiIndex beta{{alpha.exponents.begin(), alpha.exponents.begin() + a}};
    MultiIndex gamma{{alpha.exponents.begin() + a, alpha.exponents.end()}};
    out.emplace_back(std::move(beta), std::move(gamma));
  }
  return out;
}

/// n x n x c exact tensor, same layout as DenseTensor3.
class ExactTensor3 {
 public:
  ExactTensor3() = default;
  ExactTensor3(std::size_t n, std::size_t channels) : n_(n), c_(channels), data_(n * n * channels) {}

  /// Exact copy of a floating-point tensor (every double is a rational).
  static ExactTensor3 from_dense(const DenseTensor3& t) {
    ExactTensor3 out(t.n(), t.channels());
    for (std::size_t i = 0; i < t.size(); ++i) out.data_[i] = Rational(t.data()[i]);
    return out;
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t channels() const noexcept { return c_; }
  Rational& operator()(std::size_t i1, std::size_t i2, std::size_t ch) { return data_[(i1 * n_ + i2) * c_ + ch]; }
  const Rational& operator()(std::size_t i1, std::size_t i2, std::size_t ch) const {
    return data_[(i1 * n_ + i2) * c_ + ch];
  }

  friend bool operator==(const ExactTensor3&, const ExactTensor3&) = default;

 private:
  std::size_t n_ = 0, c_ = 0;
  std::vector<Rational> data_;
};

/// Applies x -> (x^{m_l} | l) at every position (the polynomial map tau).
inline ExactTensor3 monomial_features(const ExactTensor3& b, const std::vector<MultiIndex>& monomials) {
  ExactTensor3 out(b.n(), monomials.size());
  for (std::size_t i = 0; i < b.n(); ++i)
    for (std::size_t j = 0; j < b.n(); ++j)
      for (std::size_t l = 0; l < monomials.size(); ++l) {
        Rational v = 1;
        for (std::size_t c = 0; c < b.channels() && v != 0; ++c)
          v *= rational_pow(b(i, j, c), monomials[l].exponents[c]);
        out(i, j, l) = std::move(v);
      }
  return out;
}

/// The (tau_1, tau_2) monomial lists: tau_1 uses the beta halves, tau_2 the gamma halves.
inline std::pair<std::vector<MultiIndex>, std::vector<MultiIndex>> fwl_monomials(std::size_t a, std::size_t n) {
  std::pair<std::vector<MultiIndex>, std::vector<MultiIndex>> out;
  for (auto& [beta, gamma] : split_multi_indices(a, n)) {
    out.first.push_back(std::move(beta));
    out.second.push_back(std::move(gamma));
  }
  return out;
}

/// Per-channel exact matrix product W[:, :, l] = Z[:, :, l] · Y[:, :, l].
inline ExactTensor3 exact_feature_matmul(const ExactTensor3& z, const ExactTensor3& y) {
  detail::require(z.n() == y.n() && z.channels() == y.channels(), "exact_feature_matmul: shape mismatch");
  const std::size_t n = z.n(), c = z.channels();
  ExactTensor3 w(n, c);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < c; ++l)
          if (z(i, k, l) != 0) w(i, j, l) += z(i, k, l) * y(k, j, l);
  return w;
}

/// Multiset of the 2-FWL neighborhood at every position, computed with one
/// matrix product per channel: Y = tau_1(B), Z = tau_2(B), W_l = Z_l · Y_l.
/// W[i1, i2, :] equals u(X) with X rows (B[j, i2, :], B[i1, j, :]), j in [n].
inline ExactTensor3 fwl_multiset_via_matmul(const ExactTensor3& b) {
  detail::require(b.n() <= kMaxPmpRows, "fwl_multiset_via_matmul supports n <= 8");
  const auto [tau1, tau2] = fwl_monomials(b.channels(), b.n());
  return exact_feature_matmul(monomial_features(b, tau2), monomial_features(b, tau1));
}

/// The matrix X with rows (B[j, i2, :], B[i1, j, :]) for j in [n].
inline ExactMatrix fwl_neighborhood_matrix(const ExactTensor3& b, std::size_t i1, std::size_t i2) {
  const std::size_t n = b.n(), a = b.channels();
  ExactMatrix x(n, 2 * a);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t c = 0; c < a; ++c) {
      x(j, c) = b(j, i2, c);
      x(j, a + c) = b(i1, j, c);
    }
  return x;
}

/// Same result as fwl_multiset_via_matmul, computed position by position
/// with u_vector.
inline ExactTensor3 fwl_multiset_direct(const ExactTensor3& b) {
  const std::size_t n = b.n();
  const std::size_t len = binomial(n + 2 * b.channels(), 2 * b.channels());
  ExactTensor3 w(n, len);
  for (std::size_t i1 = 0; i1 < n; ++i1)
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      auto u = u_vector(fwl_neighborhood_matrix(b, i1, i2));
      for (std::size_t l = 0; l < len; ++l) w(i1, i2, l) = std::move(u[l]);
    }
  return w;
}

inline ExactTensor3 permute_tensor(const ExactTensor3& t, const Permutation& g) {
  detail::require(g.size() == t.n(), "permutation size must equal tensor side");
  ExactTensor3 out(t.n(), t.channels());
  for (std::size_t i = 0; i < t.n(); ++i)
    for (std::size_t j = 0; j < t.n(); ++j)
      for (std::size_t c = 0; c < t.channels(); ++c) out(g(i), g(j), c) = t(i, j, c);
  return out;
}

/// Debug dump: array of decimal strings ("p" or "p/q").
inline nlohmann::json to_json(const PmpVector& u) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : u) out.push_back(v.str());
  return out;
}

}  // namespace wlnet
