#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "wlnet/error.hpp"
#include "wlnet/parallel.hpp"
#include "wlnet/random.hpp"
#include "wlnet/tensor.hpp"

namespace wlnet {

enum class Activation { ReLU, Identity };
enum class Pool { Max, Sum };

/// Fully connected stack. Layer l maps layer_in(l) -> layer_out(l) as
/// act_l(W x + b); depth is the number of weight matrices.
/// Parameter layout per layer: W (out x in, row-major) then b (out).
struct MLPSpec {
  std::size_t input_width = 0;
  std::vector<std::size_t> hidden_widths;
  std::size_t output_width = 0;
  std::vector<Activation> activations;  // one per layer

  /// ReLU on hidden layers, `last` on the output layer.
  static MLPSpec make(std::size_t in, std::vector<std::size_t> hidden, std::size_t out,
                      Activation last = Activation::Identity) {
    MLPSpec m{in, std::move(hidden), out, {}};
    m.activations.assign(m.hidden_widths.size(), Activation::ReLU);
    m.activations.push_back(last);
    return m;
  }

  std::size_t depth() const noexcept { return hidden_widths.size() + 1; }
  std::size_t layer_in(std::size_t l) const { return l == 0 ? input_width : hidden_widths[l - 1]; }
  std::size_t layer_out(std::size_t l) const { return l + 1 == depth() ? output_width : hidden_widths[l]; }

  std::size_t parameter_count() const {
    std::size_t total = 0;
    for (std::size_t l = 0; l < depth(); ++l) total += (layer_in(l) + 1) * layer_out(l);
    return total;
  }

  void validate() const {
    detail::require(input_width >= 1 && output_width >= 1, "MLP widths must be >= 1");
    for (auto w : hidden_widths) detail::require(w >= 1, "MLP widths must be >= 1");
    detail::require(activations.size() == depth(), "MLP needs one activation per layer");
  }

  friend bool operator==(const MLPSpec&, const MLPSpec&) = default;
};

/// One network block: (m3(T), m1(T)·m2(T)) per channel, then m4 if present.
/// m3 == nullopt is the identity. With matmul == false the block is the
/// feature-wise baseline: W = m1(T) and m2 must be absent.
struct BlockSpec {
  MLPSpec m1;
  std::optional<MLPSpec> m2;
  std::optional<MLPSpec> m3;
  std::optional<MLPSpec> m4;
  bool matmul = true;

  std::size_t input_width() const { return m1.input_width; }
  std::size_t skip_width() const { return m3 ? m3->output_width : m1.input_width; }
  std::size_t output_width() const { return m4 ? m4->output_width : skip_width() + m1.output_width; }

  void validate() const {
    m1.validate();
    if (matmul) {
      detail::require(m2.has_value(), "matmul block needs m2");
      m2->validate();
      detail::require(m2->input_width == m1.input_width, "m1 and m2 must read the same input width");
      detail::require(m2->output_width == m1.output_width, "m1 and m2 output widths differ");
    } else {
      detail::require(!m2.has_value(), "feature-wise block has no m2");
    }
    if (m3) {
      m3->validate();
      detail::require(m3->input_width == m1.input_width, "m3 input width differs from m1");
    }
    if (m4) {
      m4->validate();
      detail::require(m4->input_width == skip_width() + m1.output_width, "m4 input width must be b' + b");
    }
  }

  friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

/// Pool after the last block, then an MLP to output_dim.
struct SuffixI {
  MLPSpec fc;
  friend bool operator==(const SuffixI&, const SuffixI&) = default;
};

/// Pool after every block, one single-layer FC per block, outputs summed.
struct SuffixII {
  std::vector<MLPSpec> per_block;
  friend bool operator==(const SuffixII&, const SuffixII&) = default;
};

struct ModelSpec {
  std::size_t input_channels = 0;
  std::vector<BlockSpec> blocks;
  std::variant<SuffixI, SuffixII> head;
  std::size_t output_dim = 1;
  Pool pool = Pool::Max;

  void validate() const {
    detail::require(input_channels >= 1, "model needs >= 1 input channel");
    detail::require(!blocks.empty(), "model needs at least one block");
    detail::require(output_dim >= 1, "output_dim must be >= 1");
    std::size_t c = input_channels;
    for (const auto& b : blocks) {
      b.validate();
      detail::require(b.input_width() == c, "block input width does not match previous output");
      c = b.output_width();
    }
    if (auto* h = std::get_if<SuffixI>(&head)) {
      h->fc.validate();
      detail::require(h->fc.input_width == 2 * c, "suffix I input must be 2 x last block width");
      detail::require(h->fc.output_width == output_dim, "suffix I output must equal output_dim");
    } else {
      const auto& h2 = std::get<SuffixII>(head);
      detail::require(h2.per_block.size() == blocks.size(), "suffix II needs one FC per block");
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& fc = h2.per_block[i];
        fc.validate();
        detail::require(fc.depth() == 1, "suffix II FC layers are single-layer");
        detail::require(fc.input_width == 2 * blocks[i].output_width(), "suffix II FC input must be 2 x block width");
        detail::require(fc.output_width == output_dim, "suffix II FC output must equal output_dim");
      }
    }
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Where each MLP lives inside the flat parameter vector. MLPs are laid out
/// block by block (m1, m2, m3, m4, absent ones skipped), then the head.
struct ParamLayout {
  struct BlockSlots {
    std::size_t m1 = 0;
    std::optional<std::size_t> m2, m3, m4;
  };
  std::vector<BlockSlots> blocks;
  std::vector<std::size_t> head;  // SuffixI: one entry; SuffixII: one per block
  std::size_t total = 0;
};

inline ParamLayout param_layout(const ModelSpec& spec) {
  spec.validate();
  ParamLayout out;
  std::size_t at = 0;
  auto place = [&at](const MLPSpec& m) {
    const std::size_t o = at;
    at += m.parameter_count();
    return o;
  };
  for (const auto& b : spec.blocks) {
    ParamLayout::BlockSlots s;
    s.m1 = place(b.m1);
    if (b.m2) s.m2 = place(*b.m2);
    if (b.m3) s.m3 = place(*b.m3);
    if (b.m4) s.m4 = place(*b.m4);
    out.blocks.push_back(s);
  }
  if (auto* h = std::get_if<SuffixI>(&spec.head)) {
    out.head.push_back(place(h->fc));
  } else {
    for (const auto& fc : std::get<SuffixII>(spec.head).per_block) out.head.push_back(place(fc));
  }
  out.total = at;
  return out;
}

inline std::size_t parameter_count(const ModelSpec& spec) { return param_layout(spec).total; }

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases alike.
inline std::vector<double> init_params(const ModelSpec& spec, std::uint64_t seed) {
  const auto layout = param_layout(spec);
  std::vector<double> p(layout.total);
  Rng rng(seed);
  auto fill = [&](const MLPSpec& m, std::size_t off) {
    for (std::size_t l = 0; l < m.depth(); ++l) {
      const std::size_t in = m.layer_in(l), cnt = (in + 1) * m.layer_out(l);
      const double s = 1.0 / std::sqrt(static_cast<double>(in));
      for (std::size_t i = 0; i < cnt; ++i) p[off + i] = uniform(rng, -s, s);
      off += cnt;
    }
  };
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    const auto& b = spec.blocks[i];
    const auto& s = layout.blocks[i];
    fill(b.m1, s.m1);
    if (b.m2) fill(*b.m2, *s.m2);
    if (b.m3) fill(*b.m3, *s.m3);
    if (b.m4) fill(*b.m4, *s.m4);
  }
  if (auto* h = std::get_if<SuffixI>(&spec.head)) {
    fill(h->fc, layout.head[0]);
  } else {
    const auto& fcs = std::get<SuffixII>(spec.head).per_block;
    for (std::size_t i = 0; i < fcs.size(); ++i) fill(fcs[i], layout.head[i]);
  }
  return p;
}

namespace detail {

/// out[r] = act(W x_r + b) for `rows` consecutive input rows of width `in`.
inline void dense_layer(const double* x, std::size_t rows, std::size_t in, std::size_t out, const double* w,
                        const double* b, Activation act, double* y, unsigned threads = 1) {
  parallel_for(rows, threads, [&](std::size_t r) {
    const double* xr = x + r * in;
    double* yr = y + r * out;
    for (std::size_t o = 0; o < out; ++o) {
      const double* wo = w + o * in;
      double s = b[o];
      for (std::size_t i = 0; i < in; ++i) s += wo[i] * xr[i];
      yr[o] = (act == Activation::ReLU && s < 0) ? 0.0 : s;
    }
  });
}

/// Runs the whole MLP on `rows` feature vectors.
inline std::vector<double> mlp_rows(std::span<const double> x, std::size_t rows, const MLPSpec& mlp,
                                    std::span<const double> params, unsigned threads) {
  require(x.size() == rows * mlp.input_width, "MLP input width mismatch");
  require(params.size() >= mlp.parameter_count(), "MLP parameter slice too short");
  std::vector<double> cur(x.begin(), x.end()), next;
  std::size_t off = 0;
  for (std::size_t l = 0; l < mlp.depth(); ++l) {
    const std::size_t in = mlp.layer_in(l), out = mlp.layer_out(l);
    next.assign(rows * out, 0.0);
    const double* w = params.data() + off;
    dense_layer(cur.data(), rows, in, out, w, w + in * out, mlp.activations[l], next.data(), threads);
    off += (in + 1) * out;
    cur.swap(next);
  }
  return cur;
}

inline void check_finite(std::span<const double> v, const char* where) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericError(std::string("non-finite value in ") + where);
}

}  // namespace detail

/// output[i1, i2, :] = mlp(T[i1, i2, :]).
inline DenseTensor3 apply_mlp_featurewise(const DenseTensor3& t, const MLPSpec& mlp, std::span<const double> params,
                                          unsigned threads = 1) {
  mlp.validate();
  detail::require(t.channels() == mlp.input_width, "apply_mlp_featurewise: channel count differs from MLP input");
  auto out = detail::mlp_rows(t.data(), t.n() * t.n(), mlp, params, threads);
  return DenseTensor3(t.n(), mlp.output_width, std::move(out));
}

namespace detail {

/// Copies channel ch of t into a contiguous row-major n x n matrix.
inline void extract_channel(const DenseTensor3& t, std::size_t ch, std::vector<double>& m) {
  const std::size_t n = t.n(), c = t.channels();
  m.resize(n * n);
  for (std::size_t p = 0; p < n * n; ++p) m[p] = t.data()[p * c + ch];
}

/// C = A · B for row-major n x n matrices (i-k-j order).
inline void square_matmul(const double* a, const double* b, double* out, std::size_t n) {
  std::fill(out, out + n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = out + i * n;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      if (aik == 0.0) continue;
      const double* bk = b + k * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aik * bk[j];
    }
  }
}

}  // namespace detail

/// W[:, :, ch] = U[:, :, ch] · V[:, :, ch] for every channel.
inline DenseTensor3 feature_matmul(const DenseTensor3& u, const DenseTensor3& v, unsigned threads = 1) {
  detail::require(u.n() == v.n() && u.channels() == v.channels(), "feature_matmul: shape mismatch");
  const std::size_t n = u.n(), c = u.channels();
  DenseTensor3 w(n, c);
  parallel_for(c, threads, [&](std::size_t ch) {
    std::vector<double> a, b, prod(n * n);
    detail::extract_channel(u, ch, a);
    detail::extract_channel(v, ch, b);
    detail::square_matmul(a.data(), b.data(), prod.data(), n);
    for (std::size_t p = 0; p < n * n; ++p) w.data()[p * c + ch] = prod[p];
  });
  return w;
}

/// Runs one block. `params` is the full model parameter vector, `slots` the
/// block's entry of param_layout.
inline DenseTensor3 block_forward(const DenseTensor3& t, const BlockSpec& block, std::span<const double> params,
                                  const ParamLayout::BlockSlots& slots, unsigned threads = 1) {
  block.validate();
  detail::require(t.channels() == block.input_width(), "block_forward: input width mismatch");
  auto slice = [&](std::size_t off) { return params.subspan(off); };
  DenseTensor3 w = apply_mlp_featurewise(t, block.m1, slice(slots.m1), threads);
  if (block.matmul) w = feature_matmul(w, apply_mlp_featurewise(t, *block.m2, slice(*slots.m2), threads), threads);
  DenseTensor3 skip = block.m3 ? apply_mlp_featurewise(t, *block.m3, slice(*slots.m3), threads) : t;
  DenseTensor3 out = concat_channels(skip, w);
  if (block.m4) out = apply_mlp_featurewise(out, *block.m4, slice(*slots.m4), threads);
  return out;
}

/// Convenience overload for a model made of this single block.
inline DenseTensor3 block_forward(const DenseTensor3& t, const BlockSpec& block, std::span<const double> params,
                                  unsigned threads = 1) {
  ParamLayout::BlockSlots slots;
  std::size_t at = 0;
  slots.m1 = at;
  at += block.m1.parameter_count();
  if (block.m2) {
    slots.m2 = at;
    at += block.m2->parameter_count();
  }
  if (block.m3) {
    slots.m3 = at;
    at += block.m3->parameter_count();
  }
  if (block.m4) slots.m4 = at;
  return block_forward(t, block, params, slots, threads);
}

/// Per channel: (reduce over the diagonal, reduce over off-diagonal entries).
/// Output layout: [diag_0, off_0, diag_1, off_1, ...]. An empty reduction
/// (the off-diagonal of a 1 x 1 tensor) yields 0. Max keeps the first
/// maximum in linear order.
inline std::vector<double> invariant_pool(const DenseTensor3& t, Pool pool) {
  const std::size_t n = t.n(), c = t.channels();
  std::vector<double> out(2 * c, 0.0);
  std::vector<bool> seen(2 * c, false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t base = i == j ? 0 : 1;
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double x = t(i, j, ch);
        double& slot = out[2 * ch + base];
        if (pool == Pool::Sum) {
          slot += x;
        } else if (!seen[2 * ch + base] || x > slot) {
          slot = x;
          seen[2 * ch + base] = true;
        }
      }
    }
  return out;
}

/// F = head ∘ pool ∘ B_d ∘ ... ∘ B_1. Throws NumericError on NaN/Inf.
inline std::vector<double> model_forward(const DenseTensor3& input, const ModelSpec& spec,
                                         std::span<const double> params, unsigned threads = 1) {
  const auto layout = param_layout(spec);
  detail::require(params.size() == layout.total, "parameter count does not match model");
  detail::require(input.channels() == spec.input_channels, "model input channel mismatch");
  DenseTensor3 t = input;
  const auto* suffix2 = std::get_if<SuffixII>(&spec.head);
  std::vector<double> out(spec.output_dim, 0.0);
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    t = block_forward(t, spec.blocks[i], params, layout.blocks[i], threads);
    detail::check_finite(t.data(), "block output");
    if (suffix2) {
      auto pooled = invariant_pool(t, spec.pool);
      auto y = detail::mlp_rows(pooled, 1, suffix2->per_block[i], params.subspan(layout.head[i]), 1);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += y[k];
    }
  }
  if (!suffix2) {
    auto pooled = invariant_pool(t, spec.pool);
    out = detail::mlp_rows(pooled, 1, std::get<SuffixI>(spec.head).fc, params.subspan(layout.head[0]), 1);
  }
  detail::check_finite(out, "model output");
  return out;
}

inline std::vector<double> model_forward(const Graph& g, const ModelSpec& spec, std::span<const double> params,
                                         unsigned threads = 1) {
  return model_forward(graph_to_tensor(g), spec, params, threads);
}

/// Two blocks with hand-set weights computing tr(A^3) from a graph_to_tensor
/// input with `color_width` color channels (the adjacency is the last one).
/// Block 1: (T, A·A). Block 2: (T, A, A², A²·A). Head: sum pooling and a
/// linear read of the diagonal of the last channel.
inline std::pair<ModelSpec, std::vector<double>> handcrafted_triangle_model(std::size_t color_width = 0) {
  const std::size_t e = color_width, c0 = e + 1;
  auto linear = [](std::size_t in, std::size_t out) { return MLPSpec::make(in, {}, out); };
  ModelSpec spec;
  spec.input_channels = c0;
  spec.pool = Pool::Sum;
  spec.output_dim = 1;
  spec.blocks.push_back(BlockSpec{linear(c0, 1), linear(c0, 1), std::nullopt, std::nullopt, true});
  spec.blocks.push_back(BlockSpec{linear(c0 + 1, 1), linear(c0 + 1, 1), std::nullopt, std::nullopt, true});
  const std::size_t c2 = c0 + 2;
  spec.head = SuffixI{linear(2 * c2, 1)};

  std::vector<double> p(parameter_count(spec), 0.0);
  std::size_t at = 0;
  auto select = [&](std::size_t in, std::size_t which) {
    p[at + which] = 1.0;
    at += in + 1;  // one weight row plus one bias
  };
  select(c0, e);       // block 1 m1: A
  select(c0, e);       // block 1 m2: A
  select(c0 + 1, c0);  // block 2 m1: A²
  select(c0 + 1, e);   // block 2 m2: A
  select(2 * c2, 2 * (c2 - 1));  // diagonal sum of A³
  return {std::move(spec), std::move(p)};
}

// Equivariant linear maps R^{n x n} -> R^{n x n}.

inline constexpr std::size_t kEquivariantBasisSize = 15;
inline constexpr std::size_t kEquivariantBiasSize = 2;

/// Adds coeff * op_k(X) into out, for one basis element k in [0, 15).
///  0-4  on the diagonal only: X_ii, row sum r_i, column sum c_i, trace, total
///  5-14 everywhere: X_ij, X_ji, X_ii, X_jj, r_i, r_j, c_i, c_j, trace, total
inline void equivariant_basis_accumulate(std::span<const double> x, std::size_t n, std::size_t k, double coeff,
                                         std::span<double> out) {
  detail::require(k < kEquivariantBasisSize, "basis index out of range");
  detail::require(x.size() == n * n && out.size() == n * n, "basis op: size mismatch");
  std::vector<double> r(n, 0.0), c(n, 0.0), d(n);
  double tr = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = x[i * n + i];
    tr += d[i];
    for (std::size_t j = 0; j < n; ++j) {
      r[i] += x[i * n + j];
      c[j] += x[i * n + j];
      total += x[i * n + j];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0;
      if (k < 5) {
        if (i != j) continue;
        const double diag_vals[5] = {d[i], r[i], c[i], tr, total};
        v = diag_vals[k];
      } else {
        switch (k) {
          case 5: v = x[i * n + j]; break;
          case 6: v = x[j * n + i]; break;
          case 7: v = d[i]; break;
          case 8: v = d[j]; break;
          case 9: v = r[i]; break;
          case 10: v = r[j]; break;
          case 11: v = c[i]; break;
          case 12: v = c[j]; break;
          case 13: v = tr; break;
          default: v = total; break;
        }
      }
      out[i * n + j] += coeff * v;
    }
}

/// Coefficient layout: for each output channel o, for each input channel i,
/// 15 basis coefficients; then for each output channel the 2 bias
/// coefficients (identity pattern, all-ones pattern).
inline std::size_t equivariant_linear_coefficient_count(std::size_t in_channels, std::size_t out_channels) {
  return kEquivariantBasisSize * in_channels * out_channels + kEquivariantBiasSize * out_channels;
}

inline DenseTensor3 equivariant_linear_basis_apply(const DenseTensor3& t, std::size_t out_channels,
                                                   std::span<const double> coeffs) {
  const std::size_t n = t.n(), a = t.channels();
  detail::require(coeffs.size() == equivariant_linear_coefficient_count(a, out_channels),
                  "equivariant_linear_basis_apply: coefficient count mismatch");
  DenseTensor3 out(n, out_channels);
  std::vector<double> x, acc(n * n);
  for (std::size_t o = 0; o < out_channels; ++o) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < a; ++i) {
      detail::extract_channel(t, i, x);
      for (std::size_t k = 0; k < kEquivariantBasisSize; ++k) {
        const double w = coeffs[(o * a + i) * kEquivariantBasisSize + k];
        if (w != 0.0) equivariant_basis_accumulate(x, n, k, w, acc);
      }
    }
    const double* bias = coeffs.data() + kEquivariantBasisSize * a * out_channels + kEquivariantBiasSize * o;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) acc[i * n + j] += (i == j ? bias[0] : 0.0) + bias[1];
    for (std::size_t p = 0; p < n * n; ++p) out.data()[p * out_channels + o] = acc[p];
  }
  return out;
}

/// Single-channel n x n x n tensor, element (i1, i2, i3) at (i1 * n + i2) * n + i3.
class Tensor3Cube {
 public:
  Tensor3Cube() = default;
  explicit Tensor3Cube(std::size_t n, double fill = 0.0) : n_(n), data_(n * n * n, fill) {}

  std::size_t n() const noexcept { return n_; }
  double& operator()(std::size_t a, std::size_t b, std::size_t c) { return data_[(a * n_ + b) * n_ + c]; }
  double operator()(std::size_t a, std::size_t b, std::size_t c) const { return data_[(a * n_ + b) * n_ + c]; }
  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

inline Tensor3Cube permute_tensor(const Tensor3Cube& t, const Permutation& g) {
  detail::require(g.size() == t.n(), "permutation size must equal tensor side");
  Tensor3Cube out(t.n());
  for (std::size_t a = 0; a < t.n(); ++a)
    for (std::size_t b = 0; b < t.n(); ++b)
      for (std::size_t c = 0; c < t.n(); ++c) out(g(a), g(b), g(c)) = t(a, b, c);
  return out;
}

/// out[i1, i2, i3] = Σ_j A1[j, i2, i3] · A2[i1, j, i3] · A3[i1, i2, j].
inline Tensor3Cube generalized_matmul(const Tensor3Cube& a1, const Tensor3Cube& a2, const Tensor3Cube& a3) {
  detail::require(a1.n() == a2.n() && a2.n() == a3.n(), "generalized_matmul: size mismatch");
  const std::size_t n = a1.n();
  Tensor3Cube out(n);
  for (std::size_t i1 = 0; i1 < n; ++i1)
    for (std::size_t i2 = 0; i2 < n; ++i2)
      for (std::size_t i3 = 0; i3 < n; ++i3) {
        double s = 0;
        for (std::size_t j = 0; j < n; ++j) s += a1(j, i2, i3) * a2(i1, j, i3) * a3(i1, i2, j);
        out(i1, i2, i3) = s;
      }
  return out;
}

// Serialization.

inline constexpr int kModelFormatVersion = 1;
inline constexpr char kParamsMagic[4] = {'W', 'L', 'N', 'P'};
inline constexpr std::uint32_t kParamsVersion = 1;

namespace detail {

inline const char* activation_name(Activation a) { return a == Activation::ReLU ? "relu" : "identity"; }

inline Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "identity") return Activation::Identity;
  throw Error("unknown activation: " + s);
}

inline nlohmann::json mlp_to_json(const MLPSpec& m) {
  nlohmann::json acts = nlohmann::json::array();
  for (auto a : m.activations) acts.push_back(activation_name(a));
  return {{"input", m.input_width}, {"hidden", m.hidden_widths}, {"output", m.output_width}, {"activations", acts}};
}

inline MLPSpec mlp_from_json(const nlohmann::json& j) {
  MLPSpec m;
  m.input_width = j.at("input").get<std::size_t>();
  m.hidden_widths = j.at("hidden").get<std::vector<std::size_t>>();
  m.output_width = j.at("output").get<std::size_t>();
  for (const auto& a : j.at("activations")) m.activations.push_back(parse_activation(a.get<std::string>()));
  m.validate();
  return m;
}

inline nlohmann::json optional_mlp(const std::optional<MLPSpec>& m) { return m ? mlp_to_json(*m) : nlohmann::json(); }

inline std::optional<MLPSpec> optional_mlp(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return mlp_from_json(j.at(key));
}

}  // namespace detail

inline nlohmann::json model_spec_to_json(const ModelSpec& spec) {
  spec.validate();
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : spec.blocks)
    blocks.push_back({{"m1", detail::mlp_to_json(b.m1)},
                      {"m2", detail::optional_mlp(b.m2)},
                      {"m3", detail::optional_mlp(b.m3)},
                      {"m4", detail::optional_mlp(b.m4)},
                      {"matmul", b.matmul}});
  nlohmann::json head;
  if (auto* h = std::get_if<SuffixI>(&spec.head)) {
    head = {{"kind", "suffix1"}, {"fc", detail::mlp_to_json(h->fc)}};
  } else {
    nlohmann::json fcs = nlohmann::json::array();
    for (const auto& fc : std::get<SuffixII>(spec.head).per_block) fcs.push_back(detail::mlp_to_json(fc));
    head = {{"kind", "suffix2"}, {"per_block", fcs}};
  }
  return {{"format", "wlnet-model"},
          {"version", kModelFormatVersion},
          {"input_channels", spec.input_channels},
          {"output_dim", spec.output_dim},
          {"pool", spec.pool == Pool::Max ? "max" : "sum"},
          {"blocks", blocks},
          {"head", head}};
}

inline ModelSpec model_spec_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "wlnet-model") throw Error("not a wlnet model document");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw Error("unsupported model format version " + j.at("version").dump());
    ModelSpec spec;
    spec.input_channels = j.at("input_channels").get<std::size_t>();
    spec.output_dim = j.at("output_dim").get<std::size_t>();
    const auto pool = j.at("pool").get<std::string>();
    if (pool != "max" && pool != "sum") throw Error("unknown pool: " + pool);
    spec.pool = pool == "max" ? Pool::Max : Pool::Sum;
    for (const auto& b : j.at("blocks")) {
      BlockSpec block{detail::mlp_from_json(b.at("m1")), detail::optional_mlp(b, "m2"), detail::optional_mlp(b, "m3"),
                      detail::optional_mlp(b, "m4"), b.at("matmul").get<bool>()};
      spec.blocks.push_back(std::move(block));
    }
    const auto& head = j.at("head");
    const auto kind = head.at("kind").get<std::string>();
    if (kind == "suffix1") {
      spec.head = SuffixI{detail::mlp_from_json(head.at("fc"))};
    } else if (kind == "suffix2") {
      SuffixII h;
      for (const auto& fc : head.at("per_block")) h.per_block.push_back(detail::mlp_from_json(fc));
      spec.head = std::move(h);
    } else {
      throw Error("unknown head kind: " + kind);
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed model document: ") + e.what());
  }
}

namespace detail {

inline void put_le(std::ostream& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint64_t get_le(std::istream& in, int bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int ch = in.get();
    if (ch == std::char_traits<char>::eof()) throw ParseError("params: truncated input", offset + i);
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(ch)) << (8 * i);
  }
  return v;
}

}  // namespace detail

/// Header: "WLNP", uint32 version, uint64 count; then count float64 values.
/// All integers and values little-endian.
inline void write_params(std::ostream& out, std::span<const double> params) {
  out.write(kParamsMagic, 4);
  detail::put_le(out, kParamsVersion, 4);
  detail::put_le(out, params.size(), 8);
  for (double v : params) detail::put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  if (!out) throw Error("params: write failed");
}

inline std::vector<double> read_params(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4) throw ParseError("params: truncated header", static_cast<std::size_t>(in.gcount()));
  if (!std::equal(magic, magic + 4, kParamsMagic)) throw ParseError("params: bad magic", 0);
  const auto version = detail::get_le(in, 4, 4);
  if (version != kParamsVersion) throw ParseError("params: unsupported version " + std::to_string(version), 4);
  const auto count = detail::get_le(in, 8, 8);
  std::vector<double> out;
  out.reserve(std::min<std::uint64_t>(count, 1u << 20));
  for (std::uint64_t i = 0; i < count; ++i)
    out.push_back(std::bit_cast<double>(detail::get_le(in, 8, 16 + 8 * i)));
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("params: trailing bytes", 16 + 8 * count);
  return out;
}

}  // namespace wlnet
