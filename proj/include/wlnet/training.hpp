#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wlnet/error.hpp"
#include "wlnet/generators.hpp"
#include "wlnet/net.hpp"
#include "wlnet/random.hpp"

namespace wlnet {

/// Records one forward pass. Nodes are appended in evaluation order, so the
/// reverse of insertion order is a valid reverse topological order.
/// A tape is single use: after backward() it rejects further recording.
class Tape {
 public:
  using Var = std::size_t;
  /// Reads grad(self) and accumulates into the parents' gradients.
  using BackwardFn = std::function<void(Tape&, Var self)>;

  Var leaf(std::vector<double> value) { return record(std::move(value), {}, nullptr); }

  Var record(std::vector<double> value, std::vector<Var> parents, BackwardFn backward) {
    detail::require(!consumed_, "tape already consumed by backward()");
    for (Var p : parents) detail::require(p < nodes_.size(), "tape: unknown parent");
    nodes_.push_back(Node{std::move(value), {}, std::move(parents), std::move(backward)});
    return nodes_.size() - 1;
  }

  const std::vector<double>& value(Var v) const { return nodes_.at(v).value; }

  /// Gradient buffer of v; allocated (zero) on first access.
  std::vector<double>& grad(Var v) {
    auto& node = nodes_.at(v);
    if (node.grad.size() != node.value.size()) node.grad.assign(node.value.size(), 0.0);
    return node.grad;
  }

  /// d root / d node for every node. root must hold a single value.
  void backward(Var root) {
    detail::require(!consumed_, "tape already consumed by backward()");
    detail::require(value(root).size() == 1, "backward() needs a scalar root");
    consumed_ = true;
    grad(root)[0] = 1.0;
    for (Var v = root + 1; v-- > 0;) {
      auto& node = nodes_[v];
      if (node.backward && !node.grad.empty()) node.backward(*this, v);
    }
  }

  bool consumed() const noexcept { return consumed_; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<Var> parents;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  bool consumed_ = false;
};

using Var = Tape::Var;

// Plain losses.

inline double loss_cross_entropy(std::span<const double> logits, std::size_t label) {
  detail::require(label < logits.size(), "cross-entropy label out of range");
  detail::check_finite(logits, "cross-entropy input");
  const double m = *std::max_element(logits.begin(), logits.end());
  double s = 0;
  for (double z : logits) s += std::exp(z - m);
  return m + std::log(s) - logits[label];
}

inline double loss_abs_error(double prediction, double target) {
  if (!std::isfinite(prediction) || !std::isfinite(target)) throw NumericError("non-finite value in absolute error");
  return std::abs(prediction - target);
}

namespace ops {

/// rows x in -> rows x out, y = act(W x + b), W and b read from params at offset.
inline Var dense(Tape& tape, Var x, std::size_t rows, std::size_t in, std::size_t out, Var params,
                 std::size_t offset, Activation act, unsigned threads = 1) {
  const auto& xv = tape.value(x);
  const auto& pv = tape.value(params);
  detail::require(xv.size() == rows * in, "dense: input size mismatch");
  detail::require(offset + (in + 1) * out <= pv.size(), "dense: parameter slice out of range");
  std::vector<double> y(rows * out);
  const double* w = pv.data() + offset;
  detail::dense_layer(xv.data(), rows, in, out, w, w + in * out, act, y.data(), threads);
  return tape.record(std::move(y), {x, params}, [=](Tape& t, Var self) {
    const auto& yv = t.value(self);
    std::vector<double> dy = t.grad(self);
    if (act == Activation::ReLU)
      for (std::size_t i = 0; i < dy.size(); ++i)
        if (yv[i] <= 0) dy[i] = 0;
    const auto& xv = t.value(x);
    const double* w = t.value(params).data() + offset;
    auto& dp = t.grad(params);
    auto& dx = t.grad(x);
    double* dw = dp.data() + offset;
    double* db = dw + in * out;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* xr = xv.data() + r * in;
      const double* dyr = dy.data() + r * out;
      double* dxr = dx.data() + r * in;
      for (std::size_t o = 0; o < out; ++o) {
        const double g = dyr[o];
        if (g == 0) continue;
        db[o] += g;
        for (std::size_t i = 0; i < in; ++i) {
          dw[o * in + i] += g * xr[i];
          dxr[i] += g * w[o * in + i];
        }
      }
    }
  });
}

inline Var mlp(Tape& tape, Var x, std::size_t rows, const MLPSpec& spec, Var params, std::size_t offset,
               unsigned threads = 1) {
  spec.validate();
  Var cur = x;
  for (std::size_t l = 0; l < spec.depth(); ++l) {
    const std::size_t in = spec.layer_in(l), out = spec.layer_out(l);
    cur = dense(tape, cur, rows, in, out, params, offset, spec.activations[l], threads);
    offset += (in + 1) * out;
  }
  return cur;
}

/// Per-channel product of n x n x c tensors. dU = dW·Vᵀ, dV = Uᵀ·dW.
inline Var feature_matmul(Tape& tape, Var u, Var v, std::size_t n, std::size_t c, unsigned threads = 1) {
  DenseTensor3 tu(n, c, tape.value(u)), tv(n, c, tape.value(v));
  auto w = wlnet::feature_matmul(tu, tv, threads);
  return tape.record(std::move(w.data()), {u, v}, [=](Tape& t, Var self) {
    const auto& dw = t.grad(self);
    const auto& uv = t.value(u);
    const auto& vv = t.value(v);
    auto& du = t.grad(u);
    auto& dv = t.grad(v);
    auto at = [c, n](std::size_t i, std::size_t j, std::size_t ch) { return (i * n + j) * c + ch; };
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
          double su = 0, sv = 0;
          for (std::size_t j = 0; j < n; ++j) {
            su += dw[at(i, j, ch)] * vv[at(k, j, ch)];  // (dW·Vᵀ)[i][k]
            sv += uv[at(j, i, ch)] * dw[at(j, k, ch)];  // (Uᵀ·dW)[i][k]
          }
          du[at(i, k, ch)] += su;
          dv[at(i, k, ch)] += sv;
        }
  });
}

/// Channel concatenation at each of `positions` positions.
inline Var concat(Tape& tape, Var a, Var b, std::size_t positions, std::size_t ca, std::size_t cb) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  detail::require(av.size() == positions * ca && bv.size() == positions * cb, "concat: size mismatch");
  std::vector<double> out(positions * (ca + cb));
  for (std::size_t p = 0; p < positions; ++p) {
    std::copy_n(av.data() + p * ca, ca, out.data() + p * (ca + cb));
    std::copy_n(bv.data() + p * cb, cb, out.data() + p * (ca + cb) + ca);
  }
  return tape.record(std::move(out), {a, b}, [=](Tape& t, Var self) {
    const auto& d = t.grad(self);
    auto& da = t.grad(a);
    auto& db = t.grad(b);
    for (std::size_t p = 0; p < positions; ++p) {
      for (std::size_t i = 0; i < ca; ++i) da[p * ca + i] += d[p * (ca + cb) + i];
      for (std::size_t i = 0; i < cb; ++i) db[p * cb + i] += d[p * (ca + cb) + ca + i];
    }
  });
}

/// invariant_pool on the tape. Max routes the gradient to the first maximum
/// in linear order (the same entry the forward pass picked).
inline Var pool(Tape& tape, Var x, std::size_t n, std::size_t c, Pool kind) {
  DenseTensor3 tx(n, c, tape.value(x));
  auto out = invariant_pool(tx, kind);
  return tape.record(std::move(out), {x}, [=](Tape& t, Var self) {
    const auto& d = t.grad(self);
    const auto& xv = t.value(x);
    auto& dx = t.grad(x);
    std::vector<std::size_t> arg(2 * c, SIZE_MAX);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t ch = 0; ch < c; ++ch) {
          const std::size_t idx = (i * n + j) * c + ch, slot = 2 * ch + (i == j ? 0 : 1);
          if (kind == Pool::Sum) {
            dx[idx] += d[slot];
          } else if (arg[slot] == SIZE_MAX || xv[idx] > xv[arg[slot]]) {
            arg[slot] = idx;
          }
        }
    if (kind == Pool::Max)
      for (std::size_t s = 0; s < arg.size(); ++s)
        if (arg[s] != SIZE_MAX) dx[arg[s]] += d[s];
  });
}

inline Var add(Tape& tape, Var a, Var b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  detail::require(av.size() == bv.size(), "add: size mismatch");
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return tape.record(std::move(out), {a, b}, [=](Tape& t, Var self) {
    const auto& d = t.grad(self);
    auto& da = t.grad(a);
    for (std::size_t i = 0; i < d.size(); ++i) da[i] += d[i];
    auto& db = t.grad(b);
    for (std::size_t i = 0; i < d.size(); ++i) db[i] += d[i];
  });
}

inline Var cross_entropy(Tape& tape, Var logits, std::size_t label) {
  const auto& z = tape.value(logits);
  const double loss = loss_cross_entropy(z, label);
  return tape.record({loss}, {logits}, [=](Tape& t, Var self) {
    const double g = t.grad(self)[0];
    const auto& z = t.value(logits);
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0;
    for (double v : z) s += std::exp(v - m);
    auto& dz = t.grad(logits);
    for (std::size_t k = 0; k < z.size(); ++k) dz[k] += g * (std::exp(z[k] - m) / s - (k == label ? 1.0 : 0.0));
  });
}

/// |prediction - target| for a single-output node; subgradient 0 at equality.
inline Var abs_error(Tape& tape, Var prediction, double target) {
  const auto& p = tape.value(prediction);
  detail::require(p.size() == 1, "abs_error needs a scalar prediction");
  const double loss = loss_abs_error(p[0], target);
  return tape.record({loss}, {prediction}, [=](Tape& t, Var self) {
    const double diff = t.value(prediction)[0] - target;
    const double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
    t.grad(prediction)[0] += t.grad(self)[0] * sign;
  });
}

/// The same computation as wlnet::model_forward, recorded on the tape.
inline Var model_forward(Tape& tape, const ModelSpec& spec, Var params, const DenseTensor3& input,
                         unsigned threads = 1) {
  const auto layout = param_layout(spec);
  detail::require(tape.value(params).size() == layout.total, "parameter count does not match model");
  detail::require(input.channels() == spec.input_channels, "model input channel mismatch");
  const std::size_t n = input.n(), positions = n * n;
  Var t = tape.leaf(input.data());
  std::size_t c = input.channels();
  const auto* suffix2 = std::get_if<SuffixII>(&spec.head);
  std::optional<Var> sum;
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    const auto& b = spec.blocks[i];
    const auto& s = layout.blocks[i];
    Var w = mlp(tape, t, positions, b.m1, params, s.m1, threads);
    if (b.matmul) {
      Var v = mlp(tape, t, positions, *b.m2, params, *s.m2, threads);
      w = feature_matmul(tape, w, v, n, b.m1.output_width, threads);
    }
    Var skip = b.m3 ? mlp(tape, t, positions, *b.m3, params, *s.m3, threads) : t;
    Var out = concat(tape, skip, w, positions, b.skip_width(), b.m1.output_width);
    if (b.m4) out = mlp(tape, out, positions, *b.m4, params, *s.m4, threads);
    t = out;
    c = b.output_width();
    detail::check_finite(tape.value(t), "block output");
    if (suffix2) {
      Var y = mlp(tape, pool(tape, t, n, c, spec.pool), 1, suffix2->per_block[i], params, layout.head[i]);
      sum = sum ? add(tape, *sum, y) : y;
    }
  }
  Var result = suffix2 ? *sum : mlp(tape, pool(tape, t, n, c, spec.pool), 1, std::get<SuffixI>(spec.head).fc, params,
                                    layout.head[0]);
  detail::check_finite(tape.value(result), "model output");
  return result;
}

}  // namespace ops

// Losses as configuration.

struct CrossEntropyLoss {
  std::size_t label = 0;
};
struct AbsErrorLoss {
  double target = 0;
};
using LossSpec = std::variant<CrossEntropyLoss, AbsErrorLoss>;

inline Var record_loss(Tape& tape, Var output, const LossSpec& loss) {
  if (auto* ce = std::get_if<CrossEntropyLoss>(&loss)) return ops::cross_entropy(tape, output, ce->label);
  return ops::abs_error(tape, output, std::get<AbsErrorLoss>(loss).target);
}

struct LossAndGradient {
  double loss = 0;
  std::vector<double> output;
  std::vector<double> gradient;
};

inline LossAndGradient loss_and_gradient(const ModelSpec& spec, std::span<const double> params,
                                         const DenseTensor3& input, const LossSpec& loss, unsigned threads = 1) {
  Tape tape;
  Var p = tape.leaf({params.begin(), params.end()});
  Var out = ops::model_forward(tape, spec, p, input, threads);
  Var l = record_loss(tape, out, loss);
  LossAndGradient r{tape.value(l)[0], tape.value(out), {}};
  tape.backward(l);
  r.gradient = tape.grad(p);
  return r;
}

inline double loss_value(const ModelSpec& spec, std::span<const double> params, const DenseTensor3& input,
                         const LossSpec& loss, unsigned threads = 1) {
  auto out = wlnet::model_forward(input, spec, params, threads);
  if (auto* ce = std::get_if<CrossEntropyLoss>(&loss)) return loss_cross_entropy(out, ce->label);
  detail::require(out.size() == 1, "abs_error needs a scalar prediction");
  return loss_abs_error(out[0], std::get<AbsErrorLoss>(loss).target);
}

// Gradient verification.

struct GradCheckOptions {
  double step = 1e-5;
  std::size_t samples = 200;  // all coordinates when the vector is shorter
  std::uint64_t seed = 0;
  double floor = 1e-8;  // coordinates where both gradients are below this are skipped
  double tolerance = 1e-4;
};

struct GradCheckResult {
  double max_relative_error = 0;
  std::size_t sampled = 0;
  std::size_t compared = 0;
  std::size_t kinks = 0;  // stencil straddled a ReLU / max kink; rechecked at step / 100
};

/// Compares `analytic` with central differences of f at a seeded subsample
/// of coordinates. Relative error is |a - d| / max(|a|, |d|).
///
/// A coordinate that misses the tolerance and whose one-sided differences
/// disagree by more than the miss has a kink inside the stencil; it is
/// recomputed with step / 100 and counted in `kinks`. A wrong gradient on a
/// smooth coordinate still fails.
inline GradCheckResult grad_check(const std::function<double(std::span<const double>)>& f,
                                  std::span<const double> analytic, std::span<const double> params,
                                  const GradCheckOptions& opts = {}) {
  detail::require(analytic.size() == params.size(), "grad_check: gradient and parameter sizes differ");
  std::vector<std::size_t> coords(params.size());
  std::iota(coords.begin(), coords.end(), 0);
  if (coords.size() > opts.samples) {
    Rng rng(opts.seed);
    shuffle(coords, rng);
    coords.resize(opts.samples);
    std::sort(coords.begin(), coords.end());
  }
  GradCheckResult r;
  std::vector<double> p(params.begin(), params.end());
  auto diffs = [&](std::size_t i, double h) {
    const double orig = p[i];
    p[i] = orig + h;
    const double up = f(p);
    p[i] = orig - h;
    const double down = f(p);
    p[i] = orig;
    return std::pair{up, down};
  };
  auto rel = [&](double a, double d) {
    const double scale = std::max(std::abs(a), std::abs(d));
    return scale <= opts.floor ? -1.0 : std::abs(a - d) / scale;
  };
  const double f0 = f(p);
  for (std::size_t i : coords) {
    ++r.sampled;
    auto [up, down] = diffs(i, opts.step);
    double err = rel(analytic[i], (up - down) / (2 * opts.step));
    if (err > opts.tolerance) {
      const double fwd = (up - f0) / opts.step, bwd = (f0 - down) / opts.step;
      const double miss = std::abs(analytic[i] - (up - down) / (2 * opts.step));
      if (std::abs(fwd - bwd) > miss) {
        const double h = opts.step / 100;
        auto [up2, down2] = diffs(i, h);
        err = rel(analytic[i], (up2 - down2) / (2 * h));
        ++r.kinks;
      }
    }
    if (err < 0) continue;
    ++r.compared;
    r.max_relative_error = std::max(r.max_relative_error, err);
  }
  return r;
}

inline GradCheckResult grad_check(const ModelSpec& spec, std::span<const double> params, const DenseTensor3& input,
                                  const LossSpec& loss, const GradCheckOptions& opts = {}) {
  auto analytic = loss_and_gradient(spec, params, input, loss).gradient;
  return grad_check([&](std::span<const double> p) { return loss_value(spec, p, input, loss); }, analytic, params,
                    opts);
}

// Synthetic data.

struct LabeledGraph {
  Graph graph;
  std::size_t label = 0;
};

struct SyntheticDataset {
  std::string family;
  std::vector<std::size_t> m_values;
  std::uint64_t seed = 0;
  std::vector<LabeledGraph> items;
};

/// For each m: (C_2m, label 0) and (C_m + C_m, label 1), each relabeled by a
/// seeded random permutation. Both graphs of a pair are 2-regular on 2m
/// vertices.
inline SyntheticDataset make_cycle_union_dataset(const std::vector<std::size_t>& m_values, std::uint64_t seed) {
  detail::require(!m_values.empty(), "cycle-union dataset needs at least one m");
  SyntheticDataset ds{"cycle-union", m_values, seed, {}};
  Rng rng(seed);
  for (std::size_t m : m_values) {
    detail::require(m >= 3, "cycle-union needs m >= 3");
    auto big = cycle(2 * m);
    auto twin = disjoint_union(cycle(m), cycle(m));
    ds.items.push_back({permute_graph(big, Permutation::random(2 * m, rng)), 0});
    ds.items.push_back({permute_graph(twin, Permutation::random(2 * m, rng)), 1});
  }
  return ds;
}

/// Network input used for training: graph_to_fwl_tensor (colors, A, I).
inline DenseTensor3 training_input(const Graph& g) { return graph_to_fwl_tensor(g); }

struct ClassifierConfig {
  std::size_t input_channels = 2;
  std::size_t blocks = 2;
  std::size_t width = 16;
  std::size_t mlp_depth = 1;  // weight matrices per m1 / m2
  std::size_t classes = 2;
  bool matmul = true;         // false: feature-wise baseline
  bool suffix2 = false;
  Pool pool = Pool::Max;
  Activation mlp_output = Activation::ReLU;  // last layer of m1 / m2
};

/// Blocks with m1, m2: depth-d MLPs of `width` features (ReLU throughout),
/// m3 = identity; head: pooled features -> width -> classes.
inline ModelSpec make_classifier(const ClassifierConfig& cfg) {
  detail::require(cfg.blocks >= 1 && cfg.width >= 1 && cfg.mlp_depth >= 1, "classifier: bad configuration");
  ModelSpec spec;
  spec.input_channels = cfg.input_channels;
  spec.output_dim = cfg.classes;
  spec.pool = cfg.pool;
  std::size_t c = cfg.input_channels;
  std::vector<std::size_t> widths;
  for (std::size_t b = 0; b < cfg.blocks; ++b) {
    auto m = MLPSpec::make(c, std::vector<std::size_t>(cfg.mlp_depth - 1, cfg.width), cfg.width, cfg.mlp_output);
    BlockSpec block{m, std::nullopt, std::nullopt, std::nullopt, cfg.matmul};
    if (cfg.matmul) block.m2 = m;
    c = block.output_width();
    widths.push_back(c);
    spec.blocks.push_back(std::move(block));
  }
  if (cfg.suffix2) {
    SuffixII h;
    for (auto w : widths) h.per_block.push_back(MLPSpec::make(2 * w, {}, cfg.classes));
    spec.head = std::move(h);
  } else {
    spec.head = SuffixI{MLPSpec::make(2 * c, {cfg.width}, cfg.classes)};
  }
  spec.validate();
  return spec;
}

// Training.

struct TrainConfig {
  double learning_rate = 0.25;
  double decay = 1.0;            // multiplied in every `decay_every` epochs
  std::size_t decay_every = 20;
  std::size_t epochs = 500;
  std::size_t batch_size = 0;    // 0 = full batch
  std::uint64_t seed = 0;        // mini-batch order
  unsigned threads = 1;
  bool stop_when_perfect = false;
};

struct HistoryRow {
  std::size_t epoch = 0;
  double loss = 0;
  double accuracy = 0;
  double learning_rate = 0;
};

struct TrainResult {
  std::vector<double> params;
  std::vector<HistoryRow> history;
};

inline double learning_rate_at(const TrainConfig& cfg, std::size_t epoch) {
  return cfg.learning_rate * std::pow(cfg.decay, static_cast<double>(epoch / std::max<std::size_t>(cfg.decay_every, 1)));
}

inline std::size_t predicted_class(std::span<const double> logits) {
  return static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

/// Gradient descent on cross-entropy. Row e of the history describes the
/// parameters after e epochs; row 0 is the untrained model.
inline TrainResult train(const ModelSpec& spec, std::vector<double> params, const SyntheticDataset& data,
                         const TrainConfig& cfg) {
  detail::require(!data.items.empty(), "train: empty dataset");
  detail::require(params.size() == parameter_count(spec), "train: parameter count does not match model");
  detail::require(cfg.decay >= 0 && cfg.learning_rate >= 0, "train: learning rate and decay must be >= 0");
  std::vector<DenseTensor3> inputs;
  for (const auto& item : data.items) inputs.push_back(training_input(item.graph));
  const std::size_t count = data.items.size();
  const std::size_t batch = cfg.batch_size == 0 ? count : std::min(cfg.batch_size, count);
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  for (std::size_t epoch = 0;; ++epoch) {
    const double lr = learning_rate_at(cfg, epoch);
    // Metrics at the current parameters; full batch reuses this pass for the step.
    std::vector<double> grad(params.size(), 0.0);
    double total = 0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const LossSpec loss = CrossEntropyLoss{data.items[i].label};
      auto r = batch == count ? loss_and_gradient(spec, params, inputs[i], loss, cfg.threads)
                              : LossAndGradient{0, wlnet::model_forward(inputs[i], spec, params, cfg.threads), {}};
      if (batch != count) r.loss = loss_cross_entropy(r.output, data.items[i].label);
      if (!std::isfinite(r.loss))
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": non-finite loss");
      total += r.loss;
      correct += predicted_class(r.output) == data.items[i].label;
      for (std::size_t k = 0; k < r.gradient.size(); ++k) grad[k] += r.gradient[k];
    }
    result.history.push_back({epoch, total / static_cast<double>(count),
                              static_cast<double>(correct) / static_cast<double>(count), lr});
    if (epoch == cfg.epochs || (cfg.stop_when_perfect && correct == count)) break;

    if (batch == count) {
      for (std::size_t k = 0; k < params.size(); ++k) params[k] -= lr * grad[k] / static_cast<double>(count);
    } else {
      shuffle(order, rng);
      for (std::size_t start = 0; start < count; start += batch) {
        const std::size_t end = std::min(count, start + batch);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t s = start; s < end; ++s) {
          const std::size_t i = order[s];
          auto r = loss_and_gradient(spec, params, inputs[i], CrossEntropyLoss{data.items[i].label}, cfg.threads);
          for (std::size_t k = 0; k < r.gradient.size(); ++k) grad[k] += r.gradient[k];
        }
        for (std::size_t k = 0; k < params.size(); ++k)
          params[k] -= lr * grad[k] / static_cast<double>(end - start);
      }
    }
    for (double x : params)
      if (!std::isfinite(x))
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": non-finite parameter");
  }
  result.params = std::move(params);
  return result;
}

inline void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& history) {
  out << "epoch,loss,accuracy,learning_rate\n";
  const auto old = out.precision(17);
  for (const auto& r : history) out << r.epoch << ',' << r.loss << ',' << r.accuracy << ',' << r.learning_rate << '\n';
  out.precision(old);
}

}  // namespace wlnet
