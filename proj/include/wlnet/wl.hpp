#pragma once

// Weisfeiler-Lehman refinement: classic color refinement on vertices (CR1),
// k-WL and k-FWL on k-tuples, with deterministic color interning and joint
// comparison of two graphs.
//
// Multi-indices and neighborhood positions are 0-based throughout. A
// TupleColoring stores the color of tuple (i_1, ..., i_k) at the row-major
// linear index sum_q i_q * n^(k-1-q).

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wlnet/error.hpp"
#include "wlnet/graph.hpp"
#include "wlnet/parallel.hpp"

namespace wlnet {

using ColorId = std::uint32_t;
using Signature = std::vector<std::uint32_t>;
using MultiIndexK = std::vector<std::size_t>;

/// Bijection between color signatures and dense ids (the `enc` map).
///
/// Within one `intern_batch` call, new ids are handed out in the sorted order
/// of the distinct unseen signatures, so the ids depend only on the set of
/// signatures and never on the order they were produced in.
class ColorInterner {
 public:
  /// Id per input signature, in input order.
  std::vector<ColorId> intern_batch(const std::vector<Signature>& sigs) {
    std::vector<std::size_t> order(sigs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return sigs[a] < sigs[b]; });
    std::vector<ColorId> ids(sigs.size());
    for (std::size_t g = 0; g < order.size();) {
      const Signature& s = sigs[order[g]];
      const ColorId id = lookup_or_issue(s);
      for (; g < order.size() && sigs[order[g]] == s; ++g) ids[order[g]] = id;
    }
    return ids;
  }

  ColorId intern(const Signature& s) { return lookup_or_issue(s); }

  /// Number of ids issued so far.
  std::size_t issued() const noexcept { return next_; }

  /// Drops stored signatures but keeps the id counter, so later ids remain
  /// distinct from every earlier one. Safe between refinement rounds: each
  /// round's signatures begin with an id issued in the previous round, hence
  /// can never equal a signature from an older round.
  void forget_history() { table_.clear(); }

 private:
  ColorId lookup_or_issue(const Signature& s) {
    auto it = table_.find(s);
    if (it != table_.end()) return it->second;
    if (next_ == std::numeric_limits<ColorId>::max()) throw Error("color interner exhausted");
    table_.emplace(s, next_);
    return next_++;
  }

  std::map<Signature, ColorId> table_;
  ColorId next_ = 0;
};

/// Color per k-tuple of vertices.
struct TupleColoring {
  std::size_t k = 0;
  std::size_t n = 0;
  std::vector<ColorId> colors;  // n^k entries, row-major

  std::size_t index(std::span<const std::size_t> tuple) const {
    std::size_t idx = 0;
    for (auto v : tuple) idx = idx * n + v;
    return idx;
  }

  MultiIndexK tuple(std::size_t idx) const {
    MultiIndexK t(k);
    for (std::size_t q = k; q-- > 0;) {
      t[q] = idx % n;
      idx /= n;
    }
    return t;
  }

  ColorId operator[](std::span<const std::size_t> tuple) const { return colors[index(tuple)]; }

  friend bool operator==(const TupleColoring&, const TupleColoring&) = default;
};

enum class Variant { WL, FWL, CR1 };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::WL: return "wl";
    case Variant::FWL: return "fwl";
    case Variant::CR1: return "cr1";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "wl") return Variant::WL;
  if (s == "fwl") return Variant::FWL;
  if (s == "cr1") return Variant::CR1;
  throw Error("unknown variant '" + s + "' (expected wl, fwl or cr1)");
}

struct RefineOptions {
  unsigned threads = 1;
};

namespace detail {

inline std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  while (exp--) {
    if (base != 0 && r > std::numeric_limits<std::size_t>::max() / base) throw Error("n^k overflows");
    r *= base;
  }
  return r;
}

inline std::size_t tuple_count(std::size_t n, std::size_t k) { return ipow(n, k); }

constexpr std::uint32_t kInitialTag = 0xFFFFFFFFu;

inline void append_double_bits(Signature& s, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  s.push_back(static_cast<std::uint32_t>(bits >> 32));
  s.push_back(static_cast<std::uint32_t>(bits));
}

inline std::vector<TupleColoring> assemble(const std::vector<std::size_t>& ks, const std::vector<std::size_t>& ns,
                                           const std::vector<Signature>& sigs, ColorInterner& interner) {
  auto ids = interner.intern_batch(sigs);
  std::vector<TupleColoring> out(ks.size());
  std::size_t offset = 0;
  for (std::size_t g = 0; g < ks.size(); ++g) {
    const std::size_t count = tuple_count(ns[g], ks[g]);
    out[g] = TupleColoring{ks[g], ns[g], std::vector<ColorId>(ids.begin() + offset, ids.begin() + offset + count)};
    offset += count;
  }
  return out;
}

}  // namespace detail

/// N_j(i): the n tuples that agree with i everywhere except position j.
inline std::vector<MultiIndexK> neighborhood_wl(std::span<const std::size_t> i, std::size_t j, std::size_t n) {
  detail::require(j < i.size(), "neighborhood_wl: position out of range");
  std::vector<MultiIndexK> out;
  for (std::size_t v = 0; v < n; ++v) {
    MultiIndexK t(i.begin(), i.end());
    t[j] = v;
    out.push_back(std::move(t));
  }
  return out;
}

/// N^F_j(i): the k tuples obtained by writing vertex j into each position of i in turn.
inline std::vector<MultiIndexK> neighborhood_fwl(std::span<const std::size_t> i, std::size_t j, std::size_t n) {
  detail::require(j < n, "neighborhood_fwl: vertex out of range");
  std::vector<MultiIndexK> out;
  for (std::size_t q = 0; q < i.size(); ++q) {
    MultiIndexK t(i.begin(), i.end());
    t[q] = j;
    out.push_back(std::move(t));
  }
  return out;
}

/// Signature of the isomorphism type of `tuple` in g: equality pattern,
/// vertex colors (exact bits) and the adjacency pattern over positions.
inline Signature isomorphism_type(const Graph& g, std::span<const std::size_t> tuple) {
  const std::size_t k = tuple.size(), e = g.color_width();
  Signature s{detail::kInitialTag, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(e)};
  for (std::size_t q = 0; q < k; ++q)
    for (std::size_t r = 0; r < k; ++r) s.push_back(tuple[q] == tuple[r]);
  for (std::size_t q = 0; q < k; ++q)
    for (double x : g.color(tuple[q])) detail::append_double_bits(s, x);
  for (std::size_t q = 0; q < k; ++q)
    for (std::size_t r = 0; r < k; ++r) s.push_back(g.adjacent(tuple[r], tuple[q]));
  return s;
}

/// Initial colorings of several graphs against one interner.
inline std::vector<TupleColoring> initial_colorings(std::span<const Graph* const> graphs, std::size_t k,
                                                    ColorInterner& interner, RefineOptions opts = {}) {
  detail::require(k >= 1, "k must be at least 1");
  std::vector<std::size_t> ks, ns;
  std::vector<Signature> sigs;
  for (auto* g : graphs) {
    const std::size_t count = detail::tuple_count(g->n(), k);
    const std::size_t base = sigs.size();
    sigs.resize(base + count);
    TupleColoring shape{k, g->n(), {}};
    parallel_for(count, opts.threads, [&](std::size_t idx) { sigs[base + idx] = isomorphism_type(*g, shape.tuple(idx)); });
    ks.push_back(k);
    ns.push_back(g->n());
  }
  return detail::assemble(ks, ns, sigs, interner);
}

inline TupleColoring initial_coloring(const Graph& g, std::size_t k, ColorInterner& interner, RefineOptions opts = {}) {
  const Graph* gs[] = {&g};
  return initial_colorings(gs, k, interner, opts).front();
}

/// k-WL signature: old color followed by the sorted multiset of old colors
/// over N_j(i) for each position j.
inline Signature wl_signature(const TupleColoring& c, std::size_t idx) {
  const std::size_t n = c.n, k = c.k;
  Signature s;
  s.reserve(1 + k * n);
  s.push_back(c.colors[idx]);
  std::vector<std::uint32_t> bag(n);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t stride = detail::ipow(n, k - 1 - j);
    const std::size_t base = idx - ((idx / stride) % n) * stride;
    for (std::size_t v = 0; v < n; ++v) bag[v] = c.colors[base + v * stride];
    std::sort(bag.begin(), bag.end());
    s.insert(s.end(), bag.begin(), bag.end());
  }
  return s;
}

/// k-FWL signature: old color followed by the sorted multiset over vertices w
/// of the ordered k-tuple of old colors along N^F_w(i).
inline Signature fwl_signature(const TupleColoring& c, std::size_t idx) {
  const std::size_t n = c.n, k = c.k;
  std::vector<std::size_t> strides(k);
  for (std::size_t q = k, s = 1; q-- > 0; s *= n) strides[q] = s;
  std::vector<std::uint32_t> rows(n * k);
  for (std::size_t w = 0; w < n; ++w)
    for (std::size_t q = 0; q < k; ++q) {
      const std::size_t digit = (idx / strides[q]) % n;
      rows[w * k + q] = c.colors[idx - digit * strides[q] + w * strides[q]];
    }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return std::lexicographical_compare(rows.begin() + a * k, rows.begin() + (a + 1) * k, rows.begin() + b * k,
                                        rows.begin() + (b + 1) * k);
  });
  Signature s;
  s.reserve(1 + n * k);
  s.push_back(c.colors[idx]);
  for (auto w : order) s.insert(s.end(), rows.begin() + w * k, rows.begin() + (w + 1) * k);
  return s;
}

namespace detail {

template <typename SigFn>
std::vector<TupleColoring> step_all(std::span<const TupleColoring> cs, ColorInterner& interner, RefineOptions opts,
                                    SigFn&& sig) {
  std::vector<std::size_t> ks, ns;
  std::vector<Signature> sigs;
  for (std::size_t g = 0; g < cs.size(); ++g) {
    const auto& c = cs[g];
    const std::size_t base = sigs.size();
    sigs.resize(base + c.colors.size());
    parallel_for(c.colors.size(), opts.threads, [&](std::size_t idx) { sigs[base + idx] = sig(g, c, idx); });
    ks.push_back(c.k);
    ns.push_back(c.n);
  }
  return assemble(ks, ns, sigs, interner);
}

}  // namespace detail

/// One k-WL round over several colorings sharing an interner (k >= 2).
inline std::vector<TupleColoring> wl_step(std::span<const TupleColoring> cs, ColorInterner& interner,
                                          RefineOptions opts = {}) {
  for (const auto& c : cs) detail::require(c.k >= 2, "wl_step requires k >= 2 (use color refinement for k = 1)");
  return detail::step_all(cs, interner, opts,
                          [](std::size_t, const TupleColoring& c, std::size_t idx) { return wl_signature(c, idx); });
}

inline TupleColoring wl_step(const TupleColoring& c, ColorInterner& interner, RefineOptions opts = {}) {
  return wl_step(std::span<const TupleColoring>(&c, 1), interner, opts).front();
}

/// One k-FWL round over several colorings sharing an interner (k >= 2).
inline std::vector<TupleColoring> fwl_step(std::span<const TupleColoring> cs, ColorInterner& interner,
                                           RefineOptions opts = {}) {
  for (const auto& c : cs) detail::require(c.k >= 2, "fwl_step requires k >= 2");
  return detail::step_all(cs, interner, opts,
                          [](std::size_t, const TupleColoring& c, std::size_t idx) { return fwl_signature(c, idx); });
}

inline TupleColoring fwl_step(const TupleColoring& c, ColorInterner& interner, RefineOptions opts = {}) {
  return fwl_step(std::span<const TupleColoring>(&c, 1), interner, opts).front();
}

/// One color-refinement round: (own color, sorted neighbor colors).
inline std::vector<TupleColoring> cr1_step(std::span<const Graph* const> graphs, std::span<const TupleColoring> cs,
                                           ColorInterner& interner, RefineOptions opts = {}) {
  detail::require(graphs.size() == cs.size(), "cr1_step: one coloring per graph");
  return detail::step_all(cs, interner, opts, [&](std::size_t g, const TupleColoring& c, std::size_t v) {
    detail::require(c.k == 1, "cr1_step requires vertex colorings");
    Signature s{c.colors[v]};
    std::vector<std::uint32_t> nb;
    for (std::size_t u = 0; u < c.n; ++u)
      if (graphs[g]->adjacent(v, u)) nb.push_back(c.colors[u]);
    std::sort(nb.begin(), nb.end());
    s.insert(s.end(), nb.begin(), nb.end());
    return s;
  });
}

/// (g·C)_{g(i)} = C_i.
inline TupleColoring permute_coloring(const TupleColoring& c, const Permutation& g) {
  detail::require(g.size() == c.n, "permutation size must equal vertex count");
  TupleColoring out{c.k, c.n, std::vector<ColorId>(c.colors.size())};
  for (std::size_t idx = 0; idx < c.colors.size(); ++idx) {
    auto t = c.tuple(idx);
    for (auto& v : t) v = g(v);
    out.colors[out.index(t)] = c.colors[idx];
  }
  return out;
}

inline std::size_t distinct_colors(const TupleColoring& c) {
  auto v = c.colors;
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

/// True iff the two colorings induce the same partition of tuples.
inline bool same_partition(const TupleColoring& a, const TupleColoring& b) {
  if (a.colors.size() != b.colors.size()) return false;
  std::map<ColorId, ColorId> fwd, bwd;
  for (std::size_t i = 0; i < a.colors.size(); ++i) {
    auto [f, fnew] = fwd.emplace(a.colors[i], b.colors[i]);
    auto [r, rnew] = bwd.emplace(b.colors[i], a.colors[i]);
    if (f->second != b.colors[i] || r->second != a.colors[i]) return false;
  }
  return true;
}

/// True iff every class of `fine` lies inside a class of `coarse`.
inline bool refines(const TupleColoring& fine, const TupleColoring& coarse) {
  if (fine.colors.size() != coarse.colors.size()) return false;
  std::map<ColorId, ColorId> parent;
  for (std::size_t i = 0; i < fine.colors.size(); ++i) {
    auto [it, fresh] = parent.emplace(fine.colors[i], coarse.colors[i]);
    if (it->second != coarse.colors[i]) return false;
  }
  return true;
}

using Histogram = std::vector<std::pair<ColorId, std::size_t>>;

inline Histogram histogram(const TupleColoring& c) {
  std::map<ColorId, std::size_t> counts;
  for (auto id : c.colors) ++counts[id];
  return Histogram(counts.begin(), counts.end());
}

/// Vertex colorings of one graph after rounds 0, 1, ..., up to and including
/// the first round whose partition equals its predecessor's.
inline std::vector<TupleColoring> color_refinement_1wl(const Graph& g, ColorInterner& interner, RefineOptions opts = {}) {
  const Graph* gs[] = {&g};
  std::vector<TupleColoring> seq{initial_coloring(g, 1, interner, opts)};
  while (true) {
    auto next = cr1_step(gs, std::span<const TupleColoring>(&seq.back(), 1), interner, opts).front();
    const bool stable = distinct_colors(next) == distinct_colors(seq.back());
    seq.push_back(std::move(next));
    if (stable) return seq;
  }
}

struct Verdict {
  enum class Outcome { Distinguished, Indistinguishable };
  Outcome outcome = Outcome::Indistinguishable;
  /// First round with differing histograms, or the round at which both
  /// partitions were found stable.
  std::size_t round = 0;

  bool distinguished() const noexcept { return outcome == Outcome::Distinguished; }
  static Verdict distinguished_at(std::size_t r) { return {Outcome::Distinguished, r}; }
  static Verdict stable_at(std::size_t r) { return {Outcome::Indistinguishable, r}; }
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct Comparison {
  Variant variant = Variant::WL;
  std::size_t k = 0;
  Verdict verdict;
  /// histograms[r][0 or 1]: color histogram of each graph after round r.
  std::vector<std::array<Histogram, 2>> histograms;
};

namespace detail {

inline void check_variant(std::size_t k, Variant variant) {
  detail::require(k >= 1, "k must be at least 1");
  if (variant == Variant::CR1) detail::require(k == 1, "color refinement (cr1) requires k = 1");
  else detail::require(k >= 2, "k-WL and k-FWL require k >= 2; use variant cr1 for k = 1");
}

/// One refinement round of `variant` over all colorings.
inline std::vector<TupleColoring> refine_round(Variant variant, std::span<const Graph* const> graphs,
                                               std::span<const TupleColoring> cs, ColorInterner& interner,
                                               RefineOptions opts) {
  switch (variant) {
    case Variant::WL: return wl_step(cs, interner, opts);
    case Variant::FWL: return fwl_step(cs, interner, opts);
    case Variant::CR1: return cr1_step(graphs, cs, interner, opts);
  }
  throw Error("unreachable");
}

}  // namespace detail

/// Refines both graphs jointly against one interner, comparing histograms
/// after every round. Returns Distinguished at the first differing round,
/// otherwise Indistinguishable once both partitions stop changing in the same
/// round. Graphs with different vertex counts are Distinguished at round 0.
inline Comparison compare_graphs(const Graph& a, const Graph& b, std::size_t k, Variant variant,
                                 RefineOptions opts = {}) {
  detail::check_variant(k, variant);
  Comparison result{variant, k, {}, {}};
  if (a.n() != b.n()) {
    result.verdict = Verdict::distinguished_at(0);
    return result;
  }
  const Graph* gs[] = {&a, &b};
  ColorInterner interner;
  auto cs = initial_colorings(gs, k, interner, opts);
  const std::size_t cap = detail::tuple_count(a.n(), k) + 1;
  for (std::size_t round = 0;; ++round) {
    result.histograms.push_back({histogram(cs[0]), histogram(cs[1])});
    if (result.histograms.back()[0] != result.histograms.back()[1]) {
      result.verdict = Verdict::distinguished_at(round);
      return result;
    }
    if (round == cap) throw Error("refinement did not stabilize within n^k + 1 rounds");
    auto next = detail::refine_round(variant, gs, cs, interner, opts);
    const bool stable = distinct_colors(next[0]) == distinct_colors(cs[0]) &&
                        distinct_colors(next[1]) == distinct_colors(cs[1]);
    cs = std::move(next);
    if (stable) {
      result.histograms.push_back({histogram(cs[0]), histogram(cs[1])});
      result.verdict = result.histograms.back()[0] == result.histograms.back()[1]
                           ? Verdict::stable_at(round + 1)
                           : Verdict::distinguished_at(round + 1);
      return result;
    }
    interner.forget_history();
  }
}

/// Per-graph refinement trace from a joint run over many graphs.
struct RefinementProfile {
  std::size_t n = 0;
  /// First round whose partition equals the previous round's.
  std::size_t stable_round = 0;
  /// Id of the color histogram after each round; ids are comparable across
  /// all graphs of the same batch.
  std::vector<std::uint32_t> histogram_ids;
};

/// Refines every graph jointly until all partitions are stable. Color
/// equality across graphs at a given round does not depend on which other
/// graphs are in the batch, so `verdict_from_profiles` reproduces the
/// pairwise `compare_graphs` verdict for any two members.
inline std::vector<RefinementProfile> refine_profiles(std::span<const Graph> graphs, std::size_t k, Variant variant,
                                                      RefineOptions opts = {}) {
  detail::check_variant(k, variant);
  std::vector<const Graph*> gs;
  for (const auto& g : graphs) gs.push_back(&g);
  std::vector<RefinementProfile> out(graphs.size());
  for (std::size_t g = 0; g < graphs.size(); ++g) out[g].n = graphs[g].n();

  ColorInterner interner;
  auto cs = initial_colorings(gs, k, interner, opts);
  auto record = [&] {
    std::map<Histogram, std::uint32_t> ids;
    for (std::size_t g = 0; g < cs.size(); ++g) {
      auto [it, fresh] = ids.emplace(histogram(cs[g]), static_cast<std::uint32_t>(ids.size()));
      out[g].histogram_ids.push_back(it->second);
    }
  };
  record();
  std::vector<std::size_t> counts(cs.size());
  for (std::size_t g = 0; g < cs.size(); ++g) counts[g] = distinct_colors(cs[g]);
  std::size_t pending = cs.size();
  for (std::size_t round = 1; pending > 0; ++round) {
    interner.forget_history();
    cs = detail::refine_round(variant, gs, cs, interner, opts);
    record();
    for (std::size_t g = 0; g < cs.size(); ++g) {
      const std::size_t c = distinct_colors(cs[g]);
      if (out[g].stable_round == 0 && c == counts[g]) {
        out[g].stable_round = round;
        --pending;
      }
      counts[g] = c;
    }
  }
  return out;
}

inline Verdict verdict_from_profiles(const RefinementProfile& a, const RefinementProfile& b) {
  if (a.n != b.n) return Verdict::distinguished_at(0);
  const std::size_t rounds = std::min(a.histogram_ids.size(), b.histogram_ids.size());
  for (std::size_t r = 0; r < rounds; ++r)
    if (a.histogram_ids[r] != b.histogram_ids[r]) return Verdict::distinguished_at(r);
  return Verdict::stable_at(std::max(a.stable_round, b.stable_round));
}

inline nlohmann::json to_json(const Verdict& v) {
  return {{"outcome", v.distinguished() ? "distinguished" : "indistinguishable"}, {"round", v.round}};
}

/// {variant, k, rounds, verdict, histograms}; histograms[r] holds one
/// [[colorId, count], ...] list per graph.
inline nlohmann::json to_json(const Comparison& c) {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& round : c.histograms) {
    nlohmann::json pair = nlohmann::json::array();
    for (const auto& h : round) {
      nlohmann::json entries = nlohmann::json::array();
      for (auto [id, count] : h) entries.push_back({id, count});
      pair.push_back(std::move(entries));
    }
    hist.push_back(std::move(pair));
  }
  return {{"variant", to_string(c.variant)},
          {"k", c.k},
          {"rounds", c.histograms.empty() ? 0 : c.histograms.size() - 1},
          {"verdict", to_json(c.verdict)},
          {"histograms", std::move(hist)}};
}

}  // namespace wlnet
