// wlnet: command-line driver for the WL hierarchy, the triangle network,
// training experiments and the feature_matmul benchmark.
//
// Exit codes: 0 success / indistinguishable, 1 distinguished or failed
// check, 2 usage or input error, 3 numeric failure.

#include <sys/resource.h>

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wlnet/bench.hpp"
#include "wlnet/corpus.hpp"
#include "wlnet/generators.hpp"
#include "wlnet/graph_io.hpp"
#include "wlnet/net.hpp"
#include "wlnet/parallel.hpp"
#include "wlnet/training.hpp"
#include "wlnet/wl.hpp"

namespace {

using namespace wlnet;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitDistinguished = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct UsageError : Error {
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Graph load_graph(const std::string& path, const std::string& format) {
  const std::string text = read_file(path);
  try {
    if (format == "json") return parse_graph_json(text);
    // graph6 files may hold one graph per line; take the first.
    const auto end = text.find('\n');
    return parse_graph6(std::string_view(text).substr(0, end));
  } catch (const Error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  return out;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

// compare

struct CompareArgs {
  std::string a, b;
  std::size_t k = 2;
  std::string variant = "wl";
  std::string format = "graph6";
  bool histograms = false;
};

int run_compare(const CompareArgs& args, unsigned threads) {
  const Variant v = parse_variant(args.variant);
  const Graph ga = load_graph(args.a, args.format), gb = load_graph(args.b, args.format);
  auto cmp = compare_graphs(ga, gb, args.k, v, RefineOptions{threads});
  json out = to_json(cmp);
  if (!args.histograms) out.erase("histograms");
  out["config"] = {{"a", args.a}, {"b", args.b}, {"k", args.k}, {"variant", args.variant},
                   {"format", args.format}, {"threads", threads}};
  print(out);
  return cmp.verdict.distinguished() ? kExitDistinguished : kExitOk;
}

// corpus

struct CorpusArgs {
  std::size_t n_max = 6;
  std::uint64_t seed = 0;
  long long pairs = -1;  // -1: every same-size pair
  std::vector<std::size_t> k_list{1, 2, 3};
  std::vector<std::string> variant_list{"cr1", "wl", "fwl"};
  bool check = false;
  bool include_srg = false;
  std::string out;
};

struct Algorithm {
  std::size_t k;
  Variant variant;
  std::string name() const { return to_string(variant) + "-" + std::to_string(k); }
  bool operator<(const Algorithm& o) const { return std::pair(k, variant) < std::pair(o.k, o.variant); }
};

int run_corpus(const CorpusArgs& args, unsigned threads) {
  if (args.n_max < 1 || args.n_max > 8) throw UsageError("--n-max must be in [1, 8]");
  std::set<Algorithm> algos;
  for (auto k : args.k_list) {
    if (k < 1 || k > 3) throw UsageError("--k-list entries must be in [1, 3]");
    for (const auto& name : args.variant_list) {
      const Variant v = parse_variant(name);
      if ((v == Variant::CR1) == (k == 1)) algos.insert({k, v});
    }
  }

  // Corpus: all graphs up to n_max; pairs: same-size pairs, optionally a
  // seeded sample of them, then the optional rook/Shrikhande pair.
  auto graphs = enumerate_graphs_up_to(args.n_max);
  auto pairs = same_size_pairs(graphs);
  if (args.pairs >= 0 && static_cast<std::size_t>(args.pairs) < pairs.size()) {
    Rng rng(args.seed);
    shuffle(pairs, rng);
    pairs.resize(static_cast<std::size_t>(args.pairs));
    std::sort(pairs.begin(), pairs.end());
  }
  if (args.include_srg) {
    graphs.push_back(rook_4x4());
    graphs.push_back(shrikhande());
    pairs.emplace_back(graphs.size() - 2, graphs.size() - 1);
  }
  std::vector<bool> used(graphs.size(), false);
  for (auto [i, j] : pairs) used[i] = used[j] = true;
  std::vector<Graph> subset;
  std::vector<std::size_t> slot(graphs.size(), SIZE_MAX);
  for (std::size_t g = 0; g < graphs.size(); ++g)
    if (used[g]) {
      slot[g] = subset.size();
      subset.push_back(graphs[g]);
    }

  std::map<Algorithm, std::vector<RefinementProfile>> profiles;
  for (const auto& alg : algos) profiles[alg] = refine_profiles(subset, alg.k, alg.variant, RefineOptions{threads});

  std::ofstream csv;
  if (!args.out.empty()) {
    csv = open_out(args.out);
    csv << "pair,graph_a,graph_b,n,algorithm,k,variant,outcome,round\n";
  }
  std::map<std::string, std::size_t> distinguished;
  std::size_t prop1 = 0, prop2 = 0, mono = 0, prop1_checked = 0, prop2_checked = 0, mono_checked = 0;
  const Algorithm cr1{1, Variant::CR1}, wl2{2, Variant::WL}, fwl2{2, Variant::FWL}, wl3{3, Variant::WL};
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    std::map<Algorithm, Verdict> verdicts;
    for (const auto& alg : algos) {
      const auto& prof = profiles[alg];
      const Verdict v = verdict_from_profiles(prof[slot[i]], prof[slot[j]]);
      verdicts[alg] = v;
      distinguished[alg.name()] += v.distinguished();
      if (csv.is_open())
        csv << p << ',' << write_graph6(graphs[i]) << ',' << write_graph6(graphs[j]) << ',' << graphs[i].n() << ','
            << alg.name() << ',' << alg.k << ',' << to_string(alg.variant) << ','
            << (v.distinguished() ? "distinguished" : "indistinguishable") << ',' << v.round << '\n';
    }
    auto has = [&](const Algorithm& a) { return verdicts.count(a) > 0; };
    auto dist = [&](const Algorithm& a) { return verdicts.at(a).distinguished(); };
    if (has(cr1) && has(wl2)) {
      ++prop1_checked;
      prop1 += dist(cr1) != dist(wl2);
    }
    if (has(fwl2) && has(wl3)) {
      ++prop2_checked;
      prop2 += dist(fwl2) != dist(wl3);
    }
    if (has(wl2) && has(wl3)) {
      ++mono_checked;
      mono += dist(wl2) && !dist(wl3);
    }
  }

  json algo_names = json::array();
  for (const auto& a : algos) algo_names.push_back(a.name());
  json out{{"config",
            {{"n_max", args.n_max}, {"seed", args.seed}, {"pairs", args.pairs}, {"k_list", args.k_list},
             {"variant_list", args.variant_list}, {"check", args.check}, {"include_srg", args.include_srg},
             {"out", args.out}, {"threads", threads}}},
           {"graphs", subset.size()},
           {"pairs", pairs.size()},
           {"algorithms", algo_names},
           {"distinguished", distinguished}};
  bool failed = false;
  if (args.check) {
    out["check"] = {{"cr1_vs_wl2", {{"pairs", prop1_checked}, {"disagreements", prop1}}},
                    {"fwl2_vs_wl3", {{"pairs", prop2_checked}, {"disagreements", prop2}}},
                    {"wl2_to_wl3_monotone", {{"pairs", mono_checked}, {"violations", mono}}}};
    failed = prop1 + prop2 + mono > 0;
    out["check"]["passed"] = !failed;
  }
  print(out);
  return failed ? kExitDistinguished : kExitOk;
}

// triangles

int run_triangles(const std::vector<std::string>& files, const std::string& format) {
  json out{{"config", {{"files", files}, {"format", format}}}};
  bool agree = true;
  const char* keys[] = {"a", "b"};
  for (std::size_t f = 0; f < files.size(); ++f) {
    const Graph g = load_graph(files[f], format);
    auto [spec, params] = handcrafted_triangle_model(g.color_width());
    const double model = model_forward(g, spec, params)[0];
    const auto direct = trace_adjacency_cubed(g);
    out[keys[f]] = direct;
    out[std::string("model_output_") + keys[f]] = model;
    agree = agree && model == static_cast<double>(direct);
  }
  out["agree"] = agree;
  print(out);
  return agree ? kExitOk : kExitNumeric;
}

// train

struct TrainArgs {
  std::string dataset = "cycle-union";
  std::vector<std::size_t> m_list{3, 4, 5};
  std::size_t blocks = 2;
  std::size_t width = 16;
  std::size_t depth = 1;
  std::size_t epochs = 500;
  double lr = TrainConfig{}.learning_rate;
  double decay = 1.0;
  std::size_t decay_every = 20;
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  std::string pool = "max";
  std::string head = "suffix1";
  std::string baseline;
  std::string out;
  std::string params_out;
  std::string spec_out;
};

int run_train(const TrainArgs& args, unsigned threads) {
  if (args.dataset != "cycle-union") throw UsageError("unknown dataset: " + args.dataset);
  if (!args.baseline.empty() && args.baseline != "mlp-only") throw UsageError("unknown baseline: " + args.baseline);
  if (args.pool != "max" && args.pool != "sum") throw UsageError("--pool must be max or sum");
  if (args.head != "suffix1" && args.head != "suffix2") throw UsageError("--head must be suffix1 or suffix2");
  if (args.decay < 0.5 || args.decay > 1.0) throw UsageError("--decay must be in [0.5, 1]");
  if (args.lr < 0) throw UsageError("--lr must be >= 0");

  const auto data = make_cycle_union_dataset(args.m_list, args.seed);
  ClassifierConfig cc;
  cc.input_channels = 2;
  cc.blocks = args.blocks;
  cc.width = args.width;
  cc.mlp_depth = args.depth;
  cc.matmul = args.baseline.empty();
  cc.suffix2 = args.head == "suffix2";
  cc.pool = args.pool == "max" ? Pool::Max : Pool::Sum;
  const auto spec = make_classifier(cc);
  TrainConfig tc;
  tc.learning_rate = args.lr;
  tc.decay = args.decay;
  tc.decay_every = args.decay_every;
  tc.epochs = args.epochs;
  tc.batch_size = args.batch_size;
  tc.seed = args.seed;
  tc.threads = threads;
  const auto result = train(spec, init_params(spec, args.seed), data, tc);

  if (!args.out.empty()) {
    auto f = open_out(args.out);
    write_history_csv(f, result.history);
  }
  if (!args.params_out.empty()) {
    auto f = open_out(args.params_out);
    write_params(f, result.params);
  }
  if (!args.spec_out.empty()) {
    auto f = open_out(args.spec_out);
    f << model_spec_to_json(spec).dump(2) << '\n';
  }
  std::size_t first_perfect = SIZE_MAX;
  for (const auto& row : result.history)
    if (row.accuracy == 1.0) {
      first_perfect = row.epoch;
      break;
    }
  json out{{"config",
            {{"dataset", args.dataset}, {"m_list", args.m_list}, {"blocks", args.blocks}, {"width", args.width},
             {"depth", args.depth}, {"epochs", args.epochs}, {"lr", args.lr}, {"decay", args.decay},
             {"decay_every", args.decay_every}, {"batch_size", args.batch_size}, {"seed", args.seed},
             {"pool", args.pool}, {"head", args.head}, {"baseline", args.baseline.empty() ? "none" : args.baseline},
             {"out", args.out}, {"params_out", args.params_out}, {"spec_out", args.spec_out}, {"threads", threads}}},
           {"parameters", result.params.size()},
           {"final_epoch", result.history.back().epoch},
           {"final_loss", result.history.back().loss},
           {"final_accuracy", result.history.back().accuracy},
           {"first_perfect_epoch", first_perfect == SIZE_MAX ? json() : json(first_perfect)}};
  print(out);
  return kExitOk;
}

// bench

struct BenchArgs {
  std::string op = "feature-matmul";
  std::vector<std::size_t> sizes{64, 128, 256, 512};
  std::size_t reps = 5;
  std::size_t channels = 1;
  std::uint64_t seed = 0;
  std::string out;
};

long max_rss_kb() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return u.ru_maxrss;
}

int run_bench(const BenchArgs& args, unsigned threads) {
  if (args.op != "feature-matmul") throw UsageError("unknown --op: " + args.op);
  if (args.sizes.empty() || !std::is_sorted(args.sizes.begin(), args.sizes.end()))
    throw UsageError("--sizes must be non-empty and ascending");
  std::vector<BenchRow> rows;
  std::vector<long> rss;
  for (auto n : args.sizes) {
    rows.push_back(bench_feature_matmul(n, args.channels, args.reps, args.seed, threads));
    rss.push_back(max_rss_kb());
  }
  std::ofstream csv;
  if (!args.out.empty()) {
    csv = open_out(args.out);
    csv << "op,n,channels,reps,median_seconds,tensor_bytes,max_rss_kb\n";
    csv.precision(9);
    for (std::size_t i = 0; i < rows.size(); ++i)
      csv << args.op << ',' << rows[i].n << ',' << rows[i].channels << ',' << rows[i].reps << ','
          << rows[i].median_seconds << ',' << rows[i].tensor_bytes << ',' << rss[i] << '\n';
  }
  json timings = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i)
    timings.push_back({{"n", rows[i].n}, {"median_seconds", rows[i].median_seconds},
                       {"tensor_bytes", rows[i].tensor_bytes}, {"max_rss_kb", rss[i]}});
  json out{{"config",
            {{"op", args.op}, {"sizes", args.sizes}, {"reps", args.reps}, {"channels", args.channels},
             {"seed", args.seed}, {"out", args.out}, {"threads", threads}}},
           {"timings", timings},
           {"loglog_slope", rows.size() >= 2 ? json(fit_loglog_slope(rows)) : json()}};
  print(out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weisfeiler-Lehman refinement, multiset encodings and matrix-product graph networks"};
  app.require_subcommand(1);
  unsigned threads = default_thread_count();
  app.add_option("--threads", threads, "Worker threads for intra-op parallelism (default: $WLNET_THREADS or 1)")
      ->check(CLI::PositiveNumber);

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Compare two graphs with CR1, k-WL or k-FWL");
  c->add_option("file_a", cmp.a)->required();
  c->add_option("file_b", cmp.b)->required();
  c->add_option("--k", cmp.k, "Tuple order")->capture_default_str();
  c->add_option("--variant", cmp.variant, "wl, fwl or cr1")->capture_default_str();
  c->add_option("--format", cmp.format, "graph6 or json")
      ->check(CLI::IsMember({"graph6", "json"}))
      ->capture_default_str();
  c->add_flag("--histograms", cmp.histograms, "Include per-round color histograms");

  CorpusArgs corp;
  auto* co = app.add_subcommand("corpus", "Run every algorithm over all graph pairs up to n-max");
  co->add_option("--n-max", corp.n_max)->capture_default_str();
  co->add_option("--seed", corp.seed, "Seed for pair sampling")->capture_default_str();
  co->add_option("--pairs", corp.pairs, "Number of sampled pairs (-1: all)")->capture_default_str();
  co->add_option("--k-list", corp.k_list)->delimiter(',')->capture_default_str();
  co->add_option("--variant-list", corp.variant_list)->delimiter(',')->capture_default_str();
  co->add_flag("--check", corp.check, "Verify cr1 = 2-wl, 2-fwl = 3-wl and 2-wl => 3-wl");
  co->add_flag("--include-srg", corp.include_srg, "Add the 4x4 rook graph vs Shrikhande pair");
  co->add_option("--out", corp.out, "CSV output file");

  std::vector<std::string> tri_files;
  std::string tri_format = "graph6";
  auto* tr = app.add_subcommand("triangles", "tr(A^3) directly and through the hand-built network");
  tr->add_option("files", tri_files)->required()->expected(1, 2);
  tr->add_option("--format", tri_format)->check(CLI::IsMember({"graph6", "json"}))->capture_default_str();

  TrainArgs ta;
  auto* t = app.add_subcommand("train", "Train on the cycle-union dataset");
  t->add_option("--dataset", ta.dataset)->capture_default_str();
  t->add_option("--m-list", ta.m_list)->delimiter(',')->capture_default_str();
  t->add_option("--blocks", ta.blocks)->check(CLI::PositiveNumber)->capture_default_str();
  t->add_option("--width", ta.width)->check(CLI::PositiveNumber)->capture_default_str();
  t->add_option("--depth", ta.depth, "Weight matrices per m1/m2")->check(CLI::PositiveNumber)->capture_default_str();
  t->add_option("--epochs", ta.epochs)->capture_default_str();
  t->add_option("--lr", ta.lr)->capture_default_str();
  t->add_option("--decay", ta.decay, "Step decay factor in [0.5, 1]")->capture_default_str();
  t->add_option("--decay-every", ta.decay_every)->check(CLI::PositiveNumber)->capture_default_str();
  t->add_option("--batch-size", ta.batch_size, "0: full batch")->capture_default_str();
  t->add_option("--seed", ta.seed)->capture_default_str();
  t->add_option("--pool", ta.pool)->capture_default_str();
  t->add_option("--head", ta.head)->capture_default_str();
  t->add_option("--baseline", ta.baseline, "mlp-only: drop the matrix products");
  t->add_option("--out", ta.out, "History CSV");
  t->add_option("--params-out", ta.params_out, "Trained parameters (binary)");
  t->add_option("--spec-out", ta.spec_out, "Model description (JSON)");

  BenchArgs ba;
  auto* b = app.add_subcommand("bench", "Time feature_matmul over a range of sizes");
  b->add_option("--op", ba.op)->capture_default_str();
  b->add_option("--sizes", ba.sizes)->delimiter(',')->capture_default_str();
  b->add_option("--reps", ba.reps)->check(CLI::PositiveNumber)->capture_default_str();
  b->add_option("--channels", ba.channels)->check(CLI::PositiveNumber)->capture_default_str();
  b->add_option("--seed", ba.seed)->capture_default_str();
  b->add_option("--out", ba.out, "CSV output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c->parsed()) return run_compare(cmp, threads);
    if (co->parsed()) return run_corpus(corp, threads);
    if (tr->parsed()) return run_triangles(tri_files, tri_format);
    if (t->parsed()) return run_train(ta, threads);
    if (b->parsed()) return run_bench(ba, threads);
  } catch (const NumericError& e) {
    std::cerr << "wlnet: numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "wlnet: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
