#include "wlnet/net.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "test_util.hpp"
#include "wlnet/generators.hpp"
#include "wlnet/multiset.hpp"

namespace wlnet {
namespace {

DenseTensor3 random_tensor(std::size_t n, std::size_t c, Rng& rng) {
  DenseTensor3 t(n, c);
  for (auto& x : t.data()) x = uniform(rng, -1, 1);
  return t;
}

double max_rel_diff(std::span<const double> a, std::span<const double> b) {
  EXPECT_EQ(a.size(), b.size());
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]) / (std::max(std::abs(a[i]), std::abs(b[i])) + 1e-12));
  return m;
}

MLPSpec linear(std::size_t in, std::size_t out) { return MLPSpec::make(in, {}, out); }

ModelSpec random_spec(std::size_t in, bool suffix2, Pool pool) {
  ModelSpec spec;
  spec.input_channels = in;
  spec.pool = pool;
  spec.output_dim = 2;
  spec.blocks.push_back({MLPSpec::make(in, {4}, 3), MLPSpec::make(in, {4}, 3), std::nullopt, std::nullopt, true});
  const std::size_t c1 = in + 3;
  spec.blocks.push_back({MLPSpec::make(c1, {4}, 3), MLPSpec::make(c1, {4}, 3), MLPSpec::make(c1, {}, 2),
                         MLPSpec::make(5, {}, 4), true});
  if (suffix2)
    spec.head = SuffixII{{linear(2 * c1, 2), linear(8, 2)}};
  else
    spec.head = SuffixI{MLPSpec::make(8, {6}, 2)};
  return spec;
}

TEST(MlpTest, ParameterCount) {
  auto m = MLPSpec::make(3, {5, 4}, 2);
  EXPECT_EQ(m.depth(), 3u);
  EXPECT_EQ(m.parameter_count(), 4u * 5 + 6 * 4 + 5 * 2);
  EXPECT_EQ(m.activations, (std::vector<Activation>{Activation::ReLU, Activation::ReLU, Activation::Identity}));
  MLPSpec bad{0, {}, 1, {Activation::Identity}};
  EXPECT_THROW(bad.validate(), Error);
  MLPSpec missing{1, {2}, 1, {Activation::ReLU}};
  EXPECT_THROW(missing.validate(), Error);
}

TEST(MlpTest, IdentityAndConstant) {
  Rng rng(1);
  auto t = random_tensor(4, 3, rng);
  auto m = linear(3, 3);
  std::vector<double> p(m.parameter_count(), 0.0);
  for (std::size_t i = 0; i < 3; ++i) p[i * 3 + i] = 1.0;
  EXPECT_EQ(apply_mlp_featurewise(t, m, p), t);

  auto c = linear(3, 2);
  std::vector<double> q(c.parameter_count(), 0.0);
  q[6] = 2.5;
  q[7] = -1.0;
  auto out = apply_mlp_featurewise(t, c, q);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(out(i, j, 0), 2.5);
      EXPECT_EQ(out(i, j, 1), -1.0);
    }
  EXPECT_THROW(apply_mlp_featurewise(random_tensor(2, 2, rng), m, p), Error);
}

TEST(MlpTest, ReluClampsNegatives) {
  DenseTensor3 t(1, 1, std::vector<double>{-2.0});
  MLPSpec m{1, {}, 1, {Activation::ReLU}};
  EXPECT_EQ(apply_mlp_featurewise(t, m, std::vector<double>{1.0, 0.5})(0, 0, 0), 0.0);
  EXPECT_EQ(apply_mlp_featurewise(t, m, std::vector<double>{-1.0, 0.5})(0, 0, 0), 2.5);
}

TEST(MlpTest, Equivariant) {
  Rng rng(2);
  auto m = MLPSpec::make(3, {5}, 2);
  std::vector<double> p(m.parameter_count());
  for (auto& x : p) x = uniform(rng, -1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    auto t = random_tensor(5, 3, rng);
    auto g = Permutation::random(5, rng);
    EXPECT_EQ(apply_mlp_featurewise(permute_tensor(t, g), m, p), permute_tensor(apply_mlp_featurewise(t, m, p), g));
  }
}

TEST(FeatureMatmulTest, CycleSquared) {
  auto a = graph_to_tensor(cycle(6));
  auto w = feature_matmul(a, a);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(w(i, j, 0), static_cast<double>(testing::common_neighbours(cycle(6), i, j)));
  EXPECT_EQ(w(0, 0, 0), 2.0);
}

TEST(FeatureMatmulTest, IdentityChannel) {
  Rng rng(3);
  auto m = random_tensor(5, 2, rng);
  DenseTensor3 id(5, 2);
  for (std::size_t i = 0; i < 5; ++i) id(i, i, 0) = id(i, i, 1) = 1.0;
  EXPECT_EQ(feature_matmul(id, m), m);
  EXPECT_EQ(feature_matmul(m, id), m);
  EXPECT_THROW(feature_matmul(m, random_tensor(4, 2, rng)), Error);
  EXPECT_THROW(feature_matmul(m, random_tensor(5, 3, rng)), Error);
}

TEST(FeatureMatmulTest, EquivariantAndThreadSafe) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto u = random_tensor(7, 3, rng), v = random_tensor(7, 3, rng);
    auto g = Permutation::random(7, rng);
    EXPECT_LE(max_abs_diff(feature_matmul(permute_tensor(u, g), permute_tensor(v, g)),
                           permute_tensor(feature_matmul(u, v), g)),
              1e-12);
    EXPECT_EQ(feature_matmul(u, v, 3), feature_matmul(u, v, 3));
  }
}

TEST(BlockTest, AdjacencySquared) {
  auto g = cycle(6);
  auto t = graph_to_tensor(g);
  BlockSpec block{linear(1, 1), linear(1, 1), std::nullopt, std::nullopt, true};
  auto out = block_forward(t, block, std::vector<double>{1, 0, 1, 0});
  ASSERT_EQ(out.channels(), 2u);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      EXPECT_EQ(out(i, j, 0), g.adjacent(i, j) ? 1.0 : 0.0);
      EXPECT_EQ(out(i, j, 1), static_cast<double>(testing::common_neighbours(g, i, j)));
    }
}

TEST(BlockTest, ZeroParamsKeepOnlyPassthrough) {
  Rng rng(5);
  auto t = random_tensor(4, 2, rng);
  BlockSpec block{MLPSpec::make(2, {3}, 2), MLPSpec::make(2, {3}, 2), std::nullopt, std::nullopt, true};
  const std::size_t count = block.m1.parameter_count() * 2;
  auto out = block_forward(t, block, std::vector<double>(count, 0.0));
  ASSERT_EQ(out.channels(), 4u);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(out(i, j, 0), t(i, j, 0));
      EXPECT_EQ(out(i, j, 1), t(i, j, 1));
      EXPECT_EQ(out(i, j, 2), 0.0);
      EXPECT_EQ(out(i, j, 3), 0.0);
    }
}

TEST(BlockTest, Equivariant) {
  Rng rng(6);
  BlockSpec block{MLPSpec::make(3, {4}, 2), MLPSpec::make(3, {4}, 2), MLPSpec::make(3, {}, 2),
                  MLPSpec::make(4, {}, 3), true};
  block.validate();
  const std::size_t count = block.m1.parameter_count() * 2 + block.m3->parameter_count() + block.m4->parameter_count();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(count);
    for (auto& x : p) x = uniform(rng, -1, 1);
    auto t = random_tensor(6, 3, rng);
    auto g = Permutation::random(6, rng);
    auto a = block_forward(permute_tensor(t, g), block, p);
    auto b = permute_tensor(block_forward(t, block, p), g);
    EXPECT_LE(max_rel_diff(a.data(), b.data()), 1e-10);
  }
}

TEST(BlockTest, WidthErrors) {
  BlockSpec bad{linear(2, 3), linear(2, 2), std::nullopt, std::nullopt, true};
  EXPECT_THROW(bad.validate(), Error);
  BlockSpec no_m2{linear(2, 3), std::nullopt, std::nullopt, std::nullopt, true};
  EXPECT_THROW(no_m2.validate(), Error);
  BlockSpec bad_m4{linear(2, 3), linear(2, 3), std::nullopt, linear(4, 1), true};
  EXPECT_THROW(bad_m4.validate(), Error);
  BlockSpec ok{linear(2, 3), linear(2, 3), std::nullopt, std::nullopt, true};
  Rng rng(1);
  EXPECT_THROW(block_forward(random_tensor(3, 1, rng), ok, std::vector<double>(18, 0.0)), Error);
}

TEST(PoolTest, Examples) {
  auto a = graph_to_tensor(cycle(6));
  EXPECT_EQ(invariant_pool(a, Pool::Sum), (std::vector<double>{0, 12}));
  EXPECT_EQ(invariant_pool(a, Pool::Max), (std::vector<double>{0, 1}));
  auto id = graph_to_fwl_tensor(empty_graph(5));
  EXPECT_EQ(invariant_pool(id, Pool::Sum), (std::vector<double>{0, 0, 5, 0}));
  DenseTensor3 single(1, 1, std::vector<double>{-3.0});
  EXPECT_EQ(invariant_pool(single, Pool::Max), (std::vector<double>{-3, 0}));
}

TEST(PoolTest, Invariant) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto t = random_tensor(6, 2, rng);
    auto g = Permutation::random(6, rng);
    EXPECT_EQ(invariant_pool(permute_tensor(t, g), Pool::Max), invariant_pool(t, Pool::Max));
    EXPECT_LE(max_rel_diff(invariant_pool(permute_tensor(t, g), Pool::Sum), invariant_pool(t, Pool::Sum)), 1e-12);
  }
}

TEST(TriangleModelTest, KnownGraphs) {
  auto [spec, params] = handcrafted_triangle_model();
  EXPECT_EQ(model_forward(cycle(6), spec, params), std::vector<double>{0.0});
  EXPECT_EQ(model_forward(disjoint_union(cycle(3), cycle(3)), spec, params), std::vector<double>{12.0});
  EXPECT_EQ(model_forward(complete(4), spec, params), std::vector<double>{24.0});
  EXPECT_EQ(model_forward(empty_graph(3), spec, params), std::vector<double>{0.0});
}

TEST(TriangleModelTest, MatchesBruteForce) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t width = trial % 3;
    auto g = testing::random_colored_graph(3 + trial % 6, 0.5, width, 4, rng);
    auto [spec, params] = handcrafted_triangle_model(width);
    EXPECT_EQ(model_forward(g, spec, params)[0], 6.0 * static_cast<double>(testing::count_triangles(g)));
  }
}

TEST(ModelTest, InvariantBothSuffixes) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const bool suffix2 = trial % 2;
    auto spec = random_spec(2, suffix2, trial % 4 < 2 ? Pool::Max : Pool::Sum);
    auto params = init_params(spec, 100 + trial);
    auto g = testing::random_colored_graph(2 + trial % 8, 0.4, 1, 3, rng);
    auto perm = Permutation::random(g.n(), rng);
    auto a = model_forward(g, spec, params);
    auto b = model_forward(permute_graph(g, perm), spec, params);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_LE(std::abs(a[k] - b[k]) / (std::abs(a[k]) + 1e-12), 1e-5);
  }
}

TEST(ModelTest, ParamLayoutIsContiguous) {
  auto spec = random_spec(2, true, Pool::Max);
  auto layout = param_layout(spec);
  std::vector<std::pair<std::size_t, std::size_t>> slices;
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    const auto& b = spec.blocks[i];
    slices.emplace_back(layout.blocks[i].m1, b.m1.parameter_count());
    if (b.m2) slices.emplace_back(*layout.blocks[i].m2, b.m2->parameter_count());
    if (b.m3) slices.emplace_back(*layout.blocks[i].m3, b.m3->parameter_count());
    if (b.m4) slices.emplace_back(*layout.blocks[i].m4, b.m4->parameter_count());
  }
  const auto& fcs = std::get<SuffixII>(spec.head).per_block;
  for (std::size_t i = 0; i < fcs.size(); ++i) slices.emplace_back(layout.head[i], fcs[i].parameter_count());
  std::size_t at = 0;
  for (auto [off, len] : slices) {
    EXPECT_EQ(off, at);
    at += len;
  }
  EXPECT_EQ(at, layout.total);
  EXPECT_EQ(init_params(spec, 3), init_params(spec, 3));
  EXPECT_NE(init_params(spec, 3), init_params(spec, 4));
}

TEST(ModelTest, Errors) {
  auto spec = random_spec(2, false, Pool::Max);
  auto params = init_params(spec, 1);
  Rng rng(1);
  auto g = testing::random_colored_graph(4, 0.5, 1, 2, rng);
  EXPECT_THROW(model_forward(graph_to_tensor(cycle(4)), spec, params), Error);
  EXPECT_THROW(model_forward(g, spec, std::vector<double>(params.size() - 1)), Error);
  params[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(model_forward(g, spec, params), NumericError);
  spec.blocks[1].m1.input_width = 9;
  EXPECT_THROW(spec.validate(), Error);
}

TEST(ModelTest, FeatureWiseBaselineBlock) {
  BlockSpec block{MLPSpec::make(2, {3}, 2), std::nullopt, std::nullopt, std::nullopt, false};
  block.validate();
  Rng rng(10);
  auto t = random_tensor(3, 2, rng);
  std::vector<double> p(block.m1.parameter_count());
  for (auto& x : p) x = uniform(rng, -1, 1);
  EXPECT_EQ(block_forward(t, block, p), concat_channels(t, apply_mlp_featurewise(t, block.m1, p)));
}

std::vector<double> vectorize_basis(std::size_t n, std::size_t k) {
  std::vector<double> v;
  for (std::size_t a = 0; a < n * n; ++a) {
    std::vector<double> x(n * n, 0.0), out(n * n, 0.0);
    x[a] = 1.0;
    equivariant_basis_accumulate(x, n, k, 1.0, out);
    v.insert(v.end(), out.begin(), out.end());
  }
  return v;
}

std::size_t numeric_rank(std::vector<std::vector<double>> m) {
  std::size_t rank = 0;
  const std::size_t rows = m.size(), cols = m.front().size();
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rank;
    for (std::size_t r = rank; r < rows; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    if (std::abs(m[piv][c]) < 1e-9) continue;
    std::swap(m[piv], m[rank]);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank) continue;
      const double f = m[r][c] / m[rank][c];
      for (std::size_t j = c; j < cols; ++j) m[r][j] -= f * m[rank][j];
    }
    ++rank;
  }
  return rank;
}

TEST(EquivariantLinearTest, IdentityCoefficient) {
  Rng rng(11);
  auto t = random_tensor(4, 2, rng);
  std::vector<double> coeffs(equivariant_linear_coefficient_count(2, 2), 0.0);
  coeffs[(0 * 2 + 0) * 15 + 5] = 1.0;
  coeffs[(1 * 2 + 1) * 15 + 5] = 1.0;
  EXPECT_EQ(equivariant_linear_basis_apply(t, 2, coeffs), t);
  EXPECT_THROW(equivariant_linear_basis_apply(t, 2, std::span(coeffs).first(coeffs.size() - 1)), Error);
}

TEST(EquivariantLinearTest, BiasPatterns) {
  DenseTensor3 t(3, 1);
  std::vector<double> coeffs(equivariant_linear_coefficient_count(1, 1), 0.0);
  coeffs[15] = 2.0;
  coeffs[16] = 0.5;
  auto out = equivariant_linear_basis_apply(t, 1, coeffs);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(out(i, j, 0), i == j ? 2.5 : 0.5);
}

TEST(EquivariantLinearTest, Equivariant) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 5;
    auto t = random_tensor(n, 2, rng);
    std::vector<double> coeffs(equivariant_linear_coefficient_count(2, 3));
    for (auto& x : coeffs) x = uniform(rng, -1, 1);
    auto g = Permutation::random(n, rng);
    EXPECT_LE(max_abs_diff(equivariant_linear_basis_apply(permute_tensor(t, g), 3, coeffs),
                           permute_tensor(equivariant_linear_basis_apply(t, 3, coeffs), g)),
              1e-10);
  }
}

TEST(EquivariantLinearTest, BasisIsLinearlyIndependent) {
  std::vector<std::vector<double>> vecs;
  for (std::size_t k = 0; k < kEquivariantBasisSize; ++k) vecs.push_back(vectorize_basis(4, k));
  std::vector<std::vector<double>> gram(15, std::vector<double>(15, 0.0));
  for (std::size_t a = 0; a < 15; ++a)
    for (std::size_t b = 0; b < 15; ++b)
      for (std::size_t i = 0; i < vecs[a].size(); ++i) gram[a][b] += vecs[a][i] * vecs[b][i];
  EXPECT_EQ(numeric_rank(gram), 15u);
}

Tensor3Cube random_cube(std::size_t n, Rng& rng) {
  Tensor3Cube t(n);
  for (auto& x : t.data()) x = uniform(rng, -1, 1);
  return t;
}

TEST(GeneralizedMatmulTest, Examples) {
  Tensor3Cube ones(4, 1.0), zero(4);
  const auto out = generalized_matmul(ones, ones, ones);
  for (double x : out.data()) EXPECT_EQ(x, 4.0);
  Rng rng(13);
  auto r = random_cube(4, rng);
  const auto killed = generalized_matmul(r, zero, r);
  for (double x : killed.data()) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(generalized_matmul(r, r, Tensor3Cube(3)), Error);
}

TEST(GeneralizedMatmulTest, Equivariant) {
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = random_cube(5, rng), b = random_cube(5, rng), c = random_cube(5, rng);
    auto g = Permutation::random(5, rng);
    auto lhs = generalized_matmul(permute_tensor(a, g), permute_tensor(b, g), permute_tensor(c, g));
    auto rhs = permute_tensor(generalized_matmul(a, b, c), g);
    for (std::size_t i = 0; i < lhs.data().size(); ++i) EXPECT_NEAR(lhs.data()[i], rhs.data()[i], 1e-10);
  }
}

TEST(SerializationTest, SpecRoundTrip) {
  for (bool suffix2 : {false, true}) {
    auto spec = random_spec(3, suffix2, suffix2 ? Pool::Sum : Pool::Max);
    auto j = model_spec_to_json(spec);
    EXPECT_EQ(j.at("version"), 1);
    EXPECT_EQ(model_spec_from_json(nlohmann::json::parse(j.dump())), spec);
  }
  auto j = model_spec_to_json(handcrafted_triangle_model().first);
  j["version"] = 99;
  EXPECT_THROW(model_spec_from_json(j), Error);
  EXPECT_THROW(model_spec_from_json(nlohmann::json::object()), Error);
}

TEST(SerializationTest, ParamsRoundTrip) {
  std::vector<double> p{0.1, -0.0, 1e300, std::numeric_limits<double>::denorm_min(), -7.25};
  std::stringstream ss;
  write_params(ss, p);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 16u + 8 * p.size());
  EXPECT_EQ(bytes.substr(0, 4), "WLNP");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 5);
  // -7.25 = 0xC01D000000000000, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes.back()), 0xC0);
  auto back = read_params(ss);
  ASSERT_EQ(back.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(std::bit_cast<std::uint64_t>(back[i]), std::bit_cast<std::uint64_t>(p[i]));
}

TEST(SerializationTest, ParamsErrors) {
  std::stringstream bad_magic("XLNP");
  EXPECT_THROW(read_params(bad_magic), ParseError);
  std::stringstream full;
  write_params(full, std::vector<double>{1.0, 2.0});
  const std::string bytes = full.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  try {
    read_params(truncated);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 29u);
  }
  std::stringstream trailing(bytes + "x");
  EXPECT_THROW(read_params(trailing), ParseError);
}

// Integer selection weights reproduce the exact multiset encoding: the input
// carries tau_2(B) then tau_1(B) as channels, m1 reads the first half and m2
// the second, so the block's product channels must equal u(X) position-wise.
TEST(FloatExactAgreementTest, BlockMatchesExactPipeline) {
  Rng rng(15);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = 2 + trial % 3;
    auto g = testing::random_colored_graph(n, 0.5, trial % 2, 3, rng);
    auto b = ExactTensor3::from_dense(graph_to_fwl_tensor(g));
    const auto [tau1, tau2] = fwl_monomials(b.channels(), n);
    auto z = monomial_features(b, tau2), y = monomial_features(b, tau1);
    const std::size_t l = tau1.size();
    DenseTensor3 input(n, 2 * l);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t c = 0; c < l; ++c) {
          input(i, j, c) = z(i, j, c).convert_to<double>();
          input(i, j, l + c) = y(i, j, c).convert_to<double>();
        }
    BlockSpec block{linear(2 * l, l), linear(2 * l, l), std::nullopt, std::nullopt, true};
    std::vector<double> p(2 * block.m1.parameter_count(), 0.0);
    const std::size_t stride = 2 * l;
    for (std::size_t c = 0; c < l; ++c) {
      p[c * stride + c] = 1.0;
      p[block.m1.parameter_count() + c * stride + l + c] = 1.0;
    }
    auto out = block_forward(input, block, p);
    auto exact = fwl_multiset_via_matmul(b);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t c = 0; c < l; ++c) ASSERT_EQ(Rational(out(i, j, 2 * l + c)), exact(i, j, c));
  }
}

}  // namespace
}  // namespace wlnet
