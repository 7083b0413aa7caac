#include "wlnet/multiset.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wlnet/generators.hpp"

namespace wlnet {
namespace {

std::vector<std::vector<unsigned>> exponents(const std::vector<MultiIndex>& v) {
  std::vector<std::vector<unsigned>> out;
  for (const auto& m : v) out.push_back(m.exponents);
  return out;
}

std::vector<Rational> ints(std::initializer_list<long> xs) { return {xs.begin(), xs.end()}; }

TEST(MultiIndexTest, GradedLexOrder) {
  EXPECT_EQ(exponents(enumerate_multi_indices(2, 2)),
            (std::vector<std::vector<unsigned>>{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}));
  EXPECT_EQ(exponents(enumerate_multi_indices(3, 0)), (std::vector<std::vector<unsigned>>{{0, 0, 0}}));
  EXPECT_EQ(enumerate_multi_indices(1, 7).size(), 8u);
  EXPECT_THROW(enumerate_multi_indices(0, 3), Error);
  EXPECT_THROW(enumerate_multi_indices(20, 20), Error);
}

TEST(MultiIndexTest, CountIsBinomial) {
  for (std::size_t a = 1; a <= 5; ++a)
    for (std::size_t d = 0; d <= 6; ++d) {
      auto list = enumerate_multi_indices(a, d);
      EXPECT_EQ(list.size(), binomial(d + a, a));
      for (std::size_t i = 1; i < list.size(); ++i) EXPECT_LE(list[i - 1].degree(), list[i].degree());
    }
  EXPECT_EQ(binomial(4, 2), 6u);
  EXPECT_EQ(binomial(11, 6), 462u);
  EXPECT_EQ(binomial(3, 5), 0u);
}

TEST(PmpTest, HandValues) {
  ExactMatrix x{{1, 2}, {3, 4}};
  EXPECT_EQ(pmp(x, MultiIndex{{1, 1}}), 14);
  EXPECT_EQ(pmp(x, MultiIndex{{0, 0}}), 2);
  EXPECT_EQ(pmp(ExactMatrix{{0, 0}, {2, 5}}, MultiIndex{{1, 0}}), 2);
  EXPECT_THROW(pmp(x, MultiIndex{{1}}), Error);
  EXPECT_EQ(u_vector(x), ints({2, 4, 6, 10, 14, 20}));
}

TEST(PmpTest, ZeroRowContributesNothing) {
  ExactMatrix x{{0, 0, 0}, {1, 2, 3}, {2, 0, 1}};
  ExactMatrix without{{1, 2, 3}, {2, 0, 1}};
  for (const auto& alpha : enumerate_multi_indices(3, 3))
    if (alpha.degree() > 0) {
      EXPECT_EQ(pmp(x, alpha), pmp(without, alpha));
    }
}

TEST(PmpTest, SingleRowIsRecoverable) {
  ExactMatrix x(1, 3, {Rational(1, 3), Rational(-2), Rational(5, 7)});
  auto u = u_vector(x);
  ASSERT_EQ(u.size(), 4u);  // C(1 + 3, 3)
  EXPECT_EQ(u[0], 1);
  EXPECT_EQ(u[1], Rational(1, 3));
  EXPECT_EQ(u[2], -2);
  EXPECT_EQ(u[3], Rational(5, 7));
}

TEST(PmpTest, RowPermutationInvariance) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 5, a = 1 + trial % 3;
    ExactMatrix x(n, a);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < a; ++j)
        x(i, j) = Rational(static_cast<long>(uniform_index(rng, 9)) - 4, 1 + static_cast<long>(uniform_index(rng, 3)));
    auto g = Permutation::random(n, rng);
    ExactMatrix y(n, a);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < a; ++j) y(g(i), j) = x(i, j);
    EXPECT_EQ(u_vector(x), u_vector(y));
    EXPECT_EQ(u_vector(x).size(), binomial(n + a, a));
  }
}

TEST(PmpTest, DeskScaleBounds) {
  EXPECT_THROW(u_vector(ExactMatrix(9, 1)), Error);
  EXPECT_THROW(u_vector(ExactMatrix(2, 0)), Error);
}

TEST(OracleTest, Examples) {
  EXPECT_TRUE(multiset_equal_oracle(ExactMatrix{{1, 2}, {3, 4}}, ExactMatrix{{3, 4}, {1, 2}}));
  EXPECT_FALSE(multiset_equal_oracle(ExactMatrix{{1, 1}, {2, 2}}, ExactMatrix{{1, 2}, {2, 1}}));
  EXPECT_TRUE(multiset_equal_oracle(ExactMatrix{{5, 6}}, ExactMatrix{{5, 6}}));
  EXPECT_THROW(multiset_equal_oracle(ExactMatrix{{1, 2}}, ExactMatrix{{1}}), Error);
  // The second pair shares every column multiset but not the row multiset;
  // u must still tell them apart through the mixed moment p_(1,1).
  EXPECT_NE(u_vector(ExactMatrix{{1, 1}, {2, 2}}), u_vector(ExactMatrix{{1, 2}, {2, 1}}));
}

TEST(OracleTest, SmallExhaustiveEquivalence) {
  // n = 2, a = 2, entries in {0, 1, 2}: all 81 x 81 pairs.
  std::vector<ExactMatrix> all;
  for (int code = 0; code < 81; ++code) {
    int c = code;
    ExactMatrix x(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j, c /= 3) x(i, j) = c % 3;
    all.push_back(x);
  }
  std::vector<PmpVector> us;
  for (const auto& x : all) us.push_back(u_vector(x));
  for (std::size_t p = 0; p < all.size(); ++p)
    for (std::size_t q = 0; q < all.size(); ++q)
      EXPECT_EQ(us[p] == us[q], multiset_equal_oracle(all[p], all[q]));
}

TEST(SplitTest, Examples) {
  auto pairs = split_multi_indices(1, 2);
  std::vector<std::pair<unsigned, unsigned>> flat;
  for (auto& [b, g] : pairs) flat.emplace_back(b.exponents[0], g.exponents[0]);
  EXPECT_EQ(flat, (std::vector<std::pair<unsigned, unsigned>>{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}));
  for (std::size_t a = 1; a <= 3; ++a)
    for (std::size_t n = 0; n <= 6; ++n) {
      auto s = split_multi_indices(a, n);
      EXPECT_EQ(s.size(), enumerate_multi_indices(2 * a, n).size());
      EXPECT_EQ(s.size(), binomial(n + 2 * a, 2 * a));
      EXPECT_EQ(s.front().first.degree() + s.front().second.degree(), 0u);
    }
}

TEST(FwlMatmulTest, SingleEdgeByHand) {
  ExactTensor3 b(2, 1);
  b(0, 1, 0) = 1;
  b(1, 0, 0) = 1;
  auto w = fwl_multiset_via_matmul(b);
  ASSERT_EQ(w.channels(), 6u);
  // (0,0): X rows (B[j,0], B[0,j]) = (0,0), (1,1).
  // (0,1): X rows (B[j,1], B[0,j]) = (1,0), (0,1).
  const std::vector<Rational> at00 = ints({2, 1, 1, 1, 1, 1});
  const std::vector<Rational> at01 = ints({2, 1, 1, 1, 0, 1});
  for (std::size_t l = 0; l < 6; ++l) {
    EXPECT_EQ(w(0, 0, l), at00[l]) << l;
    EXPECT_EQ(w(0, 1, l), at01[l]) << l;
  }
  EXPECT_EQ(w, fwl_multiset_direct(b));
}

TEST(FwlMatmulTest, ConstantTensor) {
  const std::size_t n = 3;
  ExactTensor3 b(n, 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < 2; ++c) b(i, j, c) = Rational(3, 2);
  auto w = fwl_multiset_via_matmul(b);
  auto pairs = split_multi_indices(2, n);
  for (std::size_t l = 0; l < pairs.size(); ++l) {
    const Rational expected = Rational(n) * rational_pow(Rational(3, 2), pairs[l].first.degree() + pairs[l].second.degree());
    EXPECT_EQ(w(1, 2, l), expected);
  }
}

TEST(FwlMatmulTest, MatchesDirectOnGraphs) {
  Rng rng(4);
  for (std::size_t n = 1; n <= 4; ++n) {
    auto g = testing::random_colored_graph(n, 0.5, n % 2, 3, rng);
    auto b = ExactTensor3::from_dense(graph_to_fwl_tensor(g));
    EXPECT_EQ(fwl_multiset_via_matmul(b), fwl_multiset_direct(b));
  }
}

TEST(FwlMatmulTest, Equivariant) {
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    auto g = testing::random_colored_graph(4, 0.5, 0, 1, rng);
    auto p = Permutation::random(4, rng);
    auto b = ExactTensor3::from_dense(fwl_initial_colors(graph_to_fwl_tensor(g)));
    EXPECT_EQ(fwl_multiset_via_matmul(permute_tensor(b, p)), permute_tensor(fwl_multiset_via_matmul(b), p));
  }
}

TEST(ExactTest, DoubleConversionIsExact) {
  EXPECT_EQ(Rational(0.5), Rational(1, 2));
  EXPECT_NE(Rational(0.1), Rational(1, 10));
  EXPECT_EQ(to_json(ints({1, 2})).dump(), R"(["1","2"])");
  EXPECT_EQ(to_json(PmpVector{Rational(-3, 4)}).dump(), R"(["-3/4"])");
}

}  // namespace
}  // namespace wlnet
