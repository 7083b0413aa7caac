#include "wlnet/graph_io.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wlnet/generators.hpp"

namespace wlnet {
namespace {

TEST(Graph6Test, KnownEncodings) {
  // C6 by hand: bits x(0,1) x(0,2) x(1,2) ... = 101001 000110 001(000)
  // -> 41, 6, 8 -> 'h', 'E', 'G' after the +63 offset; header 63 + 6 = 'E'.
  EXPECT_EQ(write_graph6(cycle(6)), "EhEG");
  EXPECT_EQ(write_graph6(complete(4)), "C~");
  EXPECT_EQ(write_graph6(empty_graph(1)), "@");
  EXPECT_EQ(write_graph6(empty_graph(0)), "?");
  EXPECT_EQ(parse_graph6("EhEG"), cycle(6));
  EXPECT_EQ(parse_graph6(">>graph6<<C~\n"), complete(4));
}

TEST(Graph6Test, RoundTripsBitExactly) {
  for (const char* s : {"E?~o", "EhEG", "G?zTb_", "@", "A_"}) {
    SCOPED_TRACE(s);
    EXPECT_EQ(write_graph6(parse_graph6(s)), s);
  }
}

TEST(Graph6Test, RandomGraphsRoundTrip) {
  EXPECT_EQ(parse_graph6(write_graph6(rook_4x4())), rook_4x4());
  EXPECT_EQ(parse_graph6(write_graph6(shrikhande())), shrikhande());
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto g = random_gnp(seed % 33, 0.5, seed);
    EXPECT_EQ(parse_graph6(write_graph6(g)), g);
  }
}

TEST(Graph6Test, ReportsErrorOffsets) {
  try {
    parse_graph6(std::string("C") + static_cast<char>(255));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 1u);
  }
  try {
    parse_graph6("E?~");  // needs 3 data bytes for n = 6
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 3u);
  }
  EXPECT_THROW(parse_graph6(""), ParseError);
  EXPECT_THROW(parse_graph6("~??"), ParseError);     // extended header
  EXPECT_THROW(parse_graph6("C~?"), ParseError);     // trailing bytes
  EXPECT_THROW(parse_graph6("B@"), ParseError);      // padding bit set (n = 3 uses 3 of 6 bits)
  EXPECT_THROW(write_graph6(empty_graph(63)), Error);
}

TEST(GraphJsonTest, ParsesDocumentedSchema) {
  auto g = parse_graph_json(R"({"n":2,"edges":[[0,1]],"colors":[]})");
  EXPECT_EQ(g, Graph(2, {{0, 1}}));
  EXPECT_EQ(g.color_width(), 0u);

  auto colored = parse_graph_json(R"({"n":3,"edges":[[2,0]],"colors":[[0.5,1],[2,3],[4,5]]})");
  EXPECT_EQ(colored.color_width(), 2u);
  EXPECT_EQ(colored.color(2)[1], 5.0);
  EXPECT_TRUE(colored.adjacent(0, 2));
}

TEST(GraphJsonTest, RejectsInvalidGraphs) {
  EXPECT_THROW(parse_graph_json(R"({"n":2,"edges":[[0,0]]})"), Error);
  EXPECT_THROW(parse_graph_json(R"({"n":2,"edges":[[0,1],[1,0]]})"), Error);
  EXPECT_THROW(parse_graph_json(R"({"n":2,"edges":[[0,2]]})"), Error);
  EXPECT_THROW(parse_graph_json(R"({"n":2,"edges":[],"colors":[[1],[1,2]]})"), Error);
  EXPECT_THROW(parse_graph_json(R"({"n":2,"edges":[],"colors":[[1]]})"), Error);
  EXPECT_THROW(parse_graph_json(R"({"n":-1})"), Error);
  EXPECT_THROW(parse_graph_json(R"({"n":2,"edges":[[0,1]])"), ParseError);
}

TEST(GraphJsonTest, LosslessRoundTrip) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = trial % 33;
    const std::size_t width = trial % 3;
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (uniform01(rng) < 0.5) edges.emplace_back(i, j);
    std::vector<double> colors(n * width);
    for (auto& c : colors) c = uniform(rng, -1e6, 1e6) * uniform01(rng);
    Graph g(n, edges, colors, width);
    auto text = write_graph_json(g);
    EXPECT_EQ(parse_graph_json(text), g) << text;
  }
}

TEST(GraphJsonTest, JsonLines) {
  auto text = write_graph_json(cycle(4)) + "\n\n" + write_graph_json(complete(3)) + "\n";
  auto gs = parse_graph_json_lines(text);
  ASSERT_EQ(gs.size(), 2u);
  EXPECT_EQ(gs[0], cycle(4));
  EXPECT_EQ(gs[1], complete(3));
}

}  // namespace
}  // namespace wlnet
