#pragma once

// graph6 and JSON graph formats.
//
// graph6: header byte 63 + n (n <= 62), then the upper triangle of the
// adjacency matrix in column order (x(0,1), x(0,2), x(1,2), x(0,3), ...),
// zero-padded to a multiple of 6 bits, each 6-bit group written as 63 + value.
// Colors are not representable; parsed graphs have color width 0.
//
// JSON: {"n": int, "edges": [[i, j], ...], "colors": [[...], ...]} with
// 0-based vertex indices. "colors" is either empty or has exactly n rows of
// equal width.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wlnet/error.hpp"
#include "wlnet/graph.hpp"

namespace wlnet {

inline constexpr std::size_t kGraph6MaxVertices = 62;

inline std::string write_graph6(const Graph& g) {
  const std::size_t n = g.n();
  detail::require(n <= kGraph6MaxVertices, "graph6 writer supports at most 62 vertices");
  std::string out(1, static_cast<char>(63 + n));
  int acc = 0, nbits = 0;
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i) {
      acc = (acc << 1) | (g.adjacent(i, j) ? 1 : 0);
      if (++nbits == 6) {
        out.push_back(static_cast<char>(63 + acc));
        acc = nbits = 0;
      }
    }
  if (nbits > 0) out.push_back(static_cast<char>(63 + (acc << (6 - nbits))));
  return out;
}

/// Parses one graph6 record. A leading ">>graph6<<" header and trailing
/// line terminators are accepted. Non-zero padding bits are rejected.
inline Graph parse_graph6(std::string_view text) {
  std::size_t pos = 0;
  constexpr std::string_view kHeader = ">>graph6<<";
  if (text.substr(0, kHeader.size()) == kHeader) pos = kHeader.size();
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.remove_suffix(1);

  if (pos >= text.size()) throw ParseError("graph6: missing size header", pos);
  const auto head = static_cast<unsigned char>(text[pos]);
  if (head < 63 || head > 126) throw ParseError("graph6: byte outside the printable range 63..126", pos);
  if (head == 126) throw ParseError("graph6: extended size header (n > 62) is not supported", pos);
  const std::size_t n = head - 63;
  ++pos;

  const std::size_t bits = n * (n - (n > 0 ? 1 : 0)) / 2;
  const std::size_t groups = (bits + 5) / 6;
  if (text.size() - pos < groups) throw ParseError("graph6: truncated adjacency data", text.size());
  if (text.size() - pos > groups) throw ParseError("graph6: trailing bytes after adjacency data", pos + groups);

  std::vector<std::uint8_t> adj(n * n, 0);
  std::size_t bit = 0;
  std::size_t i = 0, j = 1;
  for (std::size_t gi = 0; gi < groups; ++gi, ++pos) {
    const auto byte = static_cast<unsigned char>(text[pos]);
    if (byte < 63 || byte > 126) throw ParseError("graph6: byte outside the printable range 63..126", pos);
    const int value = byte - 63;
    for (int b = 5; b >= 0; --b, ++bit) {
      const bool set = (value >> b) & 1;
      if (bit >= bits) {
        if (set) throw ParseError("graph6: non-zero padding bits", pos);
        continue;
      }
      if (set) adj[i * n + j] = adj[j * n + i] = 1;
      if (++i == j) {
        i = 0;
        ++j;
      }
    }
  }
  return Graph::from_adjacency(n, adj);
}

inline nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json j;
  j["n"] = g.n();
  auto edges = nlohmann::json::array();
  for (auto [u, v] : g.edges()) edges.push_back({u, v});
  j["edges"] = std::move(edges);
  auto colors = nlohmann::json::array();
  for (std::size_t v = 0; v < g.n() && g.color_width() > 0; ++v) {
    auto row = g.color(v);
    colors.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["colors"] = std::move(colors);
  return j;
}

/// Compact single-line JSON. Doubles are written in shortest round-trip form.
inline std::string write_graph_json(const Graph& g) { return graph_to_json(g).dump(); }

inline Graph graph_from_json(const nlohmann::json& j) {
  detail::require(j.is_object(), "graph JSON must be an object");
  detail::require(j.contains("n") && j["n"].is_number_unsigned(), "graph JSON: \"n\" must be a non-negative integer");
  const auto n = j["n"].get<std::size_t>();

  std::vector<Edge> edges;
  if (j.contains("edges")) {
    detail::require(j["edges"].is_array(), "graph JSON: \"edges\" must be an array");
    for (const auto& e : j["edges"]) {
      detail::require(e.is_array() && e.size() == 2 && e[0].is_number_unsigned() && e[1].is_number_unsigned(),
                      "graph JSON: each edge must be a pair of non-negative integers");
      edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
  }

  std::vector<double> colors;
  std::size_t width = 0;
  if (j.contains("colors") && !j["colors"].empty()) {
    const auto& rows = j["colors"];
    detail::require(rows.is_array() && rows.size() == n, "graph JSON: \"colors\" must have exactly n rows");
    width = rows[0].size();
    for (const auto& row : rows) {
      detail::require(row.is_array() && row.size() == width, "graph JSON: ragged color rows");
      for (const auto& x : row) {
        detail::require(x.is_number(), "graph JSON: colors must be numbers");
        colors.push_back(x.get<double>());
      }
    }
  }
  return Graph(n, edges, std::move(colors), width);
}

inline Graph parse_graph_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("graph JSON: ") + e.what(), e.byte);
  }
  return graph_from_json(j);
}

/// One graph per non-empty line.
inline std::vector<Graph> parse_graph_json_lines(std::string_view text) {
  std::vector<Graph> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) out.push_back(parse_graph_json(line));
    start = end + 1;
  }
  return out;
}

}  // namespace wlnet
