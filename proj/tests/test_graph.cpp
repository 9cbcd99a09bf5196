#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "stgof/graph.hpp"
#include "stgof/rng.hpp"
#include "oracles.hpp"

using namespace stgof;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "test_tmp_" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

AdjacencyMatrix from_pairs(int n, std::initializer_list<std::pair<int, int>> edges) {
  std::vector<std::pair<int, int>> e(edges);
  return AdjacencyMatrix::from_edges(n, e);
}

}  // namespace

TEST_CASE("triangle edge list loads") {
  const auto path = write_temp("tri.txt", "0 1\n1 2\n2 0\n");
  const LoadedGraph loaded = load_edge_list(path);
  CHECK(loaded.graph.node_count() == 3);
  CHECK(loaded.graph.edge_count() == 3);
  CHECK(loaded.stats.self_loops_dropped == 0);
  CHECK(loaded.stats.duplicate_edges_dropped == 0);
  std::remove(path.c_str());
}

TEST_CASE("duplicate edge is symmetrized away") {
  const auto path = write_temp("dup.txt", "0 1\n1 0\n");
  const LoadedGraph loaded = load_edge_list(path);
  CHECK(loaded.graph.node_count() == 2);
  CHECK(loaded.graph.edge_count() == 1);
  CHECK(loaded.stats.duplicate_edges_dropped == 1);
  std::remove(path.c_str());
}

TEST_CASE("self loops dropped and counted, comments ignored") {
  const auto path = write_temp("loop.txt", "# header\n0 0\n0 1 # inline\n\n1 2\n");
  const LoadedGraph loaded = load_edge_list(path);
  CHECK(loaded.graph.edge_count() == 2);
  CHECK(loaded.stats.self_loops_dropped == 1);
  std::remove(path.c_str());
}

TEST_CASE("malformed line reports its number") {
  const auto path = write_temp("bad.txt", "0 1\n2 three\n");
  CHECK_THROWS_AS(load_edge_list(path), ParseError);
  try {
    load_edge_list(path);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("empty input is an error") {
  const auto path = write_temp("empty.txt", "# nothing\n");
  CHECK_THROWS_AS(load_edge_list(path), Error);
  std::remove(path.c_str());
}

TEST_CASE("one-based input and sparse labels are compacted") {
  const auto path = write_temp("onebased.txt", "1 2\n2 5\n");
  const LoadedGraph loaded = load_edge_list(path, Indexing::OneBased);
  CHECK(loaded.graph.node_count() == 3);
  CHECK(loaded.original_labels == std::vector<std::int64_t>{0, 1, 4});
  std::remove(path.c_str());
}

TEST_CASE("canonical save/load round trip is byte-identical") {
  Rng rng(7);
  const AdjacencyMatrix g = oracle::random_graph(25, 0.2, rng);
  const std::string canon = edge_list_string(g);
  const auto path = write_temp("round.txt", canon);
  const LoadedGraph loaded = load_edge_list(path);
  CHECK(edge_list_string(loaded.graph) == canon);
  std::remove(path.c_str());
}

TEST_CASE("connectivity") {
  CHECK(is_connected(from_pairs(3, {{0, 1}, {1, 2}, {2, 0}})));
  CHECK_FALSE(is_connected(from_pairs(4, {{0, 1}, {2, 3}})));
  // path graph P5
  CHECK(is_connected(from_pairs(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}})));
}

TEST_CASE("largest component keeps identity on connected input") {
  const AdjacencyMatrix g = from_pairs(3, {{0, 1}, {1, 2}, {2, 0}});
  const ComponentResult res = largest_component(g);
  CHECK(res.graph.node_count() == 3);
  CHECK(res.old_index == std::vector<int>{0, 1, 2});
}

TEST_CASE("largest component drops an isolate") {
  const AdjacencyMatrix g = from_pairs(4, {{0, 1}, {1, 2}, {2, 0}});
  const ComponentResult res = largest_component(g);
  CHECK(res.graph.node_count() == 3);
  CHECK(res.graph.edge_count() == 3);
  CHECK(is_connected(res.graph));
}

TEST_CASE("component ties break toward node 0") {
  const AdjacencyMatrix g = from_pairs(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}});
  const ComponentResult res = largest_component(g);
  CHECK(res.old_index == std::vector<int>{0, 1, 2});
}

TEST_CASE("degree profiles") {
  const AdjacencyMatrix star = from_pairs(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const DegreeProfile ps = degrees(star);
  CHECK(ps.degrees == std::vector<int>{4, 1, 1, 1, 1});
  CHECK(ps.max == 4);
  CHECK(ps.min == 1);

  const AdjacencyMatrix c4 = from_pairs(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  for (int d : degrees(c4).degrees) CHECK(d == 2);

  std::vector<std::pair<int, int>> k5;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) k5.emplace_back(i, j);
  const DegreeProfile pk = degrees(AdjacencyMatrix::from_edges(5, k5));
  for (int d : pk.degrees) CHECK(d == 4);
}

TEST_CASE("degrees sum to twice the edge count on random graphs") {
  Rng rng(99);
  for (int t = 0; t < 20; ++t) {
    const AdjacencyMatrix g = oracle::random_graph(30, 0.15, rng);
    const DegreeProfile p = degrees(g);
    long long total = 0;
    for (int d : p.degrees) total += d;
    CHECK(total == 2 * g.edge_count());
    CHECK(p.mean == doctest::Approx(2.0 * g.edge_count() / 30.0));
  }
}

TEST_CASE("largest_component output is always connected (fuzz)") {
  Rng rng(1234);
  for (int t = 0; t < 30; ++t) {
    const AdjacencyMatrix g = oracle::random_graph(40, 0.04, rng);
    if (g.edge_count() == 0) continue;
    CHECK(is_connected(largest_component(g).graph));
  }
}
