#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "oracles.hpp"
#include "txsage/graph.hpp"
#include "txsage/sampler.hpp"

using namespace txsage;

namespace {

TransactionRecord core_tx(const std::string& s, const std::string& r, double amount) {
  return {s, NodeType::Core, r, NodeType::Core, amount, 0};
}

HeteroGraph path_abc() {
  std::vector<TransactionRecord> records{core_tx("A", "B", 1.0), core_tx("B", "C", 1.0)};
  return build_graph(records, "w");
}

}  // namespace

TEST_CASE("fanout at or above degree returns every neighbor") {
  std::vector<TransactionRecord> records{core_tx("X", "A", 1.0), core_tx("X", "B", 1.0),
                                         core_tx("X", "C", 1.0)};
  HeteroGraph g = build_graph(records, "w");
  Rng rng(1);
  auto out = sample_neighbors(g, *g.find("X"), 10, false, rng);
  CHECK(out.size() == 3);
  auto all = g.neighbor_ids(*g.find("X"));
  CHECK(std::equal(out.begin(), out.end(), all.begin(), all.end()));
}

TEST_CASE("isolated node samples an empty set") {
  std::vector<TransactionRecord> records{core_tx("A", "A", 1.0), core_tx("B", "C", 1.0)};
  HeteroGraph g = build_graph(records, "w");
  Rng rng(1);
  CHECK(sample_neighbors(g, *g.find("A"), 5, false, rng).empty());
}

TEST_CASE("weighted neighbor draw follows the weights: 3:1 at fanout 1") {
  std::vector<TransactionRecord> records{core_tx("U", "X", 3.0), core_tx("U", "Y", 1.0)};
  HeteroGraph g = build_graph(records, "w");
  const auto u = *g.find("U");
  const auto x = *g.find("X");
  Rng rng(99);
  int hits = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    auto out = sample_neighbors(g, u, 1, true, rng);
    REQUIRE(out.size() == 1);
    if (out[0] == x) ++hits;
  }
  const double freq = static_cast<double>(hits) / draws;
  CHECK(freq == doctest::Approx(0.75).epsilon(0.027));  // 0.75 ± 0.02 absolute
}

TEST_CASE("uniform neighbor sampling is unbiased (chi-square, 1e5 draws)") {
  std::vector<TransactionRecord> records;
  for (int i = 0; i < 10; ++i) {
    records.push_back(core_tx("hub", "n" + std::to_string(i), 1.0));
  }
  HeteroGraph g = build_graph(records, "w");
  const auto hub = *g.find("hub");
  Rng rng(7);
  std::vector<std::uint64_t> counts(10, 0);
  for (int i = 0; i < 100000; ++i) {
    auto out = sample_neighbors(g, hub, 1, false, rng);
    REQUIRE(out.size() == 1);
    std::size_t slot = 0;
    for (std::uint32_t v = 0; v < g.node_count(); ++v) {
      if (v == out[0] && v != hub) slot = v > hub ? v - 1 : v;
    }
    ++counts[slot];
  }
  // chi2 critical value at p=0.001, df=9
  CHECK(oracles::chi_square_uniform(counts) < 27.877165);
}

TEST_CASE("sampled neighborhoods stay inside N(v) and exclude v") {
  Rng graph_rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    auto records = oracles::random_core_records(15, 0.2, graph_rng);
    if (records.empty()) continue;
    HeteroGraph g = build_graph(records, "w");
    Rng rng(trial);
    for (std::uint32_t v = 0; v < g.node_count(); ++v) {
      auto out = sample_neighbors(g, v, 3, trial % 2 == 0, rng);
      auto nbrs = g.neighbor_ids(v);
      std::set<std::uint32_t> unique(out.begin(), out.end());
      CHECK(unique.size() == out.size());
      for (std::uint32_t w : out) {
        CHECK(w != v);
        CHECK(std::binary_search(nbrs.begin(), nbrs.end(), w));
      }
    }
  }
}

TEST_CASE("positive edges: single-edge graph always returns that edge") {
  std::vector<TransactionRecord> records{core_tx("A", "B", 1.0)};
  HeteroGraph g = build_graph(records, "w");
  Rng rng(1);
  auto pairs = sample_positive_edges(g, 50, rng);
  CHECK(pairs.size() == 50);
  const auto a = *g.find("A"), b = *g.find("B");
  for (auto [u, v] : pairs) {
    CHECK(std::minmax(u, v) == std::minmax(a, b));
  }
}

TEST_CASE("positive edges: triangle frequencies are 1/3 each") {
  std::vector<TransactionRecord> records{core_tx("A", "B", 1.0), core_tx("B", "C", 1.0),
                                         core_tx("C", "A", 1.0)};
  HeteroGraph g = build_graph(records, "w");
  Rng rng(5);
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> counts;
  const int draws = 30000;
  auto pairs = sample_positive_edges(g, draws, rng);
  for (auto [u, v] : pairs) {
    auto key = std::minmax(u, v);
    ++counts[{key.first, key.second}];
  }
  REQUIRE(counts.size() == 3);
  for (const auto& [edge, c] : counts) {
    CHECK(static_cast<double>(c) / draws == doctest::Approx(1.0 / 3).epsilon(0.031));
  }
}

TEST_CASE("positive edges: batch size zero and empty graph") {
  std::vector<TransactionRecord> records{core_tx("A", "B", 1.0)};
  HeteroGraph g = build_graph(records, "w");
  Rng rng(1);
  CHECK(sample_positive_edges(g, 0, rng).empty());
  HeteroGraph empty = build_graph({}, "w");
  CHECK_THROWS_AS(sample_positive_edges(empty, 1, rng), std::runtime_error);
}

TEST_CASE("weighted positive edges follow edge weights") {
  std::vector<TransactionRecord> records{core_tx("A", "B", 9.0), core_tx("C", "D", 1.0)};
  HeteroGraph g = build_graph(records, "w");
  Rng rng(2);
  const auto a = *g.find("A");
  int heavy = 0;
  const int draws = 20000;
  auto pairs = sample_positive_edges(g, draws, rng, true);
  for (auto [u, v] : pairs) {
    if (u == a || v == a) ++heavy;
  }
  CHECK(static_cast<double>(heavy) / draws == doctest::Approx(0.9).epsilon(0.023));
}

TEST_CASE("negatives: path A-B-C gives only C for center A") {
  HeteroGraph g = path_abc();
  Rng rng(1);
  auto negs = sample_negatives(g, *g.find("A"), 20, rng);
  CHECK(negs.size() == 20);
  for (auto v : negs) CHECK(v == *g.find("C"));
}

TEST_CASE("negatives: full star center has no candidate") {
  std::vector<TransactionRecord> records{core_tx("H", "A", 1.0), core_tx("H", "B", 1.0)};
  HeteroGraph g = build_graph(records, "w");
  Rng rng(1);
  CHECK_THROWS_AS(sample_negatives(g, *g.find("H"), 1, rng), std::runtime_error);
}

TEST_CASE("negatives: uniform over the 99 candidates of an edgeless centre") {
  // 100 isolated nodes (self-loops only), so N(u) is empty
  std::vector<TransactionRecord> records;
  for (int i = 0; i < 100; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "n%03d", i);
    records.push_back(core_tx(buf, buf, 1.0));
  }
  HeteroGraph g = build_graph(records, "w");
  REQUIRE(g.edge_count() == 0);
  Rng rng(13);
  std::vector<std::uint64_t> counts(100, 0);
  const int rounds = 2000, q = 5;  // 10,000 draws
  for (int i = 0; i < rounds; ++i) {
    auto negs = sample_negatives(g, 0, q, rng);
    REQUIRE(negs.size() == q);
    for (auto v : negs) {
      REQUIRE(v != 0);
      ++counts[v];
    }
  }
  const double total = rounds * q;
  for (std::size_t v = 1; v < 100; ++v) {
    CHECK(static_cast<double>(counts[v]) / total ==
          doctest::Approx(1.0 / 99).epsilon(2.0));  // ±0.02 absolute on ~0.0101
  }
  CHECK(counts[0] == 0);
  // chi-square over the 99 candidates, p=0.001 critical for df=98
  std::vector<std::uint64_t> candidate_counts(counts.begin() + 1, counts.end());
  CHECK(oracles::chi_square_uniform(candidate_counts) < 147.010358);
}

TEST_CASE("negatives never hit the neighborhood (property over random graphs)") {
  Rng graph_rng(41);
  int tested = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto records = oracles::random_core_records(12, 0.25, graph_rng);
    if (records.empty()) continue;
    HeteroGraph g = build_graph(records, "w");
    Rng rng(trial);
    for (std::uint32_t u = 0; u < g.node_count(); ++u) {
      if (g.degree(u) + 1 >= g.node_count()) continue;
      auto negs = sample_negatives(g, u, 4, rng);
      auto nbrs = g.neighbor_ids(u);
      for (auto v : negs) {
        CHECK(v != u);
        CHECK_FALSE(std::binary_search(nbrs.begin(), nbrs.end(), v));
      }
      ++tested;
    }
  }
  CHECK(tested > 500);
}

TEST_CASE("non-edges: counts, errors and the 4-cycle diagonals") {
  std::vector<TransactionRecord> tri{core_tx("A", "B", 1.0), core_tx("B", "C", 1.0),
                                     core_tx("C", "A", 1.0)};
  HeteroGraph triangle = build_graph(tri, "w");
  Rng rng(1);
  CHECK(sample_nonedges(triangle, 0, rng).empty());
  CHECK_THROWS_AS(sample_nonedges(triangle, 1, rng), std::runtime_error);

  std::vector<TransactionRecord> cyc{core_tx("A", "B", 1.0), core_tx("B", "C", 1.0),
                                     core_tx("C", "D", 1.0), core_tx("D", "A", 1.0)};
  HeteroGraph cycle = build_graph(cyc, "w");
  auto out = sample_nonedges(cycle, 2, rng);
  REQUIRE(out.size() == 2);
  std::set<std::pair<std::uint32_t, std::uint32_t>> got(out.begin(), out.end());
  std::set<std::pair<std::uint32_t, std::uint32_t>> expect;
  auto add_sorted = [&](const char* x, const char* y) {
    auto a = *cycle.find(x), b = *cycle.find(y);
    expect.insert(std::minmax(a, b));
  };
  add_sorted("A", "C");
  add_sorted("B", "D");
  CHECK(got == expect);
  CHECK_THROWS_AS(sample_nonedges(cycle, 3, rng), std::runtime_error);
}

TEST_CASE("non-edges are distinct, non-adjacent, and never self-pairs") {
  Rng graph_rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    auto records = oracles::random_core_records(14, 0.2, graph_rng);
    if (records.empty()) continue;
    HeteroGraph g = build_graph(records, "w");
    const std::uint64_t n = g.node_count();
    const std::uint64_t avail = n * (n - 1) / 2 - g.edge_count();
    if (avail == 0) continue;
    Rng rng(trial);
    auto out = sample_nonedges(g, avail, rng);  // exhaustive request
    CHECK(out.size() == avail);
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (auto [a, b] : out) {
      CHECK(a < b);
      CHECK_FALSE(g.has_edge(a, b));
      CHECK(seen.insert({a, b}).second);
    }
  }
}

TEST_CASE("identical seeds reproduce identical samples bitwise") {
  Rng graph_rng(61);
  auto records = oracles::random_core_records(20, 0.2, graph_rng);
  HeteroGraph g = build_graph(records, "w");
  for (bool weighted : {false, true}) {
    Rng r1(123), r2(123);
    for (std::uint32_t v = 0; v < g.node_count(); ++v) {
      CHECK(sample_neighbors(g, v, 3, weighted, r1) ==
            sample_neighbors(g, v, 3, weighted, r2));
    }
    CHECK(sample_positive_edges(g, 100, r1, weighted) ==
          sample_positive_edges(g, 100, r2, weighted));
    CHECK(sample_nonedges(g, 20, r1) == sample_nonedges(g, 20, r2));
  }
}
