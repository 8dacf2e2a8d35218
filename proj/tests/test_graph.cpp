#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "oracles.hpp"
#include "txsage/graph.hpp"
#include "txsage/rng.hpp"

using namespace txsage;

namespace {

TransactionRecord tx(const std::string& s, NodeType st, const std::string& r, NodeType rt,
                     double amount, std::int64_t ts = 0) {
  return {s, st, r, rt, amount, ts};
}

}  // namespace

TEST_CASE("single edge graph") {
  std::vector<TransactionRecord> records{
      tx("A", NodeType::Core, "B", NodeType::Merchant, 10.0)};
  HeteroGraph g = build_graph(records, "w1");
  CHECK(g.node_count() == 2);
  CHECK(g.directed_edge_count() == 1);
  CHECK(g.edge_count() == 1);
  auto a = g.find("A"), b = g.find("B");
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(g.node_type(*a) == NodeType::Core);
  CHECK(g.node_type(*b) == NodeType::Merchant);
  CHECK(g.degree(*a) == 1);
  CHECK(g.degree(*b) == 1);
  auto edges = g.out_edges(*a);
  REQUIRE(edges.size() == 1);
  CHECK(edges[0].dst == *b);
  CHECK(edges[0].weight == doctest::Approx(10.0));
}

TEST_CASE("parallel transactions collapse with summed weight and count") {
  std::vector<TransactionRecord> records{
      tx("A", NodeType::Core, "B", NodeType::Core, 5.0, 1),
      tx("A", NodeType::Core, "B", NodeType::Core, 5.0, 2),
      tx("A", NodeType::Core, "B", NodeType::Core, 5.0, 3)};
  HeteroGraph g = build_graph(records, "w1");
  CHECK(g.directed_edge_count() == 1);
  auto edges = g.out_edges(*g.find("A"));
  REQUIRE(edges.size() == 1);
  CHECK(edges[0].weight == doctest::Approx(15.0));
  CHECK(edges[0].count == 3);
}

TEST_CASE("illegal type pair is rejected") {
  std::vector<TransactionRecord> records{
      tx("M1", NodeType::Merchant, "M2", NodeType::Merchant, 1.0)};
  CHECK_THROWS_AS(build_graph(records, "w1"), std::invalid_argument);
}

TEST_CASE("negative amount is rejected") {
  std::vector<TransactionRecord> records{
      tx("A", NodeType::Core, "B", NodeType::Core, -1.0)};
  CHECK_THROWS_AS(build_graph(records, "w1"), std::invalid_argument);
}

TEST_CASE("conflicting node types are rejected") {
  std::vector<TransactionRecord> records{
      tx("A", NodeType::Core, "B", NodeType::Core, 1.0),
      tx("A", NodeType::Merchant, "C", NodeType::Core, 1.0)};
  CHECK_THROWS_AS(build_graph(records, "w1"), std::invalid_argument);
}

TEST_CASE("empty stream yields an empty graph") {
  HeteroGraph g = build_graph({}, "w1");
  CHECK(g.node_count() == 0);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("neighbors on star and path") {
  // star: center H with 4 leaves, plus path A-B-C via core transfers
  std::vector<TransactionRecord> records;
  for (int i = 0; i < 4; ++i) {
    records.push_back(tx("L" + std::to_string(i), NodeType::Core, "H", NodeType::Core, 1.0));
  }
  records.push_back(tx("pA", NodeType::Core, "pB", NodeType::Core, 1.0));
  records.push_back(tx("pB", NodeType::Core, "pC", NodeType::Core, 1.0));
  HeteroGraph g = build_graph(records, "w1");

  auto center = *g.find("H");
  CHECK(g.degree(center) == 4);
  auto nbrs = g.neighbors(center);
  CHECK(nbrs.size() == 4);
  CHECK(std::is_sorted(nbrs.begin(), nbrs.end()));

  auto leaf = *g.find("L0");
  auto leaf_nbrs = g.neighbors(leaf);
  REQUIRE(leaf_nbrs.size() == 1);
  CHECK(leaf_nbrs[0].first == center);

  auto mid = *g.find("pB");
  auto mid_nbrs = g.neighbors(mid);
  REQUIRE(mid_nbrs.size() == 2);
  CHECK(mid_nbrs[0].first == *g.find("pA"));
  CHECK(mid_nbrs[1].first == *g.find("pC"));

  CHECK_THROWS_AS(g.neighbors(g.node_count()), std::out_of_range);
  CHECK_THROWS_AS(g.degree(g.node_count() + 5), std::out_of_range);
}

TEST_CASE("triangle degrees and two-directional edges collapse to one undirected edge") {
  std::vector<TransactionRecord> records{
      tx("A", NodeType::Core, "B", NodeType::Core, 1.0),
      tx("B", NodeType::Core, "A", NodeType::Core, 2.0),  // same undirected pair
      tx("B", NodeType::Core, "C", NodeType::Core, 1.0),
      tx("C", NodeType::Core, "A", NodeType::Core, 1.0)};
  HeteroGraph g = build_graph(records, "w1");
  CHECK(g.directed_edge_count() == 4);
  CHECK(g.edge_count() == 3);
  for (std::uint32_t v = 0; v < 3; ++v) CHECK(g.degree(v) == 2);
  // A-B undirected weight sums both directions
  auto nbrs = g.neighbors(*g.find("A"));
  bool found = false;
  for (auto [w, weight] : nbrs) {
    if (w == *g.find("B")) {
      CHECK(weight == doctest::Approx(3.0));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("10-node star satisfies the handshake identity") {
  std::vector<TransactionRecord> records;
  for (int i = 0; i < 9; ++i) {
    records.push_back(tx("leaf" + std::to_string(i), NodeType::Core, "hub", NodeType::Core, 1.0));
  }
  HeteroGraph g = build_graph(records, "w1");
  CHECK(g.node_count() == 10);
  std::uint64_t degree_sum = 0;
  for (std::uint32_t v = 0; v < g.node_count(); ++v) degree_sum += g.degree(v);
  CHECK(degree_sum == 18);
  CHECK(degree_sum == 2 * g.edge_count());
  CHECK(g.degree(*g.find("hub")) == 9);
}

TEST_CASE("self-transfers stay directed but leave the undirected view") {
  std::vector<TransactionRecord> records{
      tx("A", NodeType::Core, "A", NodeType::Core, 5.0),
      tx("A", NodeType::Core, "B", NodeType::Core, 1.0)};
  HeteroGraph g = build_graph(records, "w1");
  CHECK(g.directed_edge_count() == 2);
  CHECK(g.edge_count() == 1);
  CHECK(g.degree(*g.find("A")) == 1);
}

TEST_CASE("canonical serialization round-trips bitwise") {
  Rng rng(5);
  auto records = oracles::random_core_records(12, 0.2, rng);
  HeteroGraph g = build_graph(records, "w3");
  std::string bytes = g.canonical_serialize();
  HeteroGraph rebuilt = HeteroGraph::parse_canonical(bytes);
  CHECK(rebuilt.canonical_serialize() == bytes);
  CHECK(rebuilt.week() == "w3");
  CHECK(rebuilt.node_count() == g.node_count());
  CHECK(rebuilt.edge_count() == g.edge_count());
}

TEST_CASE("build is deterministic under record permutation") {
  Rng rng(17);
  auto records = oracles::random_core_records(15, 0.25, rng);
  HeteroGraph base = build_graph(records, "w1");
  const std::string expect = base.canonical_serialize();
  for (int trial = 0; trial < 5; ++trial) {
    // shuffle
    for (std::size_t k = 0; k + 1 < records.size(); ++k) {
      std::size_t j = k + rng.index(records.size() - k);
      std::swap(records[k], records[j]);
    }
    HeteroGraph g = build_graph(records, "w1");
    CHECK(g.canonical_serialize() == expect);
  }
}

TEST_CASE("undirected view is symmetric on random graphs") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    auto records = oracles::random_core_records(20, 0.15, rng);
    if (records.empty()) continue;
    HeteroGraph g = build_graph(records, "w1");
    for (std::uint32_t u = 0; u < g.node_count(); ++u) {
      for (std::uint32_t w : g.neighbor_ids(u)) {
        auto back = g.neighbor_ids(w);
        CHECK(std::binary_search(back.begin(), back.end(), u));
        CHECK(w != u);  // no self-loops
      }
    }
    std::uint64_t degree_sum = 0;
    for (std::uint32_t v = 0; v < g.node_count(); ++v) degree_sum += g.degree(v);
    CHECK(degree_sum == 2 * g.edge_count());
  }
}

TEST_CASE("csv parser reports line numbers") {
  std::istringstream bad_header("foo\n");
  CHECK_THROWS_WITH_AS(read_transactions_csv(bad_header),
                       doctest::Contains("line 1"), std::invalid_argument);

  std::istringstream bad_type(
      "sender_id,sender_type,receiver_id,receiver_type,amount,timestamp\n"
      "A,core,B,core,1.0,5\n"
      "A,core,B,shop,2.0,6\n");
  CHECK_THROWS_WITH_AS(read_transactions_csv(bad_type), doctest::Contains("line 3"),
                       std::invalid_argument);

  std::istringstream bad_pair(
      "sender_id,sender_type,receiver_id,receiver_type,amount,timestamp\n"
      "A,merchant,B,foreign,1.0,5\n");
  CHECK_THROWS_WITH_AS(read_transactions_csv(bad_pair), doctest::Contains("line 2"),
                       std::invalid_argument);

  std::istringstream negative(
      "sender_id,sender_type,receiver_id,receiver_type,amount,timestamp\n"
      "A,core,B,core,-3.5,5\n");
  CHECK_THROWS_WITH_AS(read_transactions_csv(negative), doctest::Contains("line 2"),
                       std::invalid_argument);
}

TEST_CASE("csv write/read round-trip preserves the graph") {
  Rng rng(31);
  auto records = oracles::random_core_records(10, 0.3, rng);
  HeteroGraph g = build_graph(records, "w1");

  std::ostringstream out;
  write_transactions_csv(out, records);
  std::istringstream in(out.str());
  auto parsed = read_transactions_csv(in);
  HeteroGraph g2 = build_graph(parsed, "w1");
  CHECK(g2.canonical_serialize() == g.canonical_serialize());
}
