#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "oracles.hpp"
#include "txsage/graph.hpp"
#include "txsage/model.hpp"

using namespace txsage;

namespace {

TransactionRecord core_tx(const std::string& s, const std::string& r, double amount) {
  return {s, NodeType::Core, r, NodeType::Core, amount, 0};
}

SamplerConfig full_fanout() {
  SamplerConfig cfg;
  cfg.fanout_per_layer = {1000, 1000};
  return cfg;
}

}  // namespace

TEST_CASE("node features are a pure function of (id, type)") {
  Vec a = node_features("A", NodeType::Core, 32);
  Vec b = node_features("A", NodeType::Core, 32);
  CHECK(a == b);
  CHECK(node_features("A", NodeType::Merchant, 32) != a);
  CHECK(node_features("B", NodeType::Core, 32) != a);
  for (double x : a) {
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("feature components are uniform on [0,1) (K-S test, 1e5 nodes)") {
  const int n = 100000;
  std::vector<double> sample;
  sample.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vec f = node_features("acct" + std::to_string(i), NodeType::Core, 4);
    sample.push_back(f[0]);
  }
  std::sort(sample.begin(), sample.end());
  double d_stat = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample[static_cast<std::size_t>(i)];
    d_stat = std::max(d_stat, std::abs((i + 1.0) / n - x));
    d_stat = std::max(d_stat, std::abs(x - static_cast<double>(i) / n));
  }
  // critical value at alpha=0.001: 1.9495 / sqrt(n)
  CHECK(d_stat < 1.9494746 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("init_params: reproducible, zero biases, fan-in bound") {
  ModelConfig cfg;
  cfg.input_dim = 16;
  cfg.hidden_dim = 8;
  cfg.output_dim = 4;
  ModelParams p1 = init_params(cfg, 77);
  ModelParams p2 = init_params(cfg, 77);
  CHECK(p1.w1.data == p2.w1.data);
  CHECK(p1.w2.data == p2.w2.data);
  for (double b : p1.b1) CHECK(b == 0.0);
  for (double b : p1.b2) CHECK(b == 0.0);
  const double bound1 = 1.0 / std::sqrt(16.0);
  for (double w : p1.w1.data) CHECK(std::abs(w) <= bound1);
  const double bound2 = 1.0 / std::sqrt(8.0);
  for (double w : p1.w2.data) CHECK(std::abs(w) <= bound2);
  CHECK(init_params(cfg, 78).w1.data != p1.w1.data);
}

TEST_CASE("aggregate_mean hand cases") {
  Vec self{1.0, 1.0};
  std::vector<Vec> nbrs{{0.0, 2.0}, {2.0, 0.0}};
  Vec m = aggregate_mean(self, nbrs);
  CHECK(m[0] == doctest::Approx(1.0));
  CHECK(m[1] == doctest::Approx(1.0));

  CHECK(aggregate_mean(self, {}) == self);

  Vec v{0.3, 0.7};
  std::vector<Vec> same{v, v};
  Vec mv = aggregate_mean(v, same);
  CHECK(mv[0] == doctest::Approx(0.3));
  CHECK(mv[1] == doctest::Approx(0.7));

  std::vector<Vec> bad{{1.0, 2.0, 3.0}};
  CHECK_THROWS_AS(aggregate_mean(self, bad), std::invalid_argument);
}

TEST_CASE("aggregate_mean is bitwise permutation invariant") {
  Rng rng(5);
  Vec self(8);
  for (auto& x : self) x = rng.next_double();
  std::vector<Vec> nbrs(7, Vec(8));
  for (auto& nb : nbrs) {
    for (auto& x : nb) x = rng.next_double() * 3.0 - 1.0;
  }
  Vec base = aggregate_mean(self, nbrs);
  for (int trial = 0; trial < 20; ++trial) {
    for (std::size_t k = 0; k + 1 < nbrs.size(); ++k) {
      std::size_t j = k + rng.index(nbrs.size() - k);
      std::swap(nbrs[k], nbrs[j]);
    }
    Vec shuffled = aggregate_mean(self, nbrs);
    CHECK(shuffled == base);  // exact equality
  }
}

TEST_CASE("zero parameters give constant 0.5 embeddings") {
  std::vector<TransactionRecord> records{core_tx("A", "B", 1.0), core_tx("B", "C", 1.0)};
  HeteroGraph g = build_graph(records, "w");
  ModelConfig cfg;
  ModelParams zero;
  zero.w1 = Mat(cfg.hidden_dim, cfg.input_dim);
  zero.b1.assign(cfg.hidden_dim, 0.0);
  zero.w2 = Mat(cfg.output_dim, cfg.hidden_dim);
  zero.b2.assign(cfg.output_dim, 0.0);
  EmbeddingTable table = forward_all(g, cfg, zero);
  for (std::uint32_t v = 0; v < g.node_count(); ++v) {
    for (double x : table.at(v)) CHECK(x == doctest::Approx(0.5));
  }
}

TEST_CASE("isolated node embedding depends only on its own features") {
  // same isolated node X in two very different graphs
  std::vector<TransactionRecord> r1{core_tx("X", "X", 1.0), core_tx("A", "B", 1.0)};
  std::vector<TransactionRecord> r2{core_tx("X", "X", 1.0), core_tx("P", "Q", 2.0),
                                    core_tx("Q", "R", 2.0)};
  HeteroGraph g1 = build_graph(r1, "w1");
  HeteroGraph g2 = build_graph(r2, "w2");
  ModelConfig cfg;
  ModelParams params = init_params(cfg, 3);
  EmbeddingTable t1 = forward_all(g1, cfg, params);
  EmbeddingTable t2 = forward_all(g2, cfg, params);
  CHECK(t1.at(*g1.find("X")) == t2.at(*g2.find("X")));
}

TEST_CASE("3-node path at full fanout matches the dense reference") {
  std::vector<TransactionRecord> records{core_tx("A", "B", 1.0), core_tx("B", "C", 1.0)};
  HeteroGraph g = build_graph(records, "w");
  ModelConfig cfg;
  ModelParams params = init_params(cfg, 11);
  auto naive = oracles::naive_forward_all(g, cfg, params);

  Rng rng(1);
  std::vector<std::uint32_t> seeds{*g.find("B")};
  SamplerConfig scfg = full_fanout();
  EmbeddingTable table = forward(g, cfg, params, seeds, scfg, rng);
  const Vec& z = table.at(seeds[0]);
  for (std::size_t k = 0; k < z.size(); ++k) {
    CHECK(z[k] == doctest::Approx(naive[seeds[0]][k]).epsilon(1e-12));
  }
}

TEST_CASE("full-fanout forward equals the dense reference on random graphs <= 20 nodes") {
  Rng graph_rng(9);
  for (int trial = 0; trial < 8; ++trial) {
    auto records = oracles::random_core_records(4 + trial * 2, 0.3, graph_rng);
    if (records.empty()) continue;
    HeteroGraph g = build_graph(records, "w");
    REQUIRE(g.node_count() <= 20);
    ModelConfig cfg;
    cfg.input_dim = 8;
    cfg.hidden_dim = 12;
    cfg.output_dim = 6;
    ModelParams params = init_params(cfg, 100 + static_cast<std::uint64_t>(trial));
    auto naive = oracles::naive_forward_all(g, cfg, params);

    EmbeddingTable dense = forward_all(g, cfg, params);
    std::vector<std::uint32_t> seeds(g.node_count());
    for (std::uint32_t v = 0; v < g.node_count(); ++v) seeds[v] = v;
    Rng rng(trial);
    EmbeddingTable sampled = forward(g, cfg, params, seeds, full_fanout(), rng);

    for (std::uint32_t v = 0; v < g.node_count(); ++v) {
      for (int k = 0; k < cfg.output_dim; ++k) {
        CHECK(std::abs(dense.at(v)[static_cast<std::size_t>(k)] -
                       naive[v][static_cast<std::size_t>(k)]) < 1e-12);
        CHECK(std::abs(sampled.at(v)[static_cast<std::size_t>(k)] -
                       naive[v][static_cast<std::size_t>(k)]) < 1e-12);
      }
    }
  }
}

TEST_CASE("embedding components lie strictly inside (0,1)") {
  Rng graph_rng(21);
  auto records = oracles::random_core_records(15, 0.25, graph_rng);
  HeteroGraph g = build_graph(records, "w");
  ModelConfig cfg;
  ModelParams params = init_params(cfg, 5);
  EmbeddingTable table = forward_all(g, cfg, params);
  for (std::uint32_t v = 0; v < g.node_count(); ++v) {
    for (double x : table.at(v)) {
      CHECK(x > 0.0);
      CHECK(x < 1.0);
    }
  }
}

TEST_CASE("inductive consistency: same id and same neighborhood, same embedding") {
  // node X with neighbors P, Q in week 1; unrelated extra structure in week 2
  std::vector<TransactionRecord> w1{core_tx("X", "P", 1.0), core_tx("X", "Q", 2.0)};
  std::vector<TransactionRecord> w2{core_tx("X", "P", 5.0), core_tx("Q", "X", 1.0),
                                    core_tx("E", "F", 3.0)};
  HeteroGraph g1 = build_graph(w1, "w1");
  HeteroGraph g2 = build_graph(w2, "w2");
  ModelConfig cfg;
  ModelParams params = init_params(cfg, 19);
  EmbeddingTable t1 = forward_all(g1, cfg, params);
  EmbeddingTable t2 = forward_all(g2, cfg, params);
  // X's 2-hop neighborhood multiset is {P, Q} in both weeks (weights ignored)
  const Vec& z1 = t1.at(*g1.find("X"));
  const Vec& z2 = t2.at(*g2.find("X"));
  for (std::size_t k = 0; k < z1.size(); ++k) {
    CHECK(z1[k] == doctest::Approx(z2[k]).epsilon(1e-12));
  }
}

TEST_CASE("checkpoint save/load round-trips bitwise") {
  ModelConfig cfg;
  cfg.input_dim = 12;
  cfg.hidden_dim = 20;
  cfg.output_dim = 8;
  Checkpoint ckpt{cfg, 4242, init_params(cfg, 4242)};
  const std::string path =
      (std::filesystem::temp_directory_path() / "txsage_test_model.ckpt").string();
  save_checkpoint(path, ckpt);
  Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.config.input_dim == 12);
  CHECK(loaded.config.hidden_dim == 20);
  CHECK(loaded.config.output_dim == 8);
  CHECK(loaded.seed == 4242);
  CHECK(loaded.params.w1.data == ckpt.params.w1.data);
  CHECK(loaded.params.b1 == ckpt.params.b1);
  CHECK(loaded.params.w2.data == ckpt.params.w2.data);
  CHECK(loaded.params.b2 == ckpt.params.b2);
  std::filesystem::remove(path);
}

TEST_CASE("embedding csv writes node order and round-trips values") {
  std::vector<TransactionRecord> records{core_tx("A", "B", 1.0), core_tx("B", "C", 1.0)};
  HeteroGraph g = build_graph(records, "w");
  ModelConfig cfg;
  cfg.input_dim = 6;
  cfg.hidden_dim = 5;
  cfg.output_dim = 4;
  ModelParams params = init_params(cfg, 8);
  EmbeddingTable table = forward_all(g, cfg, params);

  std::ostringstream out;
  write_embeddings_csv(out, g, table);
  std::istringstream in(out.str());
  EmbeddingRows rows = read_embeddings_csv(in);
  REQUIRE(rows.ids.size() == 3);
  CHECK(rows.ids[0] == "A");
  CHECK(rows.types[0] == NodeType::Core);
  for (std::size_t i = 0; i < rows.ids.size(); ++i) {
    const Vec& z = table.at(*g.find(rows.ids[i]));
    for (std::size_t k = 0; k < z.size(); ++k) {
      CHECK(rows.vectors[i][k] == doctest::Approx(z[k]).epsilon(1e-8));  // 9 sig digits
    }
  }
}
