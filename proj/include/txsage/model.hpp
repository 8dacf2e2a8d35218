#pragma once

// Two-layer mean-aggregator network: 32-dim embeddings from hash-derived node
// features. Layer 1 is ReLU over the aggregated inputs, layer 2 sigmoid, so
// every embedding component lies in (0,1). Input features are a pure function
// of (type, id) — never trained — which is what makes inference on nodes the
// model has never seen well-defined.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "txsage/graph.hpp"
#include "txsage/linalg.hpp"
#include "txsage/rng.hpp"
#include "txsage/sampler.hpp"

namespace txsage {

struct ModelConfig {
  int input_dim = 32;
  int hidden_dim = 64;
  int output_dim = 32;
  static constexpr int layers = 2;
};

struct ModelParams {
  Mat w1;  // hidden_dim x input_dim
  Vec b1;  // hidden_dim
  Mat w2;  // output_dim x hidden_dim
  Vec b2;  // output_dim
};

/// Deterministic pseudo-random feature vector in [0,1)^input_dim from a
/// stable hash of (type, id). Identical across runs, machines and snapshots.
Vec node_features(std::string_view id, NodeType type, int input_dim);

/// Feature rows for every node of the graph, indexed by node index.
Mat feature_matrix(const HeteroGraph& g, int input_dim);

/// Weights uniform in ±1/sqrt(fan_in), biases zero; reproducible from seed.
ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);

/// Elementwise mean of {self} ∪ neighbors. Summation is done per dimension in
/// ascending value order, so the result is invariant under any permutation of
/// the neighbor vectors, bit for bit. Empty neighborhood returns self.
Vec aggregate_mean(const Vec& self, std::span<const Vec> neighbors);

/// Node index -> embedding for one inference snapshot.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::string week, std::uint32_t node_count, int dim);

  const std::string& week() const { return week_; }
  int dim() const { return dim_; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(present_.size()); }

  bool has(std::uint32_t v) const { return v < present_.size() && present_[v] != 0; }
  const Vec& at(std::uint32_t v) const;
  /// Validates shape, finiteness and the open-interval (0,1) range.
  void set(std::uint32_t v, Vec value);

 private:
  std::string week_;
  int dim_ = 0;
  std::vector<Vec> rows_;
  std::vector<std::uint8_t> present_;
};

/// Sampled two-hop forward pass for the given seed nodes: layer 1 over each
/// seed and its sampled 1-hop neighbors (each aggregating its own sampled
/// 2-hop neighborhood), layer 2 at the seed. With fanouts >= max degree the
/// computation is sampling-free and deterministic.
EmbeddingTable forward(const HeteroGraph& g, const ModelConfig& cfg,
                       const ModelParams& params, std::span<const std::uint32_t> seeds,
                       const SamplerConfig& sampler_cfg, Rng& rng);

/// Exact full-neighborhood pass over every node (the fanout >= max degree
/// case, computed as two dense layers over the whole graph).
EmbeddingTable forward_all(const HeteroGraph& g, const ModelConfig& cfg,
                           const ModelParams& params);

// ---- checkpoint + embedding CSV formats ----

struct Checkpoint {
  ModelConfig config;
  std::uint64_t seed = 0;
  ModelParams params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// `node_id,node_type,e0,...,e{D-1}` with 9 significant digits, in node index
/// order.
void write_embeddings_csv(std::ostream& out, const HeteroGraph& g,
                          const EmbeddingTable& table);

struct EmbeddingRows {
  std::vector<std::string> ids;
  std::vector<NodeType> types;
  std::vector<Vec> vectors;
};
EmbeddingRows read_embeddings_csv(std::istream& in);

}  // namespace txsage
