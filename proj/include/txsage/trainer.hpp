#pragma once

// Unsupervised training: for a positive pair (u,v) with Q sampled
// non-neighbors of u,
//
//   loss = -log σ(z_u·z_v) - Q · mean_i log σ(-z_u·z_neg_i)
//
// minimized by mini-batch SGD with exact analytic gradients backpropagated
// through the sampled two-hop computation trees. Trees are held fixed during
// differentiation and re-sampled every batch.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "txsage/graph.hpp"
#include "txsage/linalg.hpp"
#include "txsage/model.hpp"
#include "txsage/rng.hpp"
#include "txsage/sampler.hpp"

namespace txsage {

struct TrainConfig {
  double learning_rate = 0.01;
  int negatives_q = 2;
  int epochs = 10;
  int batch_size = 128;
  int pairs_per_node = 1;  // positive pairs per epoch = edge_count * pairs_per_node
  std::uint64_t seed = 0;
};

struct LossBreakdown {
  double total = 0.0;
  double positive_term = 0.0;
  double negative_term_mean = 0.0;
  int q = 0;
};

/// Loss for one positive pair against Q negatives. σ-log arguments are
/// clamped below at 1e-15, capping each term near 34.54.
LossBreakdown pair_loss(const Vec& z_u, const Vec& z_v, std::span<const Vec> z_negs);

struct ParamGrads {
  Mat w1;
  Vec b1;
  Mat w2;
  Vec b2;
};

/// Sampled computation plan for one batch. Nodes shared between trees are
/// deduplicated: every unique node gets one sampled neighborhood per batch.
struct BatchPlan {
  std::vector<std::uint32_t> roots;                   // sorted unique u/v/neg nodes
  std::vector<std::vector<std::uint32_t>> root_hop1;  // aligned with roots
  std::vector<std::uint32_t> l1_nodes;                // sorted unique roots ∪ hop1
  std::vector<std::vector<std::uint32_t>> l1_hop2;    // aligned with l1_nodes
  struct PairRef {
    std::uint32_t u_slot = 0;
    std::uint32_t v_slot = 0;
    std::vector<std::uint32_t> neg_slots;
  };
  std::vector<PairRef> pairs;  // slots index into roots
  int q = 0;
};

/// Samples negatives and both hop levels for the batch. RNG consumption order
/// is fixed (pairs in order, then roots ascending, then layer-1 nodes
/// ascending), so the plan is reproducible from the stream state.
BatchPlan plan_batch(const HeteroGraph& g,
                     std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs,
                     int negatives_q, const SamplerConfig& sampler_cfg, Rng& rng);

/// Mean pair loss over the planned batch, with the trees held fixed.
LossBreakdown batch_loss(const ModelConfig& cfg, const ModelParams& params,
                         const BatchPlan& plan, const Mat& features);

/// Exact analytic gradient of the mean pair loss with respect to every
/// parameter entry, plus the loss itself.
std::pair<ParamGrads, LossBreakdown> batch_gradients(const ModelConfig& cfg,
                                                     const ModelParams& params,
                                                     const BatchPlan& plan,
                                                     const Mat& features);

/// Convenience form matching the training loop: samples a plan internally.
std::pair<ParamGrads, LossBreakdown> batch_gradients(
    const HeteroGraph& g, const ModelConfig& cfg, const ModelParams& params,
    std::span<const std::pair<std::uint32_t, std::uint32_t>> batch,
    const SamplerConfig& sampler_cfg, const TrainConfig& train_cfg, Rng& rng);

/// params <- params - lr * grads. Throws on non-finite gradients, naming the
/// offending block.
void sgd_step(ModelParams& params, const ParamGrads& grads, double learning_rate);

struct BatchLogRow {
  int epoch = 0;
  int batch = 0;
  LossBreakdown loss;
};

struct TrainResult {
  ModelParams params;
  std::vector<LossBreakdown> epoch_means;
  std::vector<BatchLogRow> log;
};

/// Full training run: epochs × ceil(edge_count·pairs_per_node / batch_size)
/// batches, reproducible bit-for-bit from the seed.
TrainResult train(const HeteroGraph& g, const ModelConfig& model_cfg,
                  const TrainConfig& train_cfg, const SamplerConfig& sampler_cfg);

/// `epoch,batch,total_loss,positive_term,negative_term_mean`
void write_training_log_csv(std::ostream& out, std::span<const BatchLogRow> log);

}  // namespace txsage
