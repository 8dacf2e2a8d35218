#include "txsage/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace txsage {

namespace {

// -log σ(x) with the σ argument clamped below at 1e-15: beyond the clamp the
// term is constant, so its derivative is zero.
constexpr double kLogClampArg = 1e-15;
const double kTermCap = -std::log(kLogClampArg);  // 34.538776394910684

inline double neg_log_sigmoid(double x, double* dterm_dx) {
  double term = softplus(-x);
  if (term >= kTermCap) {
    if (dterm_dx) *dterm_dx = 0.0;
    return kTermCap;
  }
  // d/dx -log σ(x) = σ(x) - 1
  if (dterm_dx) *dterm_dx = sigmoid(x) - 1.0;
  return term;
}

}  // namespace

LossBreakdown pair_loss(const Vec& z_u, const Vec& z_v, std::span<const Vec> z_negs) {
  if (z_negs.empty()) throw std::invalid_argument("pair_loss: need at least one negative");
  if (z_u.size() != z_v.size()) throw std::invalid_argument("pair_loss: dimension mismatch");
  for (const auto& zn : z_negs) {
    if (zn.size() != z_u.size()) throw std::invalid_argument("pair_loss: dimension mismatch");
  }
  LossBreakdown out;
  out.q = static_cast<int>(z_negs.size());
  out.positive_term = neg_log_sigmoid(dot(z_u, z_v), nullptr);
  double neg_sum = 0.0;
  for (const auto& zn : z_negs) neg_sum += neg_log_sigmoid(-dot(z_u, zn), nullptr);
  out.negative_term_mean = neg_sum / static_cast<double>(out.q);
  out.total = out.positive_term + out.q * out.negative_term_mean;
  return out;
}

BatchPlan plan_batch(const HeteroGraph& g,
                     std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs,
                     int negatives_q, const SamplerConfig& sampler_cfg, Rng& rng) {
  if (pairs.empty()) throw std::invalid_argument("plan_batch: batch is empty");
  if (negatives_q < 1) throw std::invalid_argument("plan_batch: negatives_q must be >= 1");
  if (sampler_cfg.fanout_per_layer.size() != 2) {
    throw std::invalid_argument("plan_batch: expected one fanout per layer (2 layers)");
  }

  BatchPlan plan;
  plan.q = negatives_q;

  // 1) negatives per pair, in pair order
  std::vector<std::vector<std::uint32_t>> negs(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    negs[i] = sample_negatives(g, pairs[i].first, negatives_q, rng);
  }

  // 2) unique roots
  plan.roots.reserve(pairs.size() * (2 + static_cast<std::size_t>(negatives_q)));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    plan.roots.push_back(pairs[i].first);
    plan.roots.push_back(pairs[i].second);
    plan.roots.insert(plan.roots.end(), negs[i].begin(), negs[i].end());
  }
  std::sort(plan.roots.begin(), plan.roots.end());
  plan.roots.erase(std::unique(plan.roots.begin(), plan.roots.end()), plan.roots.end());

  auto slot_of = [](const std::vector<std::uint32_t>& sorted, std::uint32_t v) {
    return static_cast<std::uint32_t>(
        std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
  };
  plan.pairs.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    BatchPlan::PairRef ref;
    ref.u_slot = slot_of(plan.roots, pairs[i].first);
    ref.v_slot = slot_of(plan.roots, pairs[i].second);
    ref.neg_slots.reserve(negs[i].size());
    for (std::uint32_t nv : negs[i]) ref.neg_slots.push_back(slot_of(plan.roots, nv));
    plan.pairs.push_back(std::move(ref));
  }

  // 3) hop-1 per root, ascending root order
  const int fan1 = sampler_cfg.fanout_per_layer[0];
  const int fan2 = sampler_cfg.fanout_per_layer[1];
  plan.root_hop1.reserve(plan.roots.size());
  for (std::uint32_t r : plan.roots) {
    plan.root_hop1.push_back(sample_neighbors(g, r, fan1, sampler_cfg.weighted, rng));
  }

  // 4) unique layer-1 node set and its hop-2 samples
  plan.l1_nodes = plan.roots;
  for (const auto& hop1 : plan.root_hop1) {
    plan.l1_nodes.insert(plan.l1_nodes.end(), hop1.begin(), hop1.end());
  }
  std::sort(plan.l1_nodes.begin(), plan.l1_nodes.end());
  plan.l1_nodes.erase(std::unique(plan.l1_nodes.begin(), plan.l1_nodes.end()),
                      plan.l1_nodes.end());
  plan.l1_hop2.reserve(plan.l1_nodes.size());
  for (std::uint32_t w : plan.l1_nodes) {
    plan.l1_hop2.push_back(sample_neighbors(g, w, fan2, sampler_cfg.weighted, rng));
  }
  return plan;
}

namespace {

// Forward state retained for backprop.
struct BatchTape {
  Mat m;    // l1 x input     aggregated inputs
  Mat s1;   // l1 x hidden    pre-activation
  Mat h1;   // l1 x hidden    relu(s1)
  Mat a;    // roots x hidden aggregated hidden states
  Mat z;    // roots x output sigmoid outputs
};

std::uint32_t l1_slot(const BatchPlan& plan, std::uint32_t node) {
  return static_cast<std::uint32_t>(
      std::lower_bound(plan.l1_nodes.begin(), plan.l1_nodes.end(), node) -
      plan.l1_nodes.begin());
}

BatchTape compute_tape(const ModelConfig& cfg, const ModelParams& params,
                       const BatchPlan& plan, const Mat& x) {
  const auto n_l1 = static_cast<int>(plan.l1_nodes.size());
  const auto n_roots = static_cast<int>(plan.roots.size());
  BatchTape tape;
  tape.m = Mat(n_l1, cfg.input_dim);
  tape.s1 = Mat(n_l1, cfg.hidden_dim);
  tape.h1 = Mat(n_l1, cfg.hidden_dim);

  for (int i = 0; i < n_l1; ++i) {
    const std::uint32_t w = plan.l1_nodes[i];
    const auto& sampled = plan.l1_hop2[i];
    double* mrow = tape.m.row(i);
    const double* self = x.row(static_cast<int>(w));
    for (int k = 0; k < cfg.input_dim; ++k) mrow[k] = self[k];
    for (std::uint32_t s : sampled) {
      const double* r = x.row(static_cast<int>(s));
      for (int k = 0; k < cfg.input_dim; ++k) mrow[k] += r[k];
    }
    const double inv = 1.0 / static_cast<double>(sampled.size() + 1);
    for (int k = 0; k < cfg.input_dim; ++k) mrow[k] *= inv;

    matvec_bias(params.w1, mrow, params.b1.data(), tape.s1.row(i));
    const double* s1row = tape.s1.row(i);
    double* h1row = tape.h1.row(i);
    for (int k = 0; k < cfg.hidden_dim; ++k) h1row[k] = s1row[k] > 0.0 ? s1row[k] : 0.0;
  }

  tape.a = Mat(n_roots, cfg.hidden_dim);
  tape.z = Mat(n_roots, cfg.output_dim);
  for (int r = 0; r < n_roots; ++r) {
    const auto& hop1 = plan.root_hop1[r];
    double* arow = tape.a.row(r);
    const double* selfh = tape.h1.row(static_cast<int>(l1_slot(plan, plan.roots[r])));
    for (int k = 0; k < cfg.hidden_dim; ++k) arow[k] = selfh[k];
    for (std::uint32_t w : hop1) {
      const double* hw = tape.h1.row(static_cast<int>(l1_slot(plan, w)));
      for (int k = 0; k < cfg.hidden_dim; ++k) arow[k] += hw[k];
    }
    const double inv = 1.0 / static_cast<double>(hop1.size() + 1);
    for (int k = 0; k < cfg.hidden_dim; ++k) arow[k] *= inv;

    double* zrow = tape.z.row(r);
    matvec_bias(params.w2, arow, params.b2.data(), zrow);
    for (int k = 0; k < cfg.output_dim; ++k) {
      double s = sigmoid(zrow[k]);
      // keep strictly inside (0,1); matches the inference path
      if (s < 1e-15) s = 1e-15;
      if (s > 1.0 - 1e-15) s = 1.0 - 1e-15;
      zrow[k] = s;
    }
  }
  return tape;
}

// Mean loss over the batch and, when dz is non-null, dLoss/dz accumulated per
// root (already scaled by 1/batch).
LossBreakdown loss_and_zgrad(const ModelConfig& cfg, const BatchPlan& plan,
                             const BatchTape& tape, Mat* dz) {
  const int d = cfg.output_dim;
  const double inv_batch = 1.0 / static_cast<double>(plan.pairs.size());
  LossBreakdown sum;
  sum.q = plan.q;

  for (const auto& pr : plan.pairs) {
    const double* zu = tape.z.row(static_cast<int>(pr.u_slot));
    const double* zv = tape.z.row(static_cast<int>(pr.v_slot));
    double p = 0.0;
    for (int k = 0; k < d; ++k) p += zu[k] * zv[k];
    double dpos = 0.0;
    sum.positive_term += neg_log_sigmoid(p, &dpos);
    if (dz) {
      double* du = dz->row(static_cast<int>(pr.u_slot));
      double* dv = dz->row(static_cast<int>(pr.v_slot));
      for (int k = 0; k < d; ++k) {
        du[k] += inv_batch * dpos * zv[k];
        dv[k] += inv_batch * dpos * zu[k];
      }
    }
    double neg_sum = 0.0;
    for (std::uint32_t ns : pr.neg_slots) {
      const double* zn = tape.z.row(static_cast<int>(ns));
      double q_i = 0.0;
      for (int k = 0; k < d; ++k) q_i += zu[k] * zn[k];
      // term = -log σ(-q_i); d/dq_i = σ(q_i)
      double dneg = 0.0;
      neg_sum += neg_log_sigmoid(-q_i, &dneg);
      dneg = -dneg;  // chain through the sign flip
      if (dz) {
        double* du = dz->row(static_cast<int>(pr.u_slot));
        double* dn = dz->row(static_cast<int>(ns));
        for (int k = 0; k < d; ++k) {
          du[k] += inv_batch * dneg * zn[k];
          dn[k] += inv_batch * dneg * zu[k];
        }
      }
    }
    sum.negative_term_mean += neg_sum / static_cast<double>(plan.q);
  }

  LossBreakdown mean;
  mean.q = plan.q;
  mean.positive_term = sum.positive_term * inv_batch;
  mean.negative_term_mean = sum.negative_term_mean * inv_batch;
  mean.total = mean.positive_term + mean.q * mean.negative_term_mean;
  return mean;
}

}  // namespace

LossBreakdown batch_loss(const ModelConfig& cfg, const ModelParams& params,
                         const BatchPlan& plan, const Mat& features) {
  BatchTape tape = compute_tape(cfg, params, plan, features);
  return loss_and_zgrad(cfg, plan, tape, nullptr);
}

std::pair<ParamGrads, LossBreakdown> batch_gradients(const ModelConfig& cfg,
                                                     const ModelParams& params,
                                                     const BatchPlan& plan,
                                                     const Mat& features) {
  BatchTape tape = compute_tape(cfg, params, plan, features);
  Mat dz(static_cast<int>(plan.roots.size()), cfg.output_dim);
  LossBreakdown loss = loss_and_zgrad(cfg, plan, tape, &dz);

  ParamGrads g;
  g.w1 = Mat(cfg.hidden_dim, cfg.input_dim);
  g.b1.assign(static_cast<std::size_t>(cfg.hidden_dim), 0.0);
  g.w2 = Mat(cfg.output_dim, cfg.hidden_dim);
  g.b2.assign(static_cast<std::size_t>(cfg.output_dim), 0.0);

  // through layer 2 at each root, accumulating shares into dh1
  Mat dh1(static_cast<int>(plan.l1_nodes.size()), cfg.hidden_dim);
  Vec ds2(static_cast<std::size_t>(cfg.output_dim));
  Vec da(static_cast<std::size_t>(cfg.hidden_dim));
  for (std::size_t r = 0; r < plan.roots.size(); ++r) {
    const double* zrow = tape.z.row(static_cast<int>(r));
    const double* dzrow = dz.row(static_cast<int>(r));
    for (int k = 0; k < cfg.output_dim; ++k) {
      ds2[k] = dzrow[k] * zrow[k] * (1.0 - zrow[k]);
      g.b2[static_cast<std::size_t>(k)] += ds2[static_cast<std::size_t>(k)];
    }
    add_outer(g.w2, ds2.data(), tape.a.row(static_cast<int>(r)));
    std::fill(da.begin(), da.end(), 0.0);
    matvec_t_add(params.w2, ds2.data(), da.data());

    const auto& hop1 = plan.root_hop1[r];
    const double share = 1.0 / static_cast<double>(hop1.size() + 1);
    double* dself = dh1.row(static_cast<int>(l1_slot(plan, plan.roots[r])));
    for (int k = 0; k < cfg.hidden_dim; ++k) dself[k] += share * da[static_cast<std::size_t>(k)];
    for (std::uint32_t w : hop1) {
      double* dw = dh1.row(static_cast<int>(l1_slot(plan, w)));
      for (int k = 0; k < cfg.hidden_dim; ++k) dw[k] += share * da[static_cast<std::size_t>(k)];
    }
  }

  // through layer 1 at each unique node; relu'(0) taken as 0
  Vec ds1(static_cast<std::size_t>(cfg.hidden_dim));
  for (std::size_t i = 0; i < plan.l1_nodes.size(); ++i) {
    const double* s1row = tape.s1.row(static_cast<int>(i));
    const double* dh1row = dh1.row(static_cast<int>(i));
    for (int k = 0; k < cfg.hidden_dim; ++k) {
      ds1[static_cast<std::size_t>(k)] = s1row[k] > 0.0 ? dh1row[k] : 0.0;
      g.b1[static_cast<std::size_t>(k)] += ds1[static_cast<std::size_t>(k)];
    }
    add_outer(g.w1, ds1.data(), tape.m.row(static_cast<int>(i)));
  }
  return {std::move(g), loss};
}

std::pair<ParamGrads, LossBreakdown> batch_gradients(
    const HeteroGraph& g, const ModelConfig& cfg, const ModelParams& params,
    std::span<const std::pair<std::uint32_t, std::uint32_t>> batch,
    const SamplerConfig& sampler_cfg, const TrainConfig& train_cfg, Rng& rng) {
  BatchPlan plan = plan_batch(g, batch, train_cfg.negatives_q, sampler_cfg, rng);
  Mat x = feature_matrix(g, cfg.input_dim);
  return batch_gradients(cfg, params, plan, x);
}

void sgd_step(ModelParams& params, const ParamGrads& grads, double learning_rate) {
  auto apply = [&](std::vector<double>& p, const std::vector<double>& grad,
                   const char* block) {
    if (p.size() != grad.size()) {
      throw std::invalid_argument(std::string("sgd_step: shape mismatch in ") + block);
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!std::isfinite(grad[i])) {
        throw std::runtime_error(std::string("sgd_step: non-finite gradient in ") + block +
                                 " at entry " + std::to_string(i));
      }
      p[i] -= learning_rate * grad[i];
    }
  };
  apply(params.w1.data, grads.w1.data, "W1");
  apply(params.b1, grads.b1, "b1");
  apply(params.w2.data, grads.w2.data, "W2");
  apply(params.b2, grads.b2, "b2");
}

TrainResult train(const HeteroGraph& g, const ModelConfig& model_cfg,
                  const TrainConfig& train_cfg, const SamplerConfig& sampler_cfg) {
  if (g.edge_count() == 0) throw std::runtime_error("train: graph has no edges");
  if (train_cfg.learning_rate <= 0 || train_cfg.epochs < 1 || train_cfg.batch_size < 1 ||
      train_cfg.negatives_q < 1 || train_cfg.pairs_per_node < 1) {
    throw std::invalid_argument("train: all TrainConfig fields must be positive");
  }

  const Mat x = feature_matrix(g, model_cfg.input_dim);
  TrainResult result;
  result.params = init_params(model_cfg, train_cfg.seed);

  const Rng root(train_cfg.seed);
  const std::uint64_t pairs_per_epoch =
      g.edge_count() * static_cast<std::uint64_t>(train_cfg.pairs_per_node);
  const auto batch_size = static_cast<std::uint64_t>(train_cfg.batch_size);
  const std::uint64_t batches = (pairs_per_epoch + batch_size - 1) / batch_size;

  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    LossBreakdown epoch_sum;
    epoch_sum.q = train_cfg.negatives_q;
    for (std::uint64_t b = 0; b < batches; ++b) {
      const std::uint64_t remaining = pairs_per_epoch - b * batch_size;
      const std::size_t this_batch = static_cast<std::size_t>(std::min(batch_size, remaining));
      Rng stream = root.derive("batch", static_cast<std::uint64_t>(epoch), b);
      auto pairs = sample_positive_edges(g, this_batch, stream, sampler_cfg.weighted);
      BatchPlan plan = plan_batch(g, pairs, train_cfg.negatives_q, sampler_cfg, stream);
      auto [grads, loss] = batch_gradients(model_cfg, result.params, plan, x);
      sgd_step(result.params, grads, train_cfg.learning_rate);

      result.log.push_back({epoch, static_cast<int>(b), loss});
      epoch_sum.positive_term += loss.positive_term;
      epoch_sum.negative_term_mean += loss.negative_term_mean;
    }
    LossBreakdown mean;
    mean.q = train_cfg.negatives_q;
    mean.positive_term = epoch_sum.positive_term / static_cast<double>(batches);
    mean.negative_term_mean = epoch_sum.negative_term_mean / static_cast<double>(batches);
    mean.total = mean.positive_term + mean.q * mean.negative_term_mean;
    result.epoch_means.push_back(mean);
  }
  return result;
}

void write_training_log_csv(std::ostream& out, std::span<const BatchLogRow> log) {
  out << "epoch,batch,total_loss,positive_term,negative_term_mean\n";
  char buf[96];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.9g,%.9g,%.9g", row.epoch, row.batch,
                  row.loss.total, row.loss.positive_term, row.loss.negative_term_mean);
    out << buf << '\n';
  }
}

}  // namespace txsage
