#include "txsage/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace txsage {

CounterpartyHistory build_counterparty_history(std::span<const TransactionRecord> records) {
  std::map<std::string, std::set<std::string>> sets;
  for (const auto& rec : records) {
    sets[rec.sender_id].insert(rec.receiver_id);
    sets[rec.receiver_id].insert(rec.sender_id);
  }
  CounterpartyHistory history;
  for (auto& [id, s] : sets) history.emplace(id, std::vector<std::string>(s.begin(), s.end()));
  return history;
}

std::vector<FeatureRow> build_features(const HeteroGraph& g,
                                       std::span<const TransactionRecord> records,
                                       const CounterpartyHistory& prior,
                                       const GroundTruth& truth,
                                       const EmbeddingTable* embeddings) {
  struct Tally {
    double in_degree = 0, out_degree = 0, in_amount = 0, out_amount = 0;
    double merchant_tx = 0;
    std::set<std::string> counterparties;
  };
  std::unordered_map<std::string, Tally> tallies;
  for (const auto& rec : records) {
    auto& s = tallies[rec.sender_id];
    s.out_degree += 1;
    s.out_amount += rec.amount;
    s.counterparties.insert(rec.receiver_id);
    if (rec.receiver_type == NodeType::Merchant) s.merchant_tx += 1;
    auto& r = tallies[rec.receiver_id];
    r.in_degree += 1;
    r.in_amount += rec.amount;
    r.counterparties.insert(rec.sender_id);
    if (rec.sender_type == NodeType::Merchant) r.merchant_tx += 1;
  }

  std::vector<FeatureRow> rows;
  for (std::uint32_t v = 0; v < g.node_count(); ++v) {
    if (g.node_type(v) != NodeType::Core) continue;
    const std::string& id = g.node_id(v);
    FeatureRow row;
    row.node_id = id;
    row.week = g.week();
    row.features.assign(kTabularFeatureCount, 0.0);
    auto it = tallies.find(id);
    if (it != tallies.end()) {
      const Tally& t = it->second;
      row.features[kInDegree] = t.in_degree;
      row.features[kOutDegree] = t.out_degree;
      row.features[kInAmount] = t.in_amount;
      row.features[kOutAmount] = t.out_amount;
      row.features[kDistinctCounterparties] = static_cast<double>(t.counterparties.size());
      row.features[kMerchantTxCount] = t.merchant_tx;
      double fresh = 0.0;
      auto hist = prior.find(id);
      for (const auto& cp : t.counterparties) {
        const bool seen = hist != prior.end() &&
                          std::binary_search(hist->second.begin(), hist->second.end(), cp);
        if (!seen) fresh += 1.0;
      }
      row.features[kNewCounterpartyCount] = fresh;
    }
    if (embeddings != nullptr) {
      if (!embeddings->has(v)) {
        throw std::invalid_argument("build_features: no embedding for node '" + id + "'");
      }
      const Vec& e = embeddings->at(v);
      row.features.insert(row.features.end(), e.begin(), e.end());
    }
    auto truth_it = truth.rows.find(id);
    row.is_mule = truth_it != truth.rows.end() && truth_it->second.is_mule;
    rows.push_back(std::move(row));
  }
  return rows;
}

LogRegModel fit_logreg(std::span<const FeatureRow> rows, const LogRegConfig& cfg) {
  if (rows.empty()) throw std::invalid_argument("fit_logreg: no rows");
  const std::size_t d = rows[0].features.size();
  for (const auto& r : rows) {
    if (r.features.size() != d) {
      throw std::invalid_argument("fit_logreg: inconsistent feature width");
    }
  }
  std::size_t positives = 0;
  for (const auto& r : rows) positives += r.is_mule ? 1 : 0;
  if (positives == 0 || positives == rows.size()) {
    throw std::invalid_argument("fit_logreg: need both classes in the training rows");
  }

  LogRegModel model;
  model.feature_mean.assign(d, 0.0);
  model.feature_std.assign(d, 0.0);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < d; ++k) model.feature_mean[k] += r.features[k];
  }
  for (auto& m : model.feature_mean) m /= static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < d; ++k) {
      const double c = r.features[k] - model.feature_mean[k];
      model.feature_std[k] += c * c;
    }
  }
  for (auto& s : model.feature_std) {
    s = std::sqrt(s / static_cast<double>(rows.size()));
    if (s < 1e-12) s = 1.0;  // constant column
  }

  // standardized design matrix
  const std::size_t n = rows.size();
  std::vector<double> x(n * d);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      x[i * d + k] = (rows[i].features[k] - model.feature_mean[k]) / model.feature_std[k];
    }
    y[i] = rows[i].is_mule ? 1.0 : 0.0;
  }

  Rng stream = Rng(cfg.seed).derive("logreg-init");
  model.weights.assign(d, 0.0);
  for (auto& w : model.weights) w = (stream.next_double() - 0.5) * 0.01;
  model.bias = 0.0;

  Vec grad(d);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = model.bias;
      const double* xi = &x[i * d];
      for (std::size_t k = 0; k < d; ++k) z += model.weights[k] * xi[k];
      const double err = sigmoid(z) - y[i];
      for (std::size_t k = 0; k < d; ++k) grad[k] += err * xi[k];
      grad_bias += err;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < d; ++k) {
      grad[k] = grad[k] * inv_n + cfg.l2 * model.weights[k];
      model.weights[k] -= cfg.learning_rate * grad[k];
    }
    model.bias -= cfg.learning_rate * grad_bias * inv_n;
  }
  return model;
}

Vec score_rows(const LogRegModel& model, std::span<const FeatureRow> rows) {
  const std::size_t d = model.weights.size();
  Vec scores;
  scores.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.features.size() != d) {
      throw std::invalid_argument("score_rows: feature width mismatch");
    }
    double z = model.bias;
    for (std::size_t k = 0; k < d; ++k) {
      z += model.weights[k] * (r.features[k] - model.feature_mean[k]) / model.feature_std[k];
    }
    scores.push_back(sigmoid(z));
  }
  return scores;
}

namespace {

/// Row order: score descending, node id ascending on ties.
std::vector<std::size_t> ranked_order(std::span<const double> scores,
                                      std::span<const std::string> ids) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  return order;
}

}  // namespace

double precision_at_k(std::span<const double> scores, std::span<const Label> labels,
                      std::span<const std::string> ids, std::size_t k) {
  if (scores.size() != labels.size() || scores.size() != ids.size()) {
    throw std::invalid_argument("precision_at_k: size mismatch");
  }
  if (k == 0) throw std::invalid_argument("precision_at_k: k must be >= 1");
  if (k > scores.size()) {
    throw std::invalid_argument("precision_at_k: k exceeds the number of rows");
  }
  auto order = ranked_order(scores, ids);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < k; ++r) hits += labels[order[r]] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double pr_auc(std::span<const double> scores, std::span<const Label> labels,
              std::span<const std::string> ids) {
  if (scores.size() != labels.size() || scores.size() != ids.size()) {
    throw std::invalid_argument("pr_auc: size mismatch");
  }
  std::size_t positives = 0;
  for (Label l : labels) positives += l ? 1 : 0;
  if (positives == 0) throw std::invalid_argument("pr_auc: no positive labels");

  auto order = ranked_order(scores, ids);
  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (labels[order[r]]) {
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return ap / static_cast<double>(positives);
}

namespace {

RankedMetrics evaluate_model(const LogRegModel& model, std::span<const FeatureRow> rows,
                             std::span<const std::size_t> ks) {
  Vec scores = score_rows(model, rows);
  std::vector<Label> labels;
  std::vector<std::string> ids;
  labels.reserve(rows.size());
  ids.reserve(rows.size());
  for (const auto& r : rows) {
    labels.push_back(r.is_mule ? 1 : 0);
    ids.push_back(r.node_id);
  }
  RankedMetrics metrics;
  metrics.pr_auc = pr_auc(scores, labels, ids);
  for (std::size_t k : ks) {
    metrics.precision_at[k] = precision_at_k(scores, labels, ids, k);
  }
  return metrics;
}

std::vector<FeatureRow> filter_week(std::span<const FeatureRow> rows,
                                    const std::string& week) {
  std::vector<FeatureRow> out;
  for (const auto& r : rows) {
    if (r.week == week) out.push_back(r);
  }
  return out;
}

double relative_delta(double augmented, double baseline) {
  return (augmented - baseline) / baseline;
}

}  // namespace

CompareResult compare(std::span<const FeatureRow> baseline_rows,
                      std::span<const FeatureRow> augmented_rows, const CompareConfig& cfg) {
  if (baseline_rows.size() != augmented_rows.size()) {
    throw std::invalid_argument("compare: row sets differ in size");
  }
  for (std::size_t i = 0; i < baseline_rows.size(); ++i) {
    if (baseline_rows[i].node_id != augmented_rows[i].node_id ||
        baseline_rows[i].week != augmented_rows[i].week ||
        baseline_rows[i].is_mule != augmented_rows[i].is_mule) {
      throw std::invalid_argument("compare: row sets disagree at index " + std::to_string(i));
    }
  }

  auto base_train = filter_week(baseline_rows, cfg.train_week);
  auto base_test = filter_week(baseline_rows, cfg.test_week);
  auto aug_train = filter_week(augmented_rows, cfg.train_week);
  auto aug_test = filter_week(augmented_rows, cfg.test_week);
  if (base_train.empty() || base_test.empty()) {
    throw std::invalid_argument("compare: empty train or test week '" + cfg.train_week +
                                "'/'" + cfg.test_week + "'");
  }

  LogRegModel base_model = fit_logreg(base_train, cfg.logreg);
  LogRegModel aug_model = fit_logreg(aug_train, cfg.logreg);

  CompareResult result;
  result.baseline = evaluate_model(base_model, base_test, cfg.ks);
  result.augmented = evaluate_model(aug_model, aug_test, cfg.ks);
  result.relative_improvement["pr_auc"] =
      relative_delta(result.augmented.pr_auc, result.baseline.pr_auc);
  for (std::size_t k : cfg.ks) {
    result.relative_improvement["precision_at_" + std::to_string(k)] =
        relative_delta(result.augmented.precision_at.at(k), result.baseline.precision_at.at(k));
  }
  return result;
}

void write_compare_csv(std::ostream& out, const CompareResult& result) {
  out << "metric,baseline,augmented,relative_improvement\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "pr_auc,%.9g,%.9g,%.9g", result.baseline.pr_auc,
                result.augmented.pr_auc, result.relative_improvement.at("pr_auc"));
  out << buf << '\n';
  for (const auto& [k, base] : result.baseline.precision_at) {
    const std::string key = "precision_at_" + std::to_string(k);
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g", key.c_str(), base,
                  result.augmented.precision_at.at(k), result.relative_improvement.at(key));
    out << buf << '\n';
  }
}

}  // namespace txsage
