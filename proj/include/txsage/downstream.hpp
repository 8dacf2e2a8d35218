#pragma once

// Money-mule classification benchmark: tabular account features vs. the same
// features augmented with embeddings, scored with an in-repo logistic
// regression by PR-AUC (average precision) and precision@k.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "txsage/graph.hpp"
#include "txsage/model.hpp"
#include "txsage/synthgen.hpp"

namespace txsage {

/// Order of the tabular columns in FeatureRow::features.
enum TabularFeature {
  kInDegree = 0,
  kOutDegree,
  kInAmount,
  kOutAmount,
  kDistinctCounterparties,
  kMerchantTxCount,
  kNewCounterpartyCount,
  kTabularFeatureCount
};

struct FeatureRow {
  std::string node_id;
  std::string week;
  std::vector<double> features;  // tabular block, then optional embedding block
  bool is_mule = false;
};

/// Per-account counterparty sets accumulated from earlier weeks; feeds the
/// new-counterparty feature.
using CounterpartyHistory = std::map<std::string, std::vector<std::string>>;

CounterpartyHistory build_counterparty_history(std::span<const TransactionRecord> records);

/// One row per core account of g, deterministic order (node index order).
/// When `embeddings` is non-null its components are appended; a core account
/// missing from the table is an error naming the node.
std::vector<FeatureRow> build_features(const HeteroGraph& g,
                                       std::span<const TransactionRecord> records,
                                       const CounterpartyHistory& prior,
                                       const GroundTruth& truth,
                                       const EmbeddingTable* embeddings);

struct LogRegConfig {
  double learning_rate = 0.5;
  int epochs = 400;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

struct LogRegModel {
  Vec weights;
  double bias = 0.0;
  Vec feature_mean;  // z-score standardization fitted on the training rows
  Vec feature_std;
};

/// Full-batch gradient descent on L2-regularized logistic loss. Requires at
/// least one row of each class.
LogRegModel fit_logreg(std::span<const FeatureRow> rows, const LogRegConfig& cfg);

/// P(mule) scores aligned with `rows`.
Vec score_rows(const LogRegModel& model, std::span<const FeatureRow> rows);

/// 0/1 class labels (std::vector<bool> has no contiguous storage).
using Label = std::uint8_t;

/// Fraction of true positives among the k best-scored rows; ties broken by
/// ascending node id.
double precision_at_k(std::span<const double> scores, std::span<const Label> labels,
                      std::span<const std::string> ids, std::size_t k);

/// Average precision: mean over positives of precision at that positive's
/// rank (same deterministic tie-break).
double pr_auc(std::span<const double> scores, std::span<const Label> labels,
              std::span<const std::string> ids);

struct RankedMetrics {
  double pr_auc = 0.0;
  std::map<std::size_t, double> precision_at;
};

struct CompareConfig {
  std::vector<std::size_t> ks{20, 50, 200};
  std::string train_week;
  std::string test_week;
  LogRegConfig logreg;
};

struct CompareResult {
  RankedMetrics baseline;
  RankedMetrics augmented;
  /// Keyed "pr_auc", "precision_at_20", ... value = (aug - base) / base.
  std::map<std::string, double> relative_improvement;
};

/// Trains both models on the train-week rows with identical hyperparameters
/// and seeds, evaluates on the test-week rows. Both row sets must cover the
/// same (node, week) pairs with the same labels.
CompareResult compare(std::span<const FeatureRow> baseline_rows,
                      std::span<const FeatureRow> augmented_rows, const CompareConfig& cfg);

/// `metric,baseline,augmented,relative_improvement`
void write_compare_csv(std::ostream& out, const CompareResult& result);

}  // namespace txsage
