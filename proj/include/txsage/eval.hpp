#pragma once

// Validation battery: epsilon-guarded cosine similarity, per-week
// neighbor/non-neighbor similarity reports, OLS trend with a 95% CI on the
// mean line, silhouette-based cluster separability, and a top-2 PCA
// projection for qualitative checks.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "txsage/graph.hpp"
#include "txsage/linalg.hpp"
#include "txsage/model.hpp"
#include "txsage/rng.hpp"

namespace txsage {

/// (u·v) / (‖u‖‖v‖ + ε). The ε term guards the zero-vector case.
double cosine(const Vec& u, const Vec& v, double epsilon = 1e-8);

struct SimilarityReport {
  std::string week;
  double mean_pos = 0.0;
  double mean_neg = 0.0;
  double gap = 0.0;  // mean_pos - mean_neg
  std::uint64_t n_pos = 0;
  std::uint64_t n_neg = 0;
};

struct SimilarityOptions {
  bool core_only = true;  // restrict both pair sets to Core nodes
  std::uint64_t n_neg = 0;  // 0 = match the number of positive pairs
  std::uint64_t max_pos = 1'000'000;  // cap: above this, a uniform edge sample
};

/// Mean cosine over (eligible) edges vs. sampled non-edges. Embeddings must
/// cover every eligible node.
SimilarityReport similarity_report(const HeteroGraph& g, const EmbeddingTable& embeddings,
                                   const SimilarityOptions& options, Rng& rng);

struct TrendFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci95_halfwidth = 0.0;  // half-width of the 95% CI for the fitted mean at x̄
};

/// Ordinary least squares of y against x = 0,1,...,n-1.
TrendFit fit_trend(std::span<const double> y);

struct WeeklySeries {
  std::vector<SimilarityReport> reports;
  TrendFit pos_trend;
  TrendFit neg_trend;
};

/// Full-neighborhood inference on every week followed by a similarity report
/// per week and trend fits over the two mean series. Requires >= 2 weeks.
WeeklySeries weekly_series(std::span<const HeteroGraph> weeks, const ModelConfig& cfg,
                           const ModelParams& params, const SimilarityOptions& options,
                           std::uint64_t seed);

/// Mean silhouette coefficient with distance 1 - cosine. Requires >= 2
/// categories, each with >= 2 members.
double separability(std::span<const Vec> embeddings, std::span<const int> labels);

struct Projection {
  std::vector<double> x;
  std::vector<double> y;
  double lambda1 = 0.0;  // top-2 covariance eigenvalues
  double lambda2 = 0.0;
  std::vector<double> eigenvalues;  // all, descending
};

/// Top-2 principal components of the (population-normalized) covariance.
/// Sign convention: the largest-magnitude loading of each component is
/// positive. Rank-deficient input yields zero trailing coordinates.
Projection project_2d(std::span<const Vec> embeddings);

/// Symmetric eigendecomposition (cyclic Jacobi). Returns eigenvalues in
/// descending order; vectors[k] is the eigenvector for eigenvalues[k].
struct EigenSym {
  std::vector<double> values;
  std::vector<Vec> vectors;
};
EigenSym jacobi_eigen_sym(Mat a);

/// Two-sided Student-t quantile (e.g. p = 0.975 for a 95% interval).
double student_t_quantile(double p, int df);

/// `week,mean_pos,mean_neg,gap,n_pos,n_neg`
void write_similarity_csv(std::ostream& out, std::span<const SimilarityReport> reports);
/// `series,slope,intercept,ci95_halfwidth`
void write_trend_csv(std::ostream& out, const TrendFit& pos, const TrendFit& neg);
/// `node_id,node_type,x,y,label`
void write_projection_csv(std::ostream& out, std::span<const std::string> ids,
                          std::span<const NodeType> types, const Projection& proj,
                          std::span<const std::string> labels);

}  // namespace txsage
