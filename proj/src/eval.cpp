#include "txsage/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "txsage/sampler.hpp"

namespace txsage {

double cosine(const Vec& u, const Vec& v, double epsilon) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  return uv / (std::sqrt(uu) * std::sqrt(vv) + epsilon);
}

SimilarityReport similarity_report(const HeteroGraph& g, const EmbeddingTable& embeddings,
                                   const SimilarityOptions& options, Rng& rng) {
  std::vector<std::uint32_t> eligible;
  eligible.reserve(g.node_count());
  for (std::uint32_t v = 0; v < g.node_count(); ++v) {
    if (!options.core_only || g.node_type(v) == NodeType::Core) eligible.push_back(v);
  }
  for (std::uint32_t v : eligible) {
    if (!embeddings.has(v)) {
      throw std::invalid_argument("similarity_report: no embedding for node '" +
                                  g.node_id(v) + "'");
    }
  }

  // positive pairs: edges with both endpoints eligible
  std::vector<std::uint64_t> pos_edges;
  auto src = g.und_edge_src();
  auto dst = g.und_edge_dst();
  auto is_eligible = [&](std::uint32_t v) {
    return !options.core_only || g.node_type(v) == NodeType::Core;
  };
  for (std::uint64_t e = 0; e < src.size(); ++e) {
    if (is_eligible(src[e]) && is_eligible(dst[e])) pos_edges.push_back(e);
  }
  if (pos_edges.empty()) {
    throw std::runtime_error("similarity_report: no eligible edges");
  }
  if (pos_edges.size() > options.max_pos) {
    // uniform cap without replacement; the report records the reduced count
    for (std::size_t k = 0; k < options.max_pos; ++k) {
      std::size_t j = k + rng.index(pos_edges.size() - k);
      std::swap(pos_edges[k], pos_edges[j]);
    }
    pos_edges.resize(options.max_pos);
  }

  double pos_sum = 0.0;
  for (std::uint64_t e : pos_edges) {
    pos_sum += cosine(embeddings.at(src[e]), embeddings.at(dst[e]));
  }
  const double mean_pos = pos_sum / static_cast<double>(pos_edges.size());

  const std::uint64_t n_neg = options.n_neg > 0 ? options.n_neg : pos_edges.size();
  auto nonedges = sample_nonedges(g, n_neg, rng, eligible);
  double neg_sum = 0.0;
  for (const auto& [a, b] : nonedges) {
    neg_sum += cosine(embeddings.at(a), embeddings.at(b));
  }
  const double mean_neg = neg_sum / static_cast<double>(nonedges.size());

  SimilarityReport report;
  report.week = g.week();
  report.mean_pos = mean_pos;
  report.mean_neg = mean_neg;
  report.gap = mean_pos - mean_neg;
  report.n_pos = pos_edges.size();
  report.n_neg = nonedges.size();
  return report;
}

TrendFit fit_trend(std::span<const double> y) {
  const auto n = static_cast<int>(y.size());
  if (n < 2) throw std::invalid_argument("fit_trend: need at least 2 points");
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    sx += i;
    sy += y[i];
  }
  const double xbar = sx / n, ybar = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (i - xbar) * (i - xbar);
    sxy += (i - xbar) * (y[i] - ybar);
  }
  TrendFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  if (n > 2) {
    double ssr = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = y[i] - (fit.intercept + fit.slope * i);
      ssr += r * r;
    }
    const double s2 = ssr / (n - 2);
    if (s2 > 0.0) {
      const double t = student_t_quantile(0.975, n - 2);
      fit.ci95_halfwidth = t * std::sqrt(s2 / n);
    }
  }
  return fit;
}

WeeklySeries weekly_series(std::span<const HeteroGraph> weeks, const ModelConfig& cfg,
                           const ModelParams& params, const SimilarityOptions& options,
                           std::uint64_t seed) {
  if (weeks.size() < 2) {
    throw std::invalid_argument("weekly_series: need at least 2 weeks");
  }
  WeeklySeries series;
  const Rng root(seed);
  for (std::size_t i = 0; i < weeks.size(); ++i) {
    EmbeddingTable table = forward_all(weeks[i], cfg, params);
    Rng stream = root.derive("weekly-report", i);
    series.reports.push_back(similarity_report(weeks[i], table, options, stream));
  }
  std::vector<double> pos, neg;
  for (const auto& r : series.reports) {
    pos.push_back(r.mean_pos);
    neg.push_back(r.mean_neg);
  }
  series.pos_trend = fit_trend(pos);
  series.neg_trend = fit_trend(neg);
  return series;
}

double separability(std::span<const Vec> embeddings, std::span<const int> labels) {
  const std::size_t n = embeddings.size();
  if (labels.size() != n) throw std::invalid_argument("separability: size mismatch");
  std::map<int, std::size_t> sizes;
  for (int c : labels) ++sizes[c];
  if (sizes.size() < 2) {
    throw std::invalid_argument("separability: need at least 2 categories");
  }
  for (auto& [c, count] : sizes) {
    if (count < 2) {
      throw std::invalid_argument("separability: category " + std::to_string(c) +
                                  " has fewer than 2 members");
    }
  }

  double total = 0.0;
  std::map<int, double> dist_sum;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [c, count] : sizes) dist_sum[c] = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      dist_sum[labels[j]] += 1.0 - cosine(embeddings[i], embeddings[j]);
    }
    const int own = labels[i];
    const double a = dist_sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [c, s] : dist_sum) {
      if (c == own) continue;
      b = std::min(b, s / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

EigenSym jacobi_eigen_sym(Mat a) {
  if (a.rows != a.cols) throw std::invalid_argument("jacobi_eigen_sym: matrix not square");
  const int n = a.rows;
  Mat v(n, n);
  for (int i = 0; i < n; ++i) v(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    if (a(x, x) != a(y, y)) return a(x, x) > a(y, y);
    return x < y;
  });
  EigenSym out;
  out.values.resize(n);
  out.vectors.resize(n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    Vec vec(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) vec[static_cast<std::size_t>(i)] = v(i, order[k]);
    out.vectors[k] = std::move(vec);
  }
  return out;
}

Projection project_2d(std::span<const Vec> embeddings) {
  const std::size_t n = embeddings.size();
  if (n < 3) throw std::invalid_argument("project_2d: need at least 3 points");
  const std::size_t d = embeddings[0].size();
  for (const auto& e : embeddings) {
    if (e.size() != d) throw std::invalid_argument("project_2d: dimension mismatch");
  }

  Vec mean(d, 0.0);
  for (const auto& e : embeddings) {
    for (std::size_t k = 0; k < d; ++k) mean[k] += e[k];
  }
  for (auto& m : mean) m /= static_cast<double>(n);

  Mat cov(static_cast<int>(d), static_cast<int>(d));
  for (const auto& e : embeddings) {
    for (std::size_t i = 0; i < d; ++i) {
      const double ci = e[i] - mean[i];
      double* row = cov.row(static_cast<int>(i));
      for (std::size_t j = 0; j < d; ++j) row[j] += ci * (e[j] - mean[j]);
    }
  }
  for (auto& x : cov.data) x /= static_cast<double>(n);

  EigenSym eig = jacobi_eigen_sym(cov);

  Projection proj;
  proj.eigenvalues = eig.values;
  proj.lambda1 = eig.values.size() > 0 ? eig.values[0] : 0.0;
  proj.lambda2 = eig.values.size() > 1 ? eig.values[1] : 0.0;
  proj.x.assign(n, 0.0);
  proj.y.assign(n, 0.0);

  const double scale = std::max(proj.lambda1, 0.0);
  auto component = [&](int k, std::vector<double>& out) {
    if (eig.values[static_cast<std::size_t>(k)] <= 1e-12 * std::max(scale, 1e-300)) {
      return;  // rank-deficient direction: leave zeros
    }
    Vec axis = eig.vectors[static_cast<std::size_t>(k)];
    // deterministic sign: the largest-magnitude loading is positive
    std::size_t arg = 0;
    for (std::size_t i = 1; i < axis.size(); ++i) {
      if (std::abs(axis[i]) > std::abs(axis[arg])) arg = i;
    }
    if (axis[arg] < 0.0) {
      for (auto& x : axis) x = -x;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += axis[j] * (embeddings[i][j] - mean[j]);
      out[i] = s;
    }
  };
  component(0, proj.x);
  if (d > 1) component(1, proj.y);
  return proj;
}

// ---- Student t quantile via the regularized incomplete beta function ----

namespace {

double log_gamma(double x) { return std::lgamma(x); }

// Continued-fraction evaluation (Lentz) of the regularized incomplete beta.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double dd = 1.0 - qab * x / qap;
  if (std::abs(dd) < kFpMin) dd = kFpMin;
  dd = 1.0 / dd;
  double h = dd;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    dd = 1.0 + aa * dd;
    if (std::abs(dd) < kFpMin) dd = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    dd = 1.0 / dd;
    h *= dd * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    dd = 1.0 + aa * dd;
    if (std::abs(dd) < kFpMin) dd = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    dd = 1.0 / dd;
    const double del = dd * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double incbeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, int df) {
  const double x = df / (df + t * t);
  const double p = 0.5 * incbeta(0.5 * df, 0.5, x);
  return t > 0.0 ? 1.0 - p : p;
}

}  // namespace

double student_t_quantile(double p, int df) {
  if (df < 1) throw std::invalid_argument("student_t_quantile: df must be >= 1");
  if (p <= 0.0 || p >= 1.0) {
    throw std::invalid_argument("student_t_quantile: p must lie in (0,1)");
  }
  if (p == 0.5) return 0.0;
  const bool upper = p > 0.5;
  const double target = upper ? p : 1.0 - p;
  double lo = 0.0, hi = 1.0;
  while (student_t_cdf(hi, df) < target) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, df) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
  }
  const double q = 0.5 * (lo + hi);
  return upper ? q : -q;
}

// ---- CSV writers ----

void write_similarity_csv(std::ostream& out, std::span<const SimilarityReport> reports) {
  out << "week,mean_pos,mean_neg,gap,n_pos,n_neg\n";
  char buf[128];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g", r.mean_pos, r.mean_neg, r.gap);
    out << r.week << ',' << buf << ',' << r.n_pos << ',' << r.n_neg << '\n';
  }
}

void write_trend_csv(std::ostream& out, const TrendFit& pos, const TrendFit& neg) {
  out << "series,slope,intercept,ci95_halfwidth\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "pos,%.9g,%.9g,%.9g", pos.slope, pos.intercept,
                pos.ci95_halfwidth);
  out << buf << '\n';
  std::snprintf(buf, sizeof(buf), "neg,%.9g,%.9g,%.9g", neg.slope, neg.intercept,
                neg.ci95_halfwidth);
  out << buf << '\n';
}

void write_projection_csv(std::ostream& out, std::span<const std::string> ids,
                          std::span<const NodeType> types, const Projection& proj,
                          std::span<const std::string> labels) {
  out << "node_id,node_type,x,y,label\n";
  char buf[64];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g", proj.x[i], proj.y[i]);
    out << ids[i] << ',' << to_string(types[i]) << ',' << buf << ','
        << (i < labels.size() ? labels[i] : std::string()) << '\n';
  }
}

}  // namespace txsage
