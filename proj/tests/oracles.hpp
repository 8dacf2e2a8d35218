#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they check (plain loops, no shared aggregation/backprop machinery).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "txsage/graph.hpp"
#include "txsage/model.hpp"
#include "txsage/rng.hpp"

namespace oracles {

/// Random all-core transaction set over n nodes; every pair independently an
/// edge with probability p (both directions possible).
inline std::vector<txsage::TransactionRecord> random_core_records(std::uint32_t n, double p,
                                                                  txsage::Rng& rng) {
  std::vector<txsage::TransactionRecord> records;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (rng.next_double() < p) {
        char a[16], b[16];
        std::snprintf(a, sizeof(a), "n%03u", i);
        std::snprintf(b, sizeof(b), "n%03u", j);
        const double amount = std::round((1.0 + rng.next_double() * 9.0) * 100.0) / 100.0;
        records.push_back({a, txsage::NodeType::Core, b, txsage::NodeType::Core, amount,
                           static_cast<std::int64_t>(rng.below(1000000))});
      }
    }
  }
  return records;
}

/// Straight-line dense reference for the two-layer mean-aggregator network:
/// full neighborhoods, no sampling, no shared code with the library forward.
inline std::vector<txsage::Vec> naive_forward_all(const txsage::HeteroGraph& g,
                                                  const txsage::ModelConfig& cfg,
                                                  const txsage::ModelParams& params) {
  const std::uint32_t n = g.node_count();
  std::vector<txsage::Vec> feats(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    feats[v] = txsage::node_features(g.node_id(v), g.node_type(v), cfg.input_dim);
  }

  auto mean_over = [&](const std::vector<txsage::Vec>& table, std::uint32_t v) {
    txsage::Vec m = table[v];
    auto nbrs = g.neighbor_ids(v);
    for (std::uint32_t w : nbrs) {
      for (std::size_t k = 0; k < m.size(); ++k) m[k] += table[w][k];
    }
    for (auto& x : m) x /= static_cast<double>(nbrs.size() + 1);
    return m;
  };

  std::vector<txsage::Vec> hidden(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    txsage::Vec m = mean_over(feats, v);
    txsage::Vec h(static_cast<std::size_t>(cfg.hidden_dim), 0.0);
    for (int r = 0; r < cfg.hidden_dim; ++r) {
      double s = params.b1[static_cast<std::size_t>(r)];
      for (int c = 0; c < cfg.input_dim; ++c) {
        s += params.w1(r, c) * m[static_cast<std::size_t>(c)];
      }
      h[static_cast<std::size_t>(r)] = std::max(0.0, s);
    }
    hidden[v] = std::move(h);
  }

  std::vector<txsage::Vec> out(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    txsage::Vec a = mean_over(hidden, v);
    txsage::Vec z(static_cast<std::size_t>(cfg.output_dim), 0.0);
    for (int r = 0; r < cfg.output_dim; ++r) {
      double s = params.b2[static_cast<std::size_t>(r)];
      for (int c = 0; c < cfg.hidden_dim; ++c) {
        s += params.w2(r, c) * a[static_cast<std::size_t>(c)];
      }
      z[static_cast<std::size_t>(r)] = 1.0 / (1.0 + std::exp(-s));
    }
    out[v] = std::move(z);
  }
  return out;
}

/// Brute-force average precision straight from the definition, O(n^2).
inline double naive_average_precision(const std::vector<double>& scores,
                                      const std::vector<int>& labels,
                                      const std::vector<std::string>& ids) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  double positives = 0.0;
  for (int l : labels) positives += l;
  double ap = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (!labels[order[r]]) continue;
    double hits = 0.0;
    for (std::size_t q = 0; q <= r; ++q) hits += labels[order[q]];
    ap += hits / static_cast<double>(r + 1);
  }
  return ap / positives;
}

/// Pearson chi-square statistic against uniform expectation.
inline double chi_square_uniform(const std::vector<std::uint64_t>& counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expect = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expect;
    stat += d * d / expect;
  }
  return stat;
}

}  // namespace oracles
