#include "txsage/sampler.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace txsage {

std::vector<std::uint32_t> sample_neighbors(const HeteroGraph& g, std::uint32_t v,
                                            int fanout, bool weighted, Rng& rng) {
  if (fanout < 1) throw std::invalid_argument("sample_neighbors: fanout must be >= 1");
  auto ids = g.neighbor_ids(v);
  const std::size_t deg = ids.size();
  if (deg <= static_cast<std::size_t>(fanout)) {
    return {ids.begin(), ids.end()};
  }

  std::vector<std::uint32_t> picked;
  picked.reserve(static_cast<std::size_t>(fanout));
  if (!weighted) {
    // partial Fisher-Yates over a scratch copy of the positions
    std::vector<std::uint32_t> pos(deg);
    for (std::size_t i = 0; i < deg; ++i) pos[i] = static_cast<std::uint32_t>(i);
    for (int k = 0; k < fanout; ++k) {
      std::size_t j = k + rng.index(deg - static_cast<std::size_t>(k));
      std::swap(pos[k], pos[j]);
      picked.push_back(ids[pos[k]]);
    }
  } else {
    // weight-proportional without replacement: draw, then remove the mass
    auto ws = g.neighbor_weights(v);
    std::vector<double> w(ws.begin(), ws.end());
    double total = 0.0;
    for (double x : w) total += x;
    for (int k = 0; k < fanout; ++k) {
      if (total <= 0.0) {
        // remaining weights are all zero; fall back to uniform over the rest
        std::vector<std::uint32_t> rest;
        for (std::size_t i = 0; i < deg; ++i) {
          if (w[i] >= 0.0) rest.push_back(static_cast<std::uint32_t>(i));
        }
        while (picked.size() < static_cast<std::size_t>(fanout)) {
          std::size_t j = rng.index(rest.size());
          picked.push_back(ids[rest[j]]);
          rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(j));
        }
        break;
      }
      double target = rng.next_double() * total;
      double acc = 0.0;
      std::size_t chosen = deg - 1;
      for (std::size_t i = 0; i < deg; ++i) {
        if (w[i] < 0.0) continue;
        acc += w[i];
        if (target < acc) {
          chosen = i;
          break;
        }
      }
      picked.push_back(ids[chosen]);
      total -= w[chosen];
      w[chosen] = -1.0;  // removed
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> sample_positive_edges(
    const HeteroGraph& g, std::size_t batch_size, Rng& rng, bool weighted) {
  const std::uint64_t m = g.edge_count();
  if (m == 0) throw std::runtime_error("sample_positive_edges: graph has no edges");
  auto src = g.und_edge_src();
  auto dst = g.und_edge_dst();
  auto cumw = g.und_edge_cum_weight();
  const double total_w = cumw.empty() ? 0.0 : cumw.back();

  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(batch_size);
  for (std::size_t k = 0; k < batch_size; ++k) {
    std::size_t e;
    if (weighted && total_w > 0.0) {
      double target = rng.next_double() * total_w;
      e = static_cast<std::size_t>(
          std::upper_bound(cumw.begin(), cumw.end(), target) - cumw.begin());
      if (e >= m) e = m - 1;
    } else {
      e = static_cast<std::size_t>(rng.below(m));
    }
    std::uint32_t a = src[e], b = dst[e];
    if (rng.coin()) std::swap(a, b);
    out.emplace_back(a, b);
  }
  return out;
}

std::vector<std::uint32_t> sample_negatives(const HeteroGraph& g, std::uint32_t u,
                                            int count, Rng& rng) {
  const std::uint32_t n = g.node_count();
  auto nbrs = g.neighbor_ids(u);
  const std::uint64_t excluded = nbrs.size() + 1;
  if (excluded >= n) {
    throw std::runtime_error("sample_negatives: node " + std::to_string(u) +
                             " has no non-neighbor");
  }

  std::vector<std::uint32_t> out;
  out.reserve(static_cast<std::size_t>(count));
  if (excluded * 2 <= n) {
    // sparse neighborhood: rejection is cheap
    for (int k = 0; k < count; ++k) {
      for (;;) {
        auto c = static_cast<std::uint32_t>(rng.below(n));
        if (c == u) continue;
        if (std::binary_search(nbrs.begin(), nbrs.end(), c)) continue;
        out.push_back(c);
        break;
      }
    }
  } else {
    // dense neighborhood: enumerate the complement once, then index into it
    std::vector<std::uint32_t> candidates;
    candidates.reserve(n - excluded);
    std::size_t p = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
      while (p < nbrs.size() && nbrs[p] < v) ++p;
      if (v == u || (p < nbrs.size() && nbrs[p] == v)) continue;
      candidates.push_back(v);
    }
    for (int k = 0; k < count; ++k) {
      out.push_back(candidates[rng.index(candidates.size())]);
    }
  }
  return out;
}

namespace {

std::uint64_t count_edges_within(const HeteroGraph& g,
                                 std::span<const std::uint32_t> candidates) {
  std::uint64_t inside = 0;
  auto src = g.und_edge_src();
  auto dst = g.und_edge_dst();
  for (std::size_t e = 0; e < src.size(); ++e) {
    if (std::binary_search(candidates.begin(), candidates.end(), src[e]) &&
        std::binary_search(candidates.begin(), candidates.end(), dst[e])) {
      ++inside;
    }
  }
  return inside;
}

}  // namespace

std::vector<std::pair<std::uint32_t, std::uint32_t>> sample_nonedges(
    const HeteroGraph& g, std::size_t count, Rng& rng,
    std::span<const std::uint32_t> candidates) {
  const std::uint64_t m = candidates.size();
  const std::uint64_t total_pairs = m * (m - 1) / 2;
  const std::uint64_t nonedges = total_pairs - count_edges_within(g, candidates);
  if (count > nonedges) {
    throw std::runtime_error("sample_nonedges: requested " + std::to_string(count) +
                             " but only " + std::to_string(nonedges) + " non-edges exist");
  }
  if (count == 0) return {};

  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(count);
  if (count * 2 <= nonedges && total_pairs > 0) {
    // rejection with a seen-set keeps draws uniform without repetition
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(count * 2);
    while (out.size() < count) {
      std::uint32_t a = candidates[rng.index(candidates.size())];
      std::uint32_t b = candidates[rng.index(candidates.size())];
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (g.has_edge(a, b)) continue;
      std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
      if (!seen.insert(key).second) continue;
      out.emplace_back(a, b);
    }
  } else {
    // dense request: enumerate all non-edges, then partial-shuffle
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pool;
    pool.reserve(nonedges);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      for (std::size_t j = i + 1; j < candidates.size(); ++j) {
        if (!g.has_edge(candidates[i], candidates[j])) {
          pool.emplace_back(candidates[i], candidates[j]);
        }
      }
    }
    for (std::size_t k = 0; k < count; ++k) {
      std::size_t j = k + rng.index(pool.size() - k);
      std::swap(pool[k], pool[j]);
      out.push_back(pool[k]);
    }
  }
  return out;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> sample_nonedges(const HeteroGraph& g,
                                                                     std::size_t count,
                                                                     Rng& rng) {
  std::vector<std::uint32_t> all(g.node_count());
  for (std::uint32_t v = 0; v < g.node_count(); ++v) all[v] = v;
  return sample_nonedges(g, count, rng, all);
}

}  // namespace txsage
