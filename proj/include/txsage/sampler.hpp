#pragma once

// Seeded sampling primitives for training and evaluation: fanout-limited
// neighborhoods, positive edges, negative (non-neighbor) nodes and non-edges.
// All samplers are stateless given an explicit RNG stream; identical seed and
// call sequence reproduce identical outputs.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "txsage/graph.hpp"
#include "txsage/rng.hpp"

namespace txsage {

struct SamplerConfig {
  std::vector<int> fanout_per_layer{10, 10};  // [hop-1, hop-2]
  bool weighted = false;  // edge-weight-proportional draws for neighbors and positives
  std::uint64_t seed = 0;
};

/// Up to `fanout` neighbors of v without replacement, sorted by index.
/// Returns all neighbors when degree(v) <= fanout. Weighted draws are
/// proportional to the aggregated edge weight.
std::vector<std::uint32_t> sample_neighbors(const HeteroGraph& g, std::uint32_t v,
                                            int fanout, bool weighted, Rng& rng);

/// `batch_size` undirected edges drawn with replacement, uniformly or
/// weight-proportionally; each returned pair is an actual edge with a random
/// orientation. Throws on an edgeless graph.
std::vector<std::pair<std::uint32_t, std::uint32_t>> sample_positive_edges(
    const HeteroGraph& g, std::size_t batch_size, Rng& rng, bool weighted = false);

/// Q nodes uniform over V \ (N(u) ∪ {u}), with replacement. Rejection
/// resampling guarantees no neighbor is ever emitted. Throws when u has no
/// non-neighbor.
std::vector<std::uint32_t> sample_negatives(const HeteroGraph& g, std::uint32_t u,
                                            int count, Rng& rng);

/// `count` distinct unordered non-edges (u < v, no self-pairs), uniform
/// without repetition. Throws when count exceeds the number of non-edges.
std::vector<std::pair<std::uint32_t, std::uint32_t>> sample_nonedges(const HeteroGraph& g,
                                                                     std::size_t count,
                                                                     Rng& rng);

/// Same, restricted to pairs whose endpoints both lie in `candidates`
/// (sorted, distinct node indices).
std::vector<std::pair<std::uint32_t, std::uint32_t>> sample_nonedges(
    const HeteroGraph& g, std::size_t count, Rng& rng,
    std::span<const std::uint32_t> candidates);

}  // namespace txsage
