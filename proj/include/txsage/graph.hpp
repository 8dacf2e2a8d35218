#pragma once

// Immutable heterogeneous weekly transaction graph. Directed edges keep the
// sender->receiver typing; an undirected view (union of both directions,
// deduplicated, self-loops dropped) backs all neighborhood operations.
// Node indices are dense 0..N-1 assigned in sorted-id order, which makes the
// build independent of input record order.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "txsage/types.hpp"

namespace txsage {

class HeteroGraph {
 public:
  HeteroGraph() = default;

  std::uint32_t node_count() const { return static_cast<std::uint32_t>(ids_.size()); }
  std::uint64_t edge_count() const { return und_src_.size(); }  // undirected
  std::uint64_t directed_edge_count() const { return d_col_.size(); }
  const std::string& week() const { return week_; }

  const std::string& node_id(std::uint32_t v) const;
  NodeType node_type(std::uint32_t v) const;
  /// Dense index for a string id, if present.
  std::optional<std::uint32_t> find(std::string_view id) const;

  /// Undirected-view degree.
  std::uint32_t degree(std::uint32_t v) const;

  /// Undirected neighbors of v with aggregated weights, sorted by index.
  std::vector<std::pair<std::uint32_t, double>> neighbors(std::uint32_t v) const;

  /// Zero-copy accessors used by the samplers and the model.
  std::span<const std::uint32_t> neighbor_ids(std::uint32_t v) const;
  std::span<const double> neighbor_weights(std::uint32_t v) const;

  bool has_edge(std::uint32_t u, std::uint32_t v) const;

  /// Undirected edge list, (u, v) with u < v, sorted.
  std::span<const std::uint32_t> und_edge_src() const { return und_src_; }
  std::span<const std::uint32_t> und_edge_dst() const { return und_dst_; }
  std::span<const double> und_edge_weight() const { return und_weight_; }
  /// Inclusive prefix sums of undirected edge weights (for weighted draws).
  std::span<const double> und_edge_cum_weight() const { return und_cumw_; }

  /// Directed collapsed edges out of v: (dst, summed amount, txn count).
  struct DirectedEdge {
    std::uint32_t dst;
    double weight;
    std::uint32_t count;
  };
  std::vector<DirectedEdge> out_edges(std::uint32_t v) const;

  /// Canonical text form: sorted node registry block, then sorted directed
  /// edge block. Equal graphs serialize to identical bytes.
  std::string canonical_serialize() const;
  static HeteroGraph parse_canonical(const std::string& text);

  friend HeteroGraph build_graph(std::span<const TransactionRecord> records,
                                 std::string week);

 private:
  void check_index(std::uint32_t v) const;
  void build_undirected();

  std::string week_;
  std::vector<std::string> ids_;     // sorted
  std::vector<NodeType> types_;

  // directed CSR over collapsed (sender, receiver) pairs
  std::vector<std::uint64_t> d_row_ptr_;
  std::vector<std::uint32_t> d_col_;
  std::vector<double> d_weight_;
  std::vector<std::uint32_t> d_count_;

  // undirected CSR (self-loops removed)
  std::vector<std::uint64_t> u_row_ptr_;
  std::vector<std::uint32_t> u_col_;
  std::vector<double> u_weight_;

  // undirected edge list, u < v, sorted
  std::vector<std::uint32_t> und_src_;
  std::vector<std::uint32_t> und_dst_;
  std::vector<double> und_weight_;
  std::vector<double> und_cumw_;
};

/// Builds the weekly snapshot. Throws std::invalid_argument naming the record
/// index on malformed input (illegal type pair, negative amount, conflicting
/// node types, ids with reserved characters). Deterministic: the same multiset
/// of records yields byte-identical canonical serializations.
HeteroGraph build_graph(std::span<const TransactionRecord> records, std::string week);

/// Edge-list CSV: header `sender_id,sender_type,receiver_id,receiver_type,amount,timestamp`,
/// node types spelled core|noncore|foreign|merchant. Parse errors carry the
/// 1-based line number.
std::vector<TransactionRecord> read_transactions_csv(std::istream& in);
std::vector<TransactionRecord> read_transactions_csv_file(const std::string& path);
void write_transactions_csv(std::ostream& out, std::span<const TransactionRecord> records);
void write_transactions_csv_file(const std::string& path,
                                 std::span<const TransactionRecord> records);

}  // namespace txsage
