#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace txsage {

/// The four account populations on the transaction graph.
enum class NodeType : std::uint8_t { Core = 0, NonCore = 1, Foreign = 2, Merchant = 3 };

constexpr int kNodeTypeCount = 4;

const char* to_string(NodeType t);
std::optional<NodeType> node_type_from(std::string_view s);

/// The 7 legal sender/receiver type pairs. Every edge involves a core account:
/// core<->core, core<->noncore, core<->foreign, core<->merchant.
inline bool legal_edge_type(NodeType sender, NodeType receiver) {
  if (sender == NodeType::Core) return true;
  return receiver == NodeType::Core;
}

/// One money movement between two accounts.
struct TransactionRecord {
  std::string sender_id;
  NodeType sender_type = NodeType::Core;
  std::string receiver_id;
  NodeType receiver_type = NodeType::Core;
  double amount = 0.0;     // currency units, >= 0
  std::int64_t timestamp = 0;  // seconds since epoch
};

/// Empty string if valid, otherwise a description of the violation.
std::string validate_record(const TransactionRecord& rec);

}  // namespace txsage
