#include "txsage/types.hpp"

namespace txsage {

const char* to_string(NodeType t) {
  switch (t) {
    case NodeType::Core: return "core";
    case NodeType::NonCore: return "noncore";
    case NodeType::Foreign: return "foreign";
    case NodeType::Merchant: return "merchant";
  }
  return "?";
}

std::optional<NodeType> node_type_from(std::string_view s) {
  if (s == "core") return NodeType::Core;
  if (s == "noncore") return NodeType::NonCore;
  if (s == "foreign") return NodeType::Foreign;
  if (s == "merchant") return NodeType::Merchant;
  return std::nullopt;
}

std::string validate_record(const TransactionRecord& rec) {
  auto id_ok = [](const std::string& id) {
    if (id.empty()) return false;
    for (char c : id) {
      if (c == ',' || c == '\t' || c == '\n' || c == '\r') return false;
    }
    return true;
  };
  if (!id_ok(rec.sender_id)) return "bad sender id '" + rec.sender_id + "'";
  if (!id_ok(rec.receiver_id)) return "bad receiver id '" + rec.receiver_id + "'";
  if (!(rec.amount >= 0.0)) return "negative amount";
  if (!legal_edge_type(rec.sender_type, rec.receiver_type)) {
    return std::string("illegal edge type (") + to_string(rec.sender_type) + "," +
           to_string(rec.receiver_type) + "): no core endpoint";
  }
  return "";
}

}  // namespace txsage
