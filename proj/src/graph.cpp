#include "txsage/graph.hpp"

#include <algorithm>
#include <cerrno>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace txsage {

namespace {

constexpr const char* kMagicLine = "txsage-graph v1";

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void HeteroGraph::check_index(std::uint32_t v) const {
  if (v >= node_count()) {
    throw std::out_of_range("node index " + std::to_string(v) + " out of range (n=" +
                            std::to_string(node_count()) + ")");
  }
}

const std::string& HeteroGraph::node_id(std::uint32_t v) const {
  check_index(v);
  return ids_[v];
}

NodeType HeteroGraph::node_type(std::uint32_t v) const {
  check_index(v);
  return types_[v];
}

std::optional<std::uint32_t> HeteroGraph::find(std::string_view id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::uint32_t>(it - ids_.begin());
}

std::uint32_t HeteroGraph::degree(std::uint32_t v) const {
  check_index(v);
  return static_cast<std::uint32_t>(u_row_ptr_[v + 1] - u_row_ptr_[v]);
}

std::span<const std::uint32_t> HeteroGraph::neighbor_ids(std::uint32_t v) const {
  check_index(v);
  return {u_col_.data() + u_row_ptr_[v], u_row_ptr_[v + 1] - u_row_ptr_[v]};
}

std::span<const double> HeteroGraph::neighbor_weights(std::uint32_t v) const {
  check_index(v);
  return {u_weight_.data() + u_row_ptr_[v], u_row_ptr_[v + 1] - u_row_ptr_[v]};
}

std::vector<std::pair<std::uint32_t, double>> HeteroGraph::neighbors(std::uint32_t v) const {
  auto ids = neighbor_ids(v);
  auto ws = neighbor_weights(v);
  std::vector<std::pair<std::uint32_t, double>> out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out.emplace_back(ids[i], ws[i]);
  return out;
}

bool HeteroGraph::has_edge(std::uint32_t u, std::uint32_t v) const {
  auto ids = neighbor_ids(u);
  return std::binary_search(ids.begin(), ids.end(), v);
}

std::vector<HeteroGraph::DirectedEdge> HeteroGraph::out_edges(std::uint32_t v) const {
  check_index(v);
  std::vector<DirectedEdge> out;
  for (std::uint64_t i = d_row_ptr_[v]; i < d_row_ptr_[v + 1]; ++i) {
    out.push_back({d_col_[i], d_weight_[i], d_count_[i]});
  }
  return out;
}

void HeteroGraph::build_undirected() {
  const std::uint32_t n = node_count();
  // Merge both directions per unordered pair; fixed order (low->high first)
  // keeps the weight sums bit-stable.
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> merged;
  for (std::uint32_t u = 0; u < n; ++u) {
    for (std::uint64_t i = d_row_ptr_[u]; i < d_row_ptr_[u + 1]; ++i) {
      std::uint32_t v = d_col_[i];
      if (u == v) continue;  // self-transfers excluded from the undirected view
      auto key = std::minmax(u, v);
      merged[{key.first, key.second}];  // default 0.0
    }
  }
  for (auto& [key, w] : merged) {
    auto [a, b] = key;
    double sum = 0.0;
    auto add_dir = [&](std::uint32_t s, std::uint32_t d) {
      std::uint64_t lo = d_row_ptr_[s], hi = d_row_ptr_[s + 1];
      auto begin = d_col_.begin() + static_cast<std::ptrdiff_t>(lo);
      auto end = d_col_.begin() + static_cast<std::ptrdiff_t>(hi);
      auto it = std::lower_bound(begin, end, d);
      if (it != end && *it == d) sum += d_weight_[static_cast<std::uint64_t>(it - d_col_.begin())];
    };
    add_dir(a, b);
    add_dir(b, a);
    w = sum;
  }

  und_src_.clear();
  und_dst_.clear();
  und_weight_.clear();
  for (auto& [key, w] : merged) {
    und_src_.push_back(key.first);
    und_dst_.push_back(key.second);
    und_weight_.push_back(w);
  }

  // CSR for the symmetric view
  std::vector<std::uint64_t> deg(n + 1, 0);
  for (std::size_t e = 0; e < und_src_.size(); ++e) {
    ++deg[und_src_[e] + 1];
    ++deg[und_dst_[e] + 1];
  }
  u_row_ptr_.assign(n + 1, 0);
  for (std::uint32_t v = 0; v < n; ++v) u_row_ptr_[v + 1] = u_row_ptr_[v] + deg[v + 1];
  u_col_.assign(u_row_ptr_[n], 0);
  u_weight_.assign(u_row_ptr_[n], 0.0);
  std::vector<std::uint64_t> cursor(u_row_ptr_.begin(), u_row_ptr_.end() - 1);
  for (std::size_t e = 0; e < und_src_.size(); ++e) {
    std::uint32_t a = und_src_[e], b = und_dst_[e];
    u_col_[cursor[a]] = b;
    u_weight_[cursor[a]++] = und_weight_[e];
    u_col_[cursor[b]] = a;
    u_weight_[cursor[b]++] = und_weight_[e];
  }
  // edges were emitted in sorted pair order, so each row is already sorted

  und_cumw_.resize(und_weight_.size());
  double acc = 0.0;
  for (std::size_t e = 0; e < und_weight_.size(); ++e) {
    acc += und_weight_[e];
    und_cumw_[e] = acc;
  }
}

HeteroGraph build_graph(std::span<const TransactionRecord> records, std::string week) {
  // Pass 1: validate and collect the node set.
  std::unordered_map<std::string, NodeType> seen;
  seen.reserve(records.size() * 2);
  auto note_node = [&](const std::string& id, NodeType t, std::size_t idx) {
    auto [it, inserted] = seen.emplace(id, t);
    if (!inserted && it->second != t) {
      throw std::invalid_argument("record " + std::to_string(idx) + ": node '" + id +
                                  "' appears with conflicting types " +
                                  to_string(it->second) + " and " + to_string(t));
    }
  };
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    std::string err = validate_record(rec);
    if (!err.empty()) {
      throw std::invalid_argument("record " + std::to_string(i) + ": " + err);
    }
    note_node(rec.sender_id, rec.sender_type, i);
    note_node(rec.receiver_id, rec.receiver_type, i);
  }

  HeteroGraph g;
  g.week_ = std::move(week);
  g.ids_.reserve(seen.size());
  for (const auto& [id, t] : seen) g.ids_.push_back(id);
  std::sort(g.ids_.begin(), g.ids_.end());
  g.types_.resize(g.ids_.size());
  for (std::size_t v = 0; v < g.ids_.size(); ++v) g.types_[v] = seen[g.ids_[v]];

  auto index_of = [&](const std::string& id) {
    return static_cast<std::uint32_t>(
        std::lower_bound(g.ids_.begin(), g.ids_.end(), id) - g.ids_.begin());
  };

  // Pass 2: collapse parallel transactions per ordered pair. Sorting by
  // (src, dst, amount) fixes the summation order, so the aggregate weight is
  // identical for any permutation of the input records.
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> triples;
  triples.reserve(records.size());
  for (const auto& rec : records) {
    triples.emplace_back(index_of(rec.sender_id), index_of(rec.receiver_id), rec.amount);
  }
  std::sort(triples.begin(), triples.end());

  const std::uint32_t n = g.node_count();
  g.d_row_ptr_.assign(n + 1, 0);
  for (std::size_t i = 0; i < triples.size();) {
    std::uint32_t src = std::get<0>(triples[i]);
    std::uint32_t dst = std::get<1>(triples[i]);
    double w = 0.0;
    std::uint32_t cnt = 0;
    while (i < triples.size() && std::get<0>(triples[i]) == src &&
           std::get<1>(triples[i]) == dst) {
      w += std::get<2>(triples[i]);
      ++cnt;
      ++i;
    }
    g.d_col_.push_back(dst);
    g.d_weight_.push_back(w);
    g.d_count_.push_back(cnt);
    ++g.d_row_ptr_[src + 1];
  }
  for (std::uint32_t v = 0; v < n; ++v) g.d_row_ptr_[v + 1] += g.d_row_ptr_[v];

  g.build_undirected();
  return g;
}

std::string HeteroGraph::canonical_serialize() const {
  std::string out;
  out += kMagicLine;
  out += '\n';
  out += "week ";
  out += week_;
  out += '\n';
  out += "nodes " + std::to_string(node_count()) + '\n';
  for (std::uint32_t v = 0; v < node_count(); ++v) {
    out += ids_[v];
    out += '\t';
    out += to_string(types_[v]);
    out += '\n';
  }
  out += "edges " + std::to_string(d_col_.size()) + '\n';
  for (std::uint32_t u = 0; u < node_count(); ++u) {
    for (std::uint64_t i = d_row_ptr_[u]; i < d_row_ptr_[u + 1]; ++i) {
      out += std::to_string(u);
      out += '\t';
      out += std::to_string(d_col_[i]);
      out += '\t';
      out += fmt_double(d_weight_[i]);
      out += '\t';
      out += std::to_string(d_count_[i]);
      out += '\n';
    }
  }
  return out;
}

HeteroGraph HeteroGraph::parse_canonical(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto need_line = [&](const char* what) {
    if (!std::getline(in, line)) {
      throw std::invalid_argument(std::string("canonical graph: missing ") + what);
    }
    return line;
  };
  if (need_line("header") != kMagicLine) {
    throw std::invalid_argument("canonical graph: bad header");
  }
  need_line("week");
  if (line.rfind("week ", 0) != 0) throw std::invalid_argument("canonical graph: bad week line");
  HeteroGraph g;
  g.week_ = line.substr(5);

  need_line("node count");
  if (line.rfind("nodes ", 0) != 0) throw std::invalid_argument("canonical graph: bad nodes line");
  std::size_t n = std::stoull(line.substr(6));
  g.ids_.reserve(n);
  g.types_.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    need_line("node row");
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::invalid_argument("canonical graph: bad node row");
    auto t = node_type_from(line.substr(tab + 1));
    if (!t) throw std::invalid_argument("canonical graph: unknown node type in '" + line + "'");
    g.ids_.push_back(line.substr(0, tab));
    g.types_.push_back(*t);
    if (v > 0 && !(g.ids_[v - 1] < g.ids_[v])) {
      throw std::invalid_argument("canonical graph: node block not sorted");
    }
  }

  need_line("edge count");
  if (line.rfind("edges ", 0) != 0) throw std::invalid_argument("canonical graph: bad edges line");
  std::size_t m = std::stoull(line.substr(6));
  g.d_row_ptr_.assign(n + 1, 0);
  g.d_col_.reserve(m);
  g.d_weight_.reserve(m);
  g.d_count_.reserve(m);
  std::uint32_t prev_src = 0;
  for (std::size_t e = 0; e < m; ++e) {
    need_line("edge row");
    std::uint32_t src, dst, cnt;
    double w;
    char wbuf[64];
    if (std::sscanf(line.c_str(), "%" SCNu32 "\t%" SCNu32 "\t%63[^\t]\t%" SCNu32, &src, &dst,
                    wbuf, &cnt) != 4) {
      throw std::invalid_argument("canonical graph: bad edge row '" + line + "'");
    }
    w = std::strtod(wbuf, nullptr);
    if (src >= n || dst >= n) throw std::invalid_argument("canonical graph: edge index range");
    if (e > 0 && src < prev_src) throw std::invalid_argument("canonical graph: edges not sorted");
    prev_src = src;
    g.d_col_.push_back(dst);
    g.d_weight_.push_back(w);
    g.d_count_.push_back(cnt);
    ++g.d_row_ptr_[src + 1];
  }
  for (std::size_t v = 0; v < n; ++v) g.d_row_ptr_[v + 1] += g.d_row_ptr_[v];
  g.build_undirected();
  return g;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace

std::vector<TransactionRecord> read_transactions_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("line " + std::to_string(lineno) + ": " + msg);
  };

  if (!std::getline(in, line)) throw std::invalid_argument("line 1: missing header");
  lineno = 1;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "sender_id,sender_type,receiver_id,receiver_type,amount,timestamp") {
    fail("bad header '" + line + "'");
  }

  std::vector<TransactionRecord> records;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 6) fail("expected 6 fields, got " + std::to_string(f.size()));
    TransactionRecord rec;
    rec.sender_id = f[0];
    auto st = node_type_from(f[1]);
    if (!st) fail("unknown sender type '" + f[1] + "'");
    rec.sender_type = *st;
    rec.receiver_id = f[2];
    auto rt = node_type_from(f[3]);
    if (!rt) fail("unknown receiver type '" + f[3] + "'");
    rec.receiver_type = *rt;
    char* end = nullptr;
    rec.amount = std::strtod(f[4].c_str(), &end);
    if (end == f[4].c_str() || *end != '\0') fail("bad amount '" + f[4] + "'");
    errno = 0;
    rec.timestamp = std::strtoll(f[5].c_str(), &end, 10);
    if (end == f[5].c_str() || *end != '\0' || errno == ERANGE) {
      fail("bad timestamp '" + f[5] + "'");
    }
    std::string err = validate_record(rec);
    if (!err.empty()) fail(err);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<TransactionRecord> read_transactions_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return read_transactions_csv(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_transactions_csv(std::ostream& out, std::span<const TransactionRecord> records) {
  out << "sender_id,sender_type,receiver_id,receiver_type,amount,timestamp\n";
  char buf[64];
  for (const auto& rec : records) {
    std::snprintf(buf, sizeof(buf), "%.2f", rec.amount);
    out << rec.sender_id << ',' << to_string(rec.sender_type) << ',' << rec.receiver_id
        << ',' << to_string(rec.receiver_type) << ',' << buf << ',' << rec.timestamp
        << '\n';
  }
}

void write_transactions_csv_file(const std::string& path,
                                 std::span<const TransactionRecord> records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_transactions_csv(out, records);
}

}  // namespace txsage
