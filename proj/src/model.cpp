#include "txsage/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace txsage {

namespace {

// Keep sigmoid outputs inside the open interval even when the pre-activation
// saturates past double precision.
constexpr double kOutputFloor = 1e-15;
constexpr double kOutputCeil = 1.0 - 1e-15;

inline double sigmoid_open(double x) {
  double s = sigmoid(x);
  if (s < kOutputFloor) return kOutputFloor;
  if (s > kOutputCeil) return kOutputCeil;
  return s;
}

}  // namespace

Vec node_features(std::string_view id, NodeType type, int input_dim) {
  if (input_dim < 1) throw std::invalid_argument("node_features: input_dim must be >= 1");
  std::uint64_t h = detail::fnv1a64(id);
  h ^= (static_cast<std::uint64_t>(type) + 1) * 0x9e3779b97f4a7c15ULL;
  detail::splitmix_next(h);
  Rng stream(h);
  Vec x(static_cast<std::size_t>(input_dim));
  for (auto& v : x) v = stream.next_double();
  return x;
}

Mat feature_matrix(const HeteroGraph& g, int input_dim) {
  Mat x(static_cast<int>(g.node_count()), input_dim);
  for (std::uint32_t v = 0; v < g.node_count(); ++v) {
    Vec f = node_features(g.node_id(v), g.node_type(v), input_dim);
    std::copy(f.begin(), f.end(), x.row(static_cast<int>(v)));
  }
  return x;
}

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.input_dim < 1 || cfg.hidden_dim < 1 || cfg.output_dim < 1) {
    throw std::invalid_argument("init_params: all dims must be >= 1");
  }
  ModelParams p;
  p.w1 = Mat(cfg.hidden_dim, cfg.input_dim);
  p.b1.assign(static_cast<std::size_t>(cfg.hidden_dim), 0.0);
  p.w2 = Mat(cfg.output_dim, cfg.hidden_dim);
  p.b2.assign(static_cast<std::size_t>(cfg.output_dim), 0.0);

  Rng stream = Rng(seed).derive("init-params");
  auto fill_uniform = [&](Mat& m, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : m.data) v = (2.0 * stream.next_double() - 1.0) * bound;
  };
  fill_uniform(p.w1, cfg.input_dim);
  fill_uniform(p.w2, cfg.hidden_dim);
  return p;
}

Vec aggregate_mean(const Vec& self, std::span<const Vec> neighbors) {
  const std::size_t d = self.size();
  for (const auto& nb : neighbors) {
    if (nb.size() != d) throw std::invalid_argument("aggregate_mean: dimension mismatch");
  }
  Vec out(d);
  std::vector<double> column(neighbors.size() + 1);
  for (std::size_t k = 0; k < d; ++k) {
    column[0] = self[k];
    for (std::size_t i = 0; i < neighbors.size(); ++i) column[i + 1] = neighbors[i][k];
    std::sort(column.begin(), column.end());
    double s = 0.0;
    for (double v : column) s += v;
    out[k] = s / static_cast<double>(column.size());
  }
  return out;
}

// ---- embedding table ----

EmbeddingTable::EmbeddingTable(std::string week, std::uint32_t node_count, int dim)
    : week_(std::move(week)), dim_(dim), rows_(node_count), present_(node_count, 0) {}

const Vec& EmbeddingTable::at(std::uint32_t v) const {
  if (!has(v)) {
    throw std::out_of_range("EmbeddingTable: no embedding for node index " +
                            std::to_string(v));
  }
  return rows_[v];
}

void EmbeddingTable::set(std::uint32_t v, Vec value) {
  if (v >= present_.size()) throw std::out_of_range("EmbeddingTable: index out of range");
  if (static_cast<int>(value.size()) != dim_) {
    throw std::invalid_argument("EmbeddingTable: wrong dimension");
  }
  for (double x : value) {
    if (!std::isfinite(x) || x <= 0.0 || x >= 1.0) {
      throw std::invalid_argument("EmbeddingTable: component outside (0,1)");
    }
  }
  rows_[v] = std::move(value);
  present_[v] = 1;
}

// ---- forward passes ----

namespace {

// mean of the feature rows of {self} ∪ members into `out`
void mean_rows(const Mat& x, std::uint32_t self, std::span<const std::uint32_t> members,
               double* out) {
  const int d = x.cols;
  const double* selfrow = x.row(static_cast<int>(self));
  for (int k = 0; k < d; ++k) out[k] = selfrow[k];
  for (std::uint32_t m : members) {
    const double* r = x.row(static_cast<int>(m));
    for (int k = 0; k < d; ++k) out[k] += r[k];
  }
  const double inv = 1.0 / static_cast<double>(members.size() + 1);
  for (int k = 0; k < d; ++k) out[k] *= inv;
}

Vec hidden_of(const ModelConfig& cfg, const ModelParams& params, const Mat& x,
              std::uint32_t v, std::span<const std::uint32_t> sampled) {
  Vec m(static_cast<std::size_t>(cfg.input_dim));
  mean_rows(x, v, sampled, m.data());
  Vec h(static_cast<std::size_t>(cfg.hidden_dim));
  matvec_bias(params.w1, m.data(), params.b1.data(), h.data());
  for (auto& z : h) z = z > 0.0 ? z : 0.0;
  return h;
}

}  // namespace

EmbeddingTable forward(const HeteroGraph& g, const ModelConfig& cfg,
                       const ModelParams& params, std::span<const std::uint32_t> seeds,
                       const SamplerConfig& sampler_cfg, Rng& rng) {
  if (sampler_cfg.fanout_per_layer.size() != 2) {
    throw std::invalid_argument("forward: expected one fanout per layer (2 layers)");
  }
  const int fan1 = sampler_cfg.fanout_per_layer[0];
  const int fan2 = sampler_cfg.fanout_per_layer[1];
  const Mat x = feature_matrix(g, cfg.input_dim);

  EmbeddingTable table(g.week(), g.node_count(), cfg.output_dim);
  Vec agg(static_cast<std::size_t>(cfg.hidden_dim));
  for (std::uint32_t seed : seeds) {
    auto hop1 = sample_neighbors(g, seed, fan1, sampler_cfg.weighted, rng);

    auto self_hop2 = sample_neighbors(g, seed, fan2, sampler_cfg.weighted, rng);
    Vec h_self = hidden_of(cfg, params, x, seed, self_hop2);

    std::fill(agg.begin(), agg.end(), 0.0);
    for (int k = 0; k < cfg.hidden_dim; ++k) agg[k] = h_self[k];
    for (std::uint32_t w : hop1) {
      auto hop2 = sample_neighbors(g, w, fan2, sampler_cfg.weighted, rng);
      Vec h = hidden_of(cfg, params, x, w, hop2);
      for (int k = 0; k < cfg.hidden_dim; ++k) agg[k] += h[k];
    }
    const double inv = 1.0 / static_cast<double>(hop1.size() + 1);
    for (auto& v : agg) v *= inv;

    Vec z(static_cast<std::size_t>(cfg.output_dim));
    matvec_bias(params.w2, agg.data(), params.b2.data(), z.data());
    for (auto& v : z) v = sigmoid_open(v);
    table.set(seed, std::move(z));
  }
  return table;
}

EmbeddingTable forward_all(const HeteroGraph& g, const ModelConfig& cfg,
                           const ModelParams& params) {
  const std::uint32_t n = g.node_count();
  const Mat x = feature_matrix(g, cfg.input_dim);

  Mat h1(static_cast<int>(n), cfg.hidden_dim);
  Vec m(static_cast<std::size_t>(cfg.input_dim));
  for (std::uint32_t v = 0; v < n; ++v) {
    mean_rows(x, v, g.neighbor_ids(v), m.data());
    matvec_bias(params.w1, m.data(), params.b1.data(), h1.row(static_cast<int>(v)));
    double* row = h1.row(static_cast<int>(v));
    for (int k = 0; k < cfg.hidden_dim; ++k) row[k] = row[k] > 0.0 ? row[k] : 0.0;
  }

  EmbeddingTable table(g.week(), n, cfg.output_dim);
  Vec a(static_cast<std::size_t>(cfg.hidden_dim));
  for (std::uint32_t v = 0; v < n; ++v) {
    mean_rows(h1, v, g.neighbor_ids(v), a.data());
    Vec z(static_cast<std::size_t>(cfg.output_dim));
    matvec_bias(params.w2, a.data(), params.b2.data(), z.data());
    for (auto& val : z) val = sigmoid_open(val);
    table.set(v, std::move(z));
  }
  return table;
}

// ---- checkpoint io ----

namespace {

constexpr char kCkptMagic[8] = {'T', 'X', 'S', 'A', 'G', 'E', 'C', 'K'};
constexpr std::uint32_t kCkptVersion = 1;
constexpr std::uint8_t kActRelu = 0;
constexpr std::uint8_t kActSigmoid = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void put_block(std::ostream& out, const double* p, std::size_t count) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(count * 8));
}

void get_block(std::istream& in, double* p, std::size_t count) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(count * 8));
  if (!in) throw std::runtime_error("checkpoint: truncated parameter block");
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kCkptMagic, 8);
  put(out, kCkptVersion);
  put(out, static_cast<std::uint32_t>(ckpt.config.input_dim));
  put(out, static_cast<std::uint32_t>(ckpt.config.hidden_dim));
  put(out, static_cast<std::uint32_t>(ckpt.config.output_dim));
  put(out, ckpt.seed);
  put(out, kActRelu);
  put(out, kActSigmoid);
  const char pad[6] = {0, 0, 0, 0, 0, 0};
  out.write(pad, 6);
  put_block(out, ckpt.params.w1.data.data(), ckpt.params.w1.data.size());
  put_block(out, ckpt.params.b1.data(), ckpt.params.b1.size());
  put_block(out, ckpt.params.w2.data.data(), ckpt.params.w2.data.size());
  put_block(out, ckpt.params.b2.data(), ckpt.params.b2.size());
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCkptMagic, 8) != 0) {
    throw std::runtime_error(path + ": not a txsage checkpoint");
  }
  if (get<std::uint32_t>(in) != kCkptVersion) {
    throw std::runtime_error(path + ": unsupported checkpoint version");
  }
  Checkpoint ckpt;
  ckpt.config.input_dim = static_cast<int>(get<std::uint32_t>(in));
  ckpt.config.hidden_dim = static_cast<int>(get<std::uint32_t>(in));
  ckpt.config.output_dim = static_cast<int>(get<std::uint32_t>(in));
  ckpt.seed = get<std::uint64_t>(in);
  if (get<std::uint8_t>(in) != kActRelu || get<std::uint8_t>(in) != kActSigmoid) {
    throw std::runtime_error(path + ": unexpected activation ids");
  }
  char pad[6];
  in.read(pad, 6);
  if (!in) throw std::runtime_error(path + ": truncated header");

  const auto& cfg = ckpt.config;
  if (cfg.input_dim < 1 || cfg.hidden_dim < 1 || cfg.output_dim < 1) {
    throw std::runtime_error(path + ": bad dimensions");
  }
  ckpt.params.w1 = Mat(cfg.hidden_dim, cfg.input_dim);
  ckpt.params.b1.assign(static_cast<std::size_t>(cfg.hidden_dim), 0.0);
  ckpt.params.w2 = Mat(cfg.output_dim, cfg.hidden_dim);
  ckpt.params.b2.assign(static_cast<std::size_t>(cfg.output_dim), 0.0);
  get_block(in, ckpt.params.w1.data.data(), ckpt.params.w1.data.size());
  get_block(in, ckpt.params.b1.data(), ckpt.params.b1.size());
  get_block(in, ckpt.params.w2.data.data(), ckpt.params.w2.data.size());
  get_block(in, ckpt.params.b2.data(), ckpt.params.b2.size());
  for (double v : ckpt.params.w1.data) {
    if (!std::isfinite(v)) throw std::runtime_error(path + ": non-finite weight");
  }
  for (double v : ckpt.params.w2.data) {
    if (!std::isfinite(v)) throw std::runtime_error(path + ": non-finite weight");
  }
  return ckpt;
}

// ---- embedding csv ----

void write_embeddings_csv(std::ostream& out, const HeteroGraph& g,
                          const EmbeddingTable& table) {
  out << "node_id,node_type";
  for (int k = 0; k < table.dim(); ++k) out << ",e" << k;
  out << '\n';
  char buf[32];
  for (std::uint32_t v = 0; v < g.node_count(); ++v) {
    if (!table.has(v)) continue;
    out << g.node_id(v) << ',' << to_string(g.node_type(v));
    for (double x : table.at(v)) {
      std::snprintf(buf, sizeof(buf), "%.9g", x);
      out << ',' << buf;
    }
    out << '\n';
  }
}

EmbeddingRows read_embeddings_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("embeddings csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("node_id,node_type,e0", 0) != 0) {
    throw std::invalid_argument("embeddings csv: bad header");
  }
  int dim = 0;
  for (std::size_t pos = 0; (pos = line.find(",e", pos)) != std::string::npos; ++pos) ++dim;

  EmbeddingRows rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    if (!std::getline(ls, field, ',')) break;
    rows.ids.push_back(field);
    if (!std::getline(ls, field, ',')) {
      throw std::invalid_argument("embeddings csv line " + std::to_string(lineno) +
                                  ": missing node type");
    }
    auto t = node_type_from(field);
    if (!t) {
      throw std::invalid_argument("embeddings csv line " + std::to_string(lineno) +
                                  ": unknown node type '" + field + "'");
    }
    rows.types.push_back(*t);
    Vec v;
    v.reserve(static_cast<std::size_t>(dim));
    while (std::getline(ls, field, ',')) v.push_back(std::stod(field));
    if (static_cast<int>(v.size()) != dim) {
      throw std::invalid_argument("embeddings csv line " + std::to_string(lineno) +
                                  ": expected " + std::to_string(dim) + " components");
    }
    rows.vectors.push_back(std::move(v));
  }
  return rows;
}

}  // namespace txsage
