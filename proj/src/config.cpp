#include "txsage/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace txsage {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

std::uint64_t parse_u64(const std::string& v) {
  char* end = nullptr;
  errno = 0;
  std::uint64_t x = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE || v.find('-') != std::string::npos) {
    throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

std::int64_t parse_i64(const std::string& v) {
  char* end = nullptr;
  errno = 0;
  std::int64_t x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE) {
    throw std::invalid_argument("expected an integer, got '" + v + "'");
  }
  return x;
}

double parse_f64(const std::string& v) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw std::invalid_argument("expected a number, got '" + v + "'");
  }
  return x;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("expected true/false, got '" + v + "'");
}

std::string fmt_f64(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> parse;
  std::function<std::string(const RunConfig&)> format;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; },
       [](const RunConfig& c) { return c.out_dir; }},

      {"input_dim",
       [](RunConfig& c, const std::string& v) { c.model.input_dim = static_cast<int>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.model.input_dim); }},
      {"hidden_dim",
       [](RunConfig& c, const std::string& v) { c.model.hidden_dim = static_cast<int>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.model.hidden_dim); }},
      {"output_dim",
       [](RunConfig& c, const std::string& v) { c.model.output_dim = static_cast<int>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.model.output_dim); }},

      {"fanouts",
       [](RunConfig& c, const std::string& v) {
         std::vector<int> fans;
         for (const auto& item : split_list(v)) fans.push_back(static_cast<int>(parse_u64(item)));
         if (fans.size() != 2) throw std::invalid_argument("fanouts needs exactly 2 entries");
         c.sampler.fanout_per_layer = fans;
       },
       [](const RunConfig& c) {
         return std::to_string(c.sampler.fanout_per_layer[0]) + "," +
                std::to_string(c.sampler.fanout_per_layer[1]);
       }},
      {"weighted",
       [](RunConfig& c, const std::string& v) { c.sampler.weighted = parse_bool(v); },
       [](const RunConfig& c) { return c.sampler.weighted ? "true" : "false"; }},

      {"learning_rate",
       [](RunConfig& c, const std::string& v) { c.trainer.learning_rate = parse_f64(v); },
       [](const RunConfig& c) { return fmt_f64(c.trainer.learning_rate); }},
      {"negatives_q",
       [](RunConfig& c, const std::string& v) { c.trainer.negatives_q = static_cast<int>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.trainer.negatives_q); }},
      {"epochs",
       [](RunConfig& c, const std::string& v) { c.trainer.epochs = static_cast<int>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.trainer.epochs); }},
      {"batch_size",
       [](RunConfig& c, const std::string& v) { c.trainer.batch_size = static_cast<int>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.trainer.batch_size); }},
      {"pairs_per_node",
       [](RunConfig& c, const std::string& v) { c.trainer.pairs_per_node = static_cast<int>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.trainer.pairs_per_node); }},

      {"eval_core_only",
       [](RunConfig& c, const std::string& v) { c.eval.core_only = parse_bool(v); },
       [](const RunConfig& c) { return c.eval.core_only ? "true" : "false"; }},
      {"eval_n_neg",
       [](RunConfig& c, const std::string& v) { c.eval.n_neg = parse_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.eval.n_neg); }},
      {"eval_max_pos",
       [](RunConfig& c, const std::string& v) { c.eval.max_pos = parse_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.eval.max_pos); }},

      {"n_core",
       [](RunConfig& c, const std::string& v) { c.population.n_core = static_cast<std::uint32_t>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.population.n_core); }},
      {"n_noncore",
       [](RunConfig& c, const std::string& v) { c.population.n_noncore = static_cast<std::uint32_t>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.population.n_noncore); }},
      {"n_foreign",
       [](RunConfig& c, const std::string& v) { c.population.n_foreign = static_cast<std::uint32_t>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.population.n_foreign); }},
      {"n_merchants",
       [](RunConfig& c, const std::string& v) { c.population.n_merchants = static_cast<std::uint32_t>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.population.n_merchants); }},
      {"n_regions",
       [](RunConfig& c, const std::string& v) { c.population.n_regions = static_cast<std::uint32_t>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.population.n_regions); }},
      {"age_bands",
       [](RunConfig& c, const std::string& v) { c.population.age_bands = split_list(v); },
       [](const RunConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.population.age_bands.size(); ++i) {
           if (i) out += ',';
           out += c.population.age_bands[i];
         }
         return out;
       }},
      {"weeks",
       [](RunConfig& c, const std::string& v) { c.population.weeks = static_cast<std::uint32_t>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.population.weeks); }},
      {"dominant_region_share",
       [](RunConfig& c, const std::string& v) { c.population.dominant_region_share = parse_f64(v); },
       [](const RunConfig& c) { return fmt_f64(c.population.dominant_region_share); }},
      {"region_homophily",
       [](RunConfig& c, const std::string& v) { c.population.region_homophily = parse_f64(v); },
       [](const RunConfig& c) { return fmt_f64(c.population.region_homophily); }},
      {"age_homophily",
       [](RunConfig& c, const std::string& v) { c.population.age_homophily = parse_f64(v); },
       [](const RunConfig& c) { return fmt_f64(c.population.age_homophily); }},
      {"merchant_homophily",
       [](RunConfig& c, const std::string& v) { c.population.merchant_homophily = parse_f64(v); },
       [](const RunConfig& c) { return fmt_f64(c.population.merchant_homophily); }},
      {"savings_fraction",
       [](RunConfig& c, const std::string& v) { c.population.savings_fraction = parse_f64(v); },
       [](const RunConfig& c) { return fmt_f64(c.population.savings_fraction); }},
      {"savings_tx_per_week",
       [](RunConfig& c, const std::string& v) { c.population.savings_tx_per_week = static_cast<std::uint32_t>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.population.savings_tx_per_week); }},
      {"zipf_exponent",
       [](RunConfig& c, const std::string& v) { c.population.zipf_exponent = parse_f64(v); },
       [](const RunConfig& c) { return fmt_f64(c.population.zipf_exponent); }},
      {"rate_core_core",
       [](RunConfig& c, const std::string& v) { c.population.rate_core_core = parse_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.population.rate_core_core); }},
      {"rate_core_noncore",
       [](RunConfig& c, const std::string& v) { c.population.rate_core_noncore = parse_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.population.rate_core_noncore); }},
      {"rate_noncore_core",
       [](RunConfig& c, const std::string& v) { c.population.rate_noncore_core = parse_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.population.rate_noncore_core); }},
      {"rate_core_foreign",
       [](RunConfig& c, const std::string& v) { c.population.rate_core_foreign = parse_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.population.rate_core_foreign); }},
      {"rate_foreign_core",
       [](RunConfig& c, const std::string& v) { c.population.rate_foreign_core = parse_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.population.rate_foreign_core); }},
      {"rate_core_merchant",
       [](RunConfig& c, const std::string& v) { c.population.rate_core_merchant = parse_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.population.rate_core_merchant); }},
      {"rate_merchant_core",
       [](RunConfig& c, const std::string& v) { c.population.rate_merchant_core = parse_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.population.rate_merchant_core); }},
      {"amount_mu",
       [](RunConfig& c, const std::string& v) { c.population.amount_mu = parse_f64(v); },
       [](const RunConfig& c) { return fmt_f64(c.population.amount_mu); }},
      {"amount_sigma",
       [](RunConfig& c, const std::string& v) { c.population.amount_sigma = parse_f64(v); },
       [](const RunConfig& c) { return fmt_f64(c.population.amount_sigma); }},
      {"epoch_start",
       [](RunConfig& c, const std::string& v) { c.population.epoch_start = parse_i64(v); },
       [](const RunConfig& c) { return std::to_string(c.population.epoch_start); }},

      {"n_mules",
       [](RunConfig& c, const std::string& v) { c.population.n_mules = static_cast<std::uint32_t>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.population.n_mules); }},
      {"spokes_per_mule",
       [](RunConfig& c, const std::string& v) { c.population.spokes_per_mule = static_cast<std::uint32_t>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.population.spokes_per_mule); }},
      {"mule_amount_mu",
       [](RunConfig& c, const std::string& v) { c.population.mule_amount_mu = parse_f64(v); },
       [](const RunConfig& c) { return fmt_f64(c.population.mule_amount_mu); }},
      {"mule_amount_sigma",
       [](RunConfig& c, const std::string& v) { c.population.mule_amount_sigma = parse_f64(v); },
       [](const RunConfig& c) { return fmt_f64(c.population.mule_amount_sigma); }},
      {"mule_retention",
       [](RunConfig& c, const std::string& v) { c.population.mule_retention = parse_f64(v); },
       [](const RunConfig& c) { return fmt_f64(c.population.mule_retention); }},
      {"mule_window_hours",
       [](RunConfig& c, const std::string& v) { c.population.mule_window_hours = static_cast<std::uint32_t>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.population.mule_window_hours); }},

      {"logreg_learning_rate",
       [](RunConfig& c, const std::string& v) { c.logreg.learning_rate = parse_f64(v); },
       [](const RunConfig& c) { return fmt_f64(c.logreg.learning_rate); }},
      {"logreg_epochs",
       [](RunConfig& c, const std::string& v) { c.logreg.epochs = static_cast<int>(parse_u64(v)); },
       [](const RunConfig& c) { return std::to_string(c.logreg.epochs); }},
      {"logreg_l2",
       [](RunConfig& c, const std::string& v) { c.logreg.l2 = parse_f64(v); },
       [](const RunConfig& c) { return fmt_f64(c.logreg.l2); }},
      {"precision_ks",
       [](RunConfig& c, const std::string& v) {
         std::vector<std::size_t> ks;
         for (const auto& item : split_list(v)) ks.push_back(parse_u64(item));
         if (ks.empty()) throw std::invalid_argument("precision_ks must not be empty");
         c.precision_ks = ks;
       },
       [](const RunConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.precision_ks.size(); ++i) {
           if (i) out += ',';
           out += std::to_string(c.precision_ks[i]);
         }
         return out;
       }},
  };
  return table;
}

}  // namespace

void RunConfig::propagate_seed() {
  sampler.seed = seed;
  trainer.seed = seed;
  population.seed = seed;
  logreg.seed = seed;
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& field : fields()) {
    if (key == field.key) {
      field.parse(cfg, value);
      cfg.propagate_seed();
      return;
    }
  }
  throw std::invalid_argument("unknown config key '" + key + "'");
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_override(cfg, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.propagate_seed();
  return cfg;
}

RunConfig parse_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return parse_run_config(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_run_config(std::ostream& out, const RunConfig& cfg) {
  for (const auto& field : fields()) {
    out << field.key << " = " << field.format(cfg) << '\n';
  }
}

}  // namespace txsage
