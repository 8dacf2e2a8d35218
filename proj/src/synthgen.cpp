#include "txsage/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace txsage {

namespace {

constexpr std::int64_t kWeekSeconds = 7 * 24 * 3600;

std::string make_id(char prefix, std::uint32_t n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%06u", prefix, n);
  return buf;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

double lognormal_amount(double mu, double sigma, Rng& rng) {
  return round2(std::exp(mu + sigma * rng.normal()));
}

int draw_region(const PopulationConfig& cfg, Rng& rng) {
  if (cfg.n_regions == 0) return -1;
  if (cfg.n_regions == 1) return 0;
  if (rng.next_double() < cfg.dominant_region_share) return 0;
  return 1 + static_cast<int>(rng.below(cfg.n_regions - 1));
}

/// Weighted pick by inclusive prefix sums.
std::size_t pick_cum(const std::vector<double>& cumw, Rng& rng) {
  const double total = cumw.back();
  const double target = rng.next_double() * total;
  auto it = std::upper_bound(cumw.begin(), cumw.end(), target);
  std::size_t i = static_cast<std::size_t>(it - cumw.begin());
  return i < cumw.size() ? i : cumw.size() - 1;
}

}  // namespace

std::pair<Roster, GroundTruth> generate_population(const PopulationConfig& cfg) {
  Rng rng = Rng(cfg.seed).derive("population");

  Roster roster;
  roster.region_names.reserve(cfg.n_regions);
  for (std::uint32_t r = 0; r < cfg.n_regions; ++r) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "R%02u", r);
    roster.region_names.push_back(buf);
  }
  roster.age_band_names = cfg.age_bands;

  auto add = [&](Account acc) {
    roster.accounts.push_back(std::move(acc));
    return static_cast<std::uint32_t>(roster.accounts.size() - 1);
  };
  auto draw_age = [&]() {
    return cfg.age_bands.empty() ? -1 : static_cast<int>(rng.index(cfg.age_bands.size()));
  };

  for (std::uint32_t i = 0; i < cfg.n_core; ++i) {
    Account acc;
    acc.id = make_id('C', i);
    acc.type = NodeType::Core;
    acc.region = draw_region(cfg, rng);
    acc.age_band = draw_age();
    std::uint32_t idx = add(acc);
    roster.core.push_back(idx);
    if (rng.next_double() < cfg.savings_fraction) {
      Account child;
      child.id = make_id('S', i);
      child.type = NodeType::NonCore;
      child.region = acc.region;
      child.age_band = acc.age_band;
      child.savings = true;
      child.parent = idx;
      roster.savings.push_back(add(child));
    }
  }
  for (std::uint32_t i = 0; i < cfg.n_noncore; ++i) {
    Account acc;
    acc.id = make_id('N', i);
    acc.type = NodeType::NonCore;
    acc.region = draw_region(cfg, rng);
    acc.age_band = draw_age();
    roster.noncore_ext.push_back(add(acc));
  }
  for (std::uint32_t i = 0; i < cfg.n_foreign; ++i) {
    Account acc;
    acc.id = make_id('F', i);
    acc.type = NodeType::Foreign;
    roster.foreign.push_back(add(acc));
  }
  for (std::uint32_t i = 0; i < cfg.n_merchants; ++i) {
    Account acc;
    acc.id = make_id('M', i);
    acc.type = NodeType::Merchant;
    acc.region = draw_region(cfg, rng);
    roster.merchants.push_back(add(acc));
  }

  // region/age pools
  const std::size_t nr = std::max<std::size_t>(cfg.n_regions, 1);
  const std::size_t na = std::max<std::size_t>(cfg.age_bands.size(), 1);
  roster.core_by_region.assign(nr, {});
  roster.core_by_region_age.assign(nr, std::vector<std::vector<std::uint32_t>>(na));
  roster.noncore_by_region.assign(nr, {});
  roster.merchants_by_region.assign(nr, {});
  for (std::uint32_t idx : roster.core) {
    const auto& acc = roster.accounts[idx];
    if (acc.region >= 0) {
      roster.core_by_region[static_cast<std::size_t>(acc.region)].push_back(idx);
      if (acc.age_band >= 0) {
        roster.core_by_region_age[static_cast<std::size_t>(acc.region)]
                                 [static_cast<std::size_t>(acc.age_band)]
                                     .push_back(idx);
      }
    }
  }
  for (std::uint32_t idx : roster.noncore_ext) {
    const auto& acc = roster.accounts[idx];
    if (acc.region >= 0) {
      roster.noncore_by_region[static_cast<std::size_t>(acc.region)].push_back(idx);
    }
  }
  for (std::uint32_t idx : roster.merchants) {
    const auto& acc = roster.accounts[idx];
    if (acc.region >= 0) {
      roster.merchants_by_region[static_cast<std::size_t>(acc.region)].push_back(idx);
    }
  }

  // Zipf popularity by merchant index: weight (i+1)^-s
  roster.merchant_cumw.reserve(roster.merchants.size());
  double acc_w = 0.0;
  for (std::size_t i = 0; i < roster.merchants.size(); ++i) {
    acc_w += std::pow(static_cast<double>(i + 1), -cfg.zipf_exponent);
    roster.merchant_cumw.push_back(acc_w);
  }
  roster.merchant_region_cumw.assign(nr, {});
  for (std::size_t r = 0; r < nr; ++r) {
    double acc_r = 0.0;
    for (std::uint32_t idx : roster.merchants_by_region[r]) {
      const std::size_t rank = static_cast<std::size_t>(
          std::find(roster.merchants.begin(), roster.merchants.end(), idx) -
          roster.merchants.begin());
      acc_r += std::pow(static_cast<double>(rank + 1), -cfg.zipf_exponent);
      roster.merchant_region_cumw[r].push_back(acc_r);
    }
  }

  GroundTruth truth;
  for (const auto& acc : roster.accounts) {
    TruthRow row;
    row.type = acc.type;
    row.region = acc.region >= 0 ? roster.region_names[static_cast<std::size_t>(acc.region)]
                                 : "none";
    row.age_band = acc.age_band >= 0
                       ? roster.age_band_names[static_cast<std::size_t>(acc.age_band)]
                       : "none";
    row.subtype = acc.savings ? "savings" : "current";
    truth.rows.emplace(acc.id, std::move(row));
  }
  return {std::move(roster), std::move(truth)};
}

namespace {

/// Receiver from `pool` preferring the sender's region (and, for cores, the
/// sender's age band), never the sender itself. Falls back to `all` when the
/// preferred pool offers no distinct counterparty.
std::uint32_t draw_counterparty(const Roster& roster, const PopulationConfig& cfg,
                                std::uint32_t sender, int sender_region,
                                const std::vector<std::vector<std::uint32_t>>& pool_by_region,
                                const std::vector<std::uint32_t>& all, bool use_age,
                                int sender_age, Rng& rng) {
  const std::vector<std::uint32_t>* pool = &all;
  if (sender_region >= 0 && rng.next_double() < cfg.region_homophily) {
    const auto& regional = pool_by_region[static_cast<std::size_t>(sender_region)];
    if (use_age && sender_age >= 0 && rng.next_double() < cfg.age_homophily) {
      const auto& aged = roster.core_by_region_age[static_cast<std::size_t>(sender_region)]
                                                  [static_cast<std::size_t>(sender_age)];
      if (aged.size() > 1 || (aged.size() == 1 && aged[0] != sender)) {
        pool = &aged;
      } else if (regional.size() > 1 || (regional.size() == 1 && regional[0] != sender)) {
        pool = &regional;
      }
    } else if (regional.size() > 1 || (regional.size() == 1 && regional[0] != sender)) {
      pool = &regional;
    }
  }
  for (;;) {
    std::uint32_t pick = (*pool)[rng.index(pool->size())];
    if (pick != sender) return pick;
  }
}

std::uint32_t draw_merchant(const Roster& roster, const PopulationConfig& cfg,
                            int sender_region, Rng& rng) {
  if (sender_region >= 0 && rng.next_double() < cfg.merchant_homophily) {
    const auto& regional = roster.merchants_by_region[static_cast<std::size_t>(sender_region)];
    if (!regional.empty()) {
      const auto& cum = roster.merchant_region_cumw[static_cast<std::size_t>(sender_region)];
      return regional[pick_cum(cum, rng)];
    }
  }
  return roster.merchants[pick_cum(roster.merchant_cumw, rng)];
}

TransactionRecord make_record(const Roster& roster, std::uint32_t sender,
                              std::uint32_t receiver, double amount, std::int64_t ts) {
  const auto& s = roster.accounts[sender];
  const auto& r = roster.accounts[receiver];
  return TransactionRecord{s.id, s.type, r.id, r.type, amount, ts};
}

}  // namespace

std::vector<TransactionRecord> generate_week(const Roster& roster, std::uint32_t week_index,
                                             const PopulationConfig& cfg, Rng& rng) {
  if (roster.accounts.empty()) throw std::invalid_argument("generate_week: empty roster");
  std::vector<TransactionRecord> records;

  const std::int64_t week_start = cfg.epoch_start + static_cast<std::int64_t>(week_index) *
                                                        kWeekSeconds;
  auto stamp = [&]() {
    return week_start + static_cast<std::int64_t>(rng.below(kWeekSeconds));
  };
  auto amount = [&]() { return lognormal_amount(cfg.amount_mu, cfg.amount_sigma, rng); };

  // savings leaves: strictly parent <-> child
  for (std::uint32_t s : roster.savings) {
    const auto& acc = roster.accounts[s];
    for (std::uint32_t t = 0; t < cfg.savings_tx_per_week; ++t) {
      if (t % 2 == 0) {
        records.push_back(make_record(roster, acc.parent, s, amount(), stamp()));
      } else {
        records.push_back(make_record(roster, s, acc.parent, amount(), stamp()));
      }
    }
  }

  // account-to-account transfers
  if (!roster.core.empty()) {
    for (std::uint64_t i = 0; i < cfg.rate_core_core && roster.core.size() > 1; ++i) {
      std::uint32_t sender = roster.core[rng.index(roster.core.size())];
      const auto& acc = roster.accounts[sender];
      std::uint32_t receiver =
          draw_counterparty(roster, cfg, sender, acc.region, roster.core_by_region,
                            roster.core, true, acc.age_band, rng);
      records.push_back(make_record(roster, sender, receiver, amount(), stamp()));
    }
    for (std::uint64_t i = 0; i < cfg.rate_core_noncore && !roster.noncore_ext.empty(); ++i) {
      std::uint32_t sender = roster.core[rng.index(roster.core.size())];
      const auto& acc = roster.accounts[sender];
      std::uint32_t receiver =
          draw_counterparty(roster, cfg, sender, acc.region, roster.noncore_by_region,
                            roster.noncore_ext, false, -1, rng);
      records.push_back(make_record(roster, sender, receiver, amount(), stamp()));
    }
    for (std::uint64_t i = 0; i < cfg.rate_noncore_core && !roster.noncore_ext.empty(); ++i) {
      std::uint32_t sender = roster.noncore_ext[rng.index(roster.noncore_ext.size())];
      const auto& acc = roster.accounts[sender];
      std::uint32_t receiver =
          draw_counterparty(roster, cfg, sender, acc.region, roster.core_by_region,
                            roster.core, false, -1, rng);
      records.push_back(make_record(roster, sender, receiver, amount(), stamp()));
    }
    for (std::uint64_t i = 0; i < cfg.rate_core_foreign && !roster.foreign.empty(); ++i) {
      std::uint32_t sender = roster.core[rng.index(roster.core.size())];
      std::uint32_t receiver = roster.foreign[rng.index(roster.foreign.size())];
      records.push_back(make_record(roster, sender, receiver, amount(), stamp()));
    }
    for (std::uint64_t i = 0; i < cfg.rate_foreign_core && !roster.foreign.empty(); ++i) {
      std::uint32_t sender = roster.foreign[rng.index(roster.foreign.size())];
      std::uint32_t receiver = roster.core[rng.index(roster.core.size())];
      records.push_back(make_record(roster, sender, receiver, amount(), stamp()));
    }

    // point-of-sale
    for (std::uint64_t i = 0; i < cfg.rate_core_merchant && !roster.merchants.empty(); ++i) {
      std::uint32_t sender = roster.core[rng.index(roster.core.size())];
      const auto& acc = roster.accounts[sender];
      std::uint32_t merchant = draw_merchant(roster, cfg, acc.region, rng);
      records.push_back(make_record(roster, sender, merchant, amount(), stamp()));
    }
    for (std::uint64_t i = 0; i < cfg.rate_merchant_core && !roster.merchants.empty(); ++i) {
      std::uint32_t merchant = roster.merchants[pick_cum(roster.merchant_cumw, rng)];
      const auto& macc = roster.accounts[merchant];
      std::uint32_t receiver =
          draw_counterparty(roster, cfg, merchant, macc.region, roster.core_by_region,
                            roster.core, false, -1, rng);
      records.push_back(make_record(roster, merchant, receiver, amount(), stamp()));
    }
  }
  return records;
}

// ---- mule injection ----

namespace {

struct TruthIndex {
  std::vector<std::string> spoke_pool;  // core + external noncore, sorted
  std::unordered_map<std::string, NodeType> types;
};

TruthIndex index_truth(const GroundTruth& truth) {
  TruthIndex ix;
  for (const auto& [id, row] : truth.rows) {
    ix.types.emplace(id, row.type);
    const bool person_account = row.type == NodeType::Core ||
                                (row.type == NodeType::NonCore && row.subtype != "savings");
    if (person_account) ix.spoke_pool.push_back(id);
  }
  return ix;
}

}  // namespace

void inject_mules_for(std::vector<TransactionRecord>& records, GroundTruth& truth,
                      std::span<const std::string> mule_ids, const MuleMotifConfig& motif,
                      Rng& rng) {
  if (mule_ids.empty()) return;
  if (records.empty()) {
    throw std::invalid_argument("inject_mules: no base records to anchor the time window");
  }
  TruthIndex ix = index_truth(truth);

  std::int64_t ts_min = records.front().timestamp, ts_max = records.front().timestamp;
  for (const auto& rec : records) {
    ts_min = std::min(ts_min, rec.timestamp);
    ts_max = std::max(ts_max, rec.timestamp);
  }
  const std::int64_t window = static_cast<std::int64_t>(motif.window_hours) * 3600;

  // counterparty sets for the mule accounts only
  std::unordered_set<std::string> mule_set(mule_ids.begin(), mule_ids.end());
  std::unordered_map<std::string, std::unordered_set<std::string>> known;
  for (const auto& rec : records) {
    if (mule_set.count(rec.sender_id)) known[rec.sender_id].insert(rec.receiver_id);
    if (mule_set.count(rec.receiver_id)) known[rec.receiver_id].insert(rec.sender_id);
  }

  for (const auto& mule : mule_ids) {
    auto truth_it = truth.rows.find(mule);
    if (truth_it == truth.rows.end()) {
      throw std::invalid_argument("inject_mules: unknown account '" + mule + "'");
    }
    truth_it->second.is_mule = true;
    auto& connected = known[mule];

    auto draw_fresh = [&](std::unordered_set<std::string>& used) -> const std::string& {
      for (int attempt = 0; attempt < 100000; ++attempt) {
        const std::string& pick = ix.spoke_pool[rng.index(ix.spoke_pool.size())];
        if (pick == mule || connected.count(pick) || used.count(pick)) continue;
        used.insert(pick);
        return pick;
      }
      throw std::runtime_error("inject_mules: not enough unconnected accounts for '" +
                               mule + "'");
    };

    const std::int64_t slack = std::max<std::int64_t>(1, (ts_max - ts_min) - 2 * window);
    const std::int64_t start = ts_min + static_cast<std::int64_t>(rng.below(
                                            static_cast<std::uint64_t>(slack)));

    // inbound burst from fresh spokes
    std::unordered_set<std::string> used;
    double inflow = 0.0;
    for (std::uint32_t s = 0; s < motif.spokes_per_mule; ++s) {
      const std::string& spoke = draw_fresh(used);
      const double amt = lognormal_amount(motif.amount_mu, motif.amount_sigma, rng);
      inflow += amt;
      const std::int64_t ts =
          start + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(window)));
      records.push_back(TransactionRecord{spoke, ix.types.at(spoke), mule,
                                          ix.types.at(mule), amt, ts});
    }

    // rapid dispersal to fresh counterparties
    const std::uint32_t n_out = std::max<std::uint32_t>(1, motif.spokes_per_mule);
    std::vector<double> shares(n_out);
    double share_sum = 0.0;
    for (auto& s : shares) {
      s = 0.1 + rng.next_double();
      share_sum += s;
    }
    const double outflow = inflow * motif.retention;
    for (std::uint32_t t = 0; t < n_out; ++t) {
      const std::string& target = draw_fresh(used);
      const double amt = round2(outflow * shares[t] / share_sum);
      const std::int64_t ts =
          start + window +
          static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(
              std::max<std::int64_t>(1, window / 2))));
      records.push_back(TransactionRecord{mule, ix.types.at(mule), target,
                                          ix.types.at(target), amt, ts});
    }
    for (const auto& id : used) connected.insert(id);
  }
}

std::vector<std::string> inject_mules(std::vector<TransactionRecord>& records,
                                      GroundTruth& truth, std::uint32_t n_mules,
                                      const MuleMotifConfig& motif, Rng& rng) {
  if (n_mules == 0) return {};
  std::vector<std::string> eligible;
  for (const auto& [id, row] : truth.rows) {
    if (row.type == NodeType::Core && row.subtype == "current" && !row.is_mule) {
      eligible.push_back(id);
    }
  }
  if (n_mules > eligible.size()) {
    throw std::invalid_argument("inject_mules: " + std::to_string(n_mules) +
                                " mules requested but only " +
                                std::to_string(eligible.size()) + " eligible accounts");
  }
  for (std::uint32_t k = 0; k < n_mules; ++k) {
    std::size_t j = k + rng.index(eligible.size() - k);
    std::swap(eligible[k], eligible[j]);
  }
  eligible.resize(n_mules);
  std::sort(eligible.begin(), eligible.end());
  inject_mules_for(records, truth, eligible, motif, rng);
  return eligible;
}

// ---- truth csv ----

void write_truth_csv(std::ostream& out, const GroundTruth& truth) {
  out << "node_id,node_type,region,age_band,subtype,is_mule\n";
  for (const auto& [id, row] : truth.rows) {
    out << id << ',' << to_string(row.type) << ',' << row.region << ',' << row.age_band
        << ',' << row.subtype << ',' << (row.is_mule ? 1 : 0) << '\n';
  }
}

GroundTruth read_truth_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("truth csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "node_id,node_type,region,age_band,subtype,is_mule") {
    throw std::invalid_argument("truth csv: bad header '" + line + "'");
  }
  GroundTruth truth;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string id, type_s, region, age, subtype, mule_s;
    if (!std::getline(ls, id, ',') || !std::getline(ls, type_s, ',') ||
        !std::getline(ls, region, ',') || !std::getline(ls, age, ',') ||
        !std::getline(ls, subtype, ',') || !std::getline(ls, mule_s)) {
      throw std::invalid_argument("truth csv line " + std::to_string(lineno) +
                                  ": expected 6 fields");
    }
    auto t = node_type_from(type_s);
    if (!t) {
      throw std::invalid_argument("truth csv line " + std::to_string(lineno) +
                                  ": unknown node type '" + type_s + "'");
    }
    TruthRow row;
    row.type = *t;
    row.region = region;
    row.age_band = age;
    row.subtype = subtype;
    row.is_mule = mule_s == "1" || mule_s == "true";
    truth.rows.emplace(std::move(id), std::move(row));
  }
  return truth;
}

GroundTruth read_truth_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_truth_csv(in);
}

}  // namespace txsage
