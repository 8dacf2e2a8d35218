#pragma once

// Synthetic multi-week transaction populations: planted region/age
// communities, Zipf-popular merchant hubs, savings-account leaves that only
// transact with their parent, and injected hub-and-spoke money-mule motifs
// with ground-truth sidecar labels.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "txsage/rng.hpp"
#include "txsage/types.hpp"

namespace txsage {

struct PopulationConfig {
  std::uint32_t n_core = 1000;
  std::uint32_t n_noncore = 200;
  std::uint32_t n_foreign = 50;
  std::uint32_t n_merchants = 100;
  std::uint32_t n_regions = 8;
  std::vector<std::string> age_bands = {"u16", "16-29", "30-44", "45-64", "65+"};
  std::uint32_t weeks = 1;

  double dominant_region_share = 0.2;  // one region soaks up this share of accounts
  double region_homophily = 0.8;       // transfer receivers drawn intra-region
  double age_homophily = 0.5;          // within the intra-region branch
  double merchant_homophily = 0.8;     // POS drawn from same-region merchants
  double savings_fraction = 0.15;      // cores that get a savings child
  std::uint32_t savings_tx_per_week = 2;
  double zipf_exponent = 1.0;          // merchant popularity tail

  // expected weekly transaction counts per edge type
  std::uint64_t rate_core_core = 3000;
  std::uint64_t rate_core_noncore = 600;
  std::uint64_t rate_noncore_core = 600;
  std::uint64_t rate_core_foreign = 150;
  std::uint64_t rate_foreign_core = 150;
  std::uint64_t rate_core_merchant = 4000;
  std::uint64_t rate_merchant_core = 120;

  double amount_mu = 3.5;   // log-normal location (log currency units)
  double amount_sigma = 1.0;
  std::int64_t epoch_start = 1735689600;  // first week start, seconds

  std::uint64_t seed = 1;

  // mule injection
  std::uint32_t n_mules = 0;
  std::uint32_t spokes_per_mule = 10;
  double mule_amount_mu = 6.0;
  double mule_amount_sigma = 0.3;
  double mule_retention = 0.95;  // outflow = retention * inflow
  std::uint32_t mule_window_hours = 48;
};

struct Account {
  std::string id;
  NodeType type = NodeType::Core;
  int region = -1;    // index into Roster::region_names, -1 for none
  int age_band = -1;  // index into age_bands, -1 for none
  bool savings = false;
  std::uint32_t parent = 0;  // roster index of the parent core (savings only)
};

struct Roster {
  std::vector<Account> accounts;
  std::vector<std::string> region_names;
  std::vector<std::string> age_band_names;

  // roster indices by population
  std::vector<std::uint32_t> core;
  std::vector<std::uint32_t> noncore_ext;  // external non-core, no savings leaves
  std::vector<std::uint32_t> savings;
  std::vector<std::uint32_t> foreign;
  std::vector<std::uint32_t> merchants;

  std::vector<std::vector<std::uint32_t>> core_by_region;
  std::vector<std::vector<std::vector<std::uint32_t>>> core_by_region_age;
  std::vector<std::vector<std::uint32_t>> noncore_by_region;
  std::vector<std::vector<std::uint32_t>> merchants_by_region;

  // Zipf popularity, inclusive prefix sums (global and per region)
  std::vector<double> merchant_cumw;
  std::vector<std::vector<double>> merchant_region_cumw;
};

struct TruthRow {
  NodeType type = NodeType::Core;
  std::string region = "none";
  std::string age_band = "none";
  std::string subtype = "current";  // current | savings
  bool is_mule = false;
};

/// Exportable sidecar labels, keyed by node id (sorted).
struct GroundTruth {
  std::map<std::string, TruthRow> rows;
};

std::pair<Roster, GroundTruth> generate_population(const PopulationConfig& cfg);

/// One week of transactions. Savings accounts transact only with their
/// parent; every record involves a core account and passes the 7-edge-type
/// schema. Deterministic given the rng stream.
std::vector<TransactionRecord> generate_week(const Roster& roster, std::uint32_t week_index,
                                             const PopulationConfig& cfg, Rng& rng);

struct MuleMotifConfig {
  std::uint32_t spokes_per_mule = 10;
  double amount_mu = 6.0;
  double amount_sigma = 0.3;
  double retention = 0.95;
  std::uint32_t window_hours = 48;
};

/// Selects n_mules core accounts, wires `spokes_per_mule` inbound transfers
/// from previously-unconnected accounts inside a short window, then disperses
/// retention * inflow outward to fresh counterparties. Flags the chosen
/// accounts in `truth` and returns their ids (sorted).
std::vector<std::string> inject_mules(std::vector<TransactionRecord>& records,
                                      GroundTruth& truth, std::uint32_t n_mules,
                                      const MuleMotifConfig& motif, Rng& rng);

/// Same motif for an already-chosen mule set (keeps the set stable across
/// weeks).
void inject_mules_for(std::vector<TransactionRecord>& records, GroundTruth& truth,
                      std::span<const std::string> mule_ids, const MuleMotifConfig& motif,
                      Rng& rng);

/// `node_id,node_type,region,age_band,subtype,is_mule`
void write_truth_csv(std::ostream& out, const GroundTruth& truth);
GroundTruth read_truth_csv(std::istream& in);
GroundTruth read_truth_csv_file(const std::string& path);

}  // namespace txsage
