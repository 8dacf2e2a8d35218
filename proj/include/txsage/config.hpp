#pragma once

// Flat `key = value` run configuration. One file drives the whole pipeline;
// unknown keys are rejected and every run writes back a resolved-config echo
// that reproduces it exactly. The single `seed` key feeds every module
// through named derived streams.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "txsage/downstream.hpp"
#include "txsage/eval.hpp"
#include "txsage/sampler.hpp"
#include "txsage/synthgen.hpp"
#include "txsage/trainer.hpp"

namespace txsage {

struct RunConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  ModelConfig model;
  SamplerConfig sampler;
  TrainConfig trainer;
  SimilarityOptions eval;
  PopulationConfig population;
  LogRegConfig logreg;
  std::vector<std::size_t> precision_ks{20, 50, 200};

  /// Pushes `seed` into every per-module seed field.
  void propagate_seed();
};

RunConfig parse_run_config(std::istream& in);
RunConfig parse_run_config_file(const std::string& path);

/// Applies one `key = value` override (CLI flags funnel through here).
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// Resolved-config echo; itself a valid config file.
void write_run_config(std::ostream& out, const RunConfig& cfg);

}  // namespace txsage
