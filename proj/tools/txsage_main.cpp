// txsage command line: synth -> train -> infer -> eval-sim / project /
// mule-bench over weekly transaction CSVs. All outputs are deterministic from
// the resolved config; errors go to stderr as a single `error: ...` line with
// a nonzero exit.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "txsage/config.hpp"
#include "txsage/downstream.hpp"
#include "txsage/eval.hpp"
#include "txsage/graph.hpp"
#include "txsage/model.hpp"
#include "txsage/synthgen.hpp"
#include "txsage/trainer.hpp"

namespace fs = std::filesystem;
using namespace txsage;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string seed_override;
};

RunConfig load_config(const CommonOpts& opts, bool config_required) {
  RunConfig cfg;
  if (!opts.config_path.empty()) {
    cfg = parse_run_config_file(opts.config_path);
  } else if (config_required) {
    throw std::runtime_error("--config is required for this subcommand");
  }
  if (!opts.seed_override.empty()) apply_override(cfg, "seed", opts.seed_override);
  if (!opts.out_dir.empty()) apply_override(cfg, "out_dir", opts.out_dir);
  cfg.propagate_seed();
  return cfg;
}

fs::path prepare_out_dir(const RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

void echo_config(const RunConfig& cfg, const fs::path& dir) {
  std::ofstream out(dir / "resolved_config.txt");
  if (!out) throw std::runtime_error("cannot write resolved config echo");
  write_run_config(out, cfg);
}

std::string week_label(const std::string& path) { return fs::path(path).stem().string(); }

HeteroGraph load_week(const std::string& path) {
  auto records = read_transactions_csv_file(path);
  return build_graph(records, week_label(path));
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  body(out);
}

// ---- subcommand bodies ----

struct WeekData {
  std::vector<TransactionRecord> records;
  std::string label;
};

std::vector<WeekData> synth_weeks(const RunConfig& cfg) {
  auto [roster, truth] = generate_population(cfg.population);
  const Rng root(cfg.population.seed);

  std::vector<std::string> mules;
  MuleMotifConfig motif;
  motif.spokes_per_mule = cfg.population.spokes_per_mule;
  motif.amount_mu = cfg.population.mule_amount_mu;
  motif.amount_sigma = cfg.population.mule_amount_sigma;
  motif.retention = cfg.population.mule_retention;
  motif.window_hours = cfg.population.mule_window_hours;

  std::vector<WeekData> weeks;
  for (std::uint32_t w = 0; w < cfg.population.weeks; ++w) {
    Rng stream = root.derive("week", w);
    WeekData data;
    data.records = generate_week(roster, w, cfg.population, stream);
    data.label = "week_" + std::to_string(w + 1);
    if (cfg.population.n_mules > 0) {
      Rng mule_stream = root.derive("mules", w);
      if (w == 0) {
        mules = inject_mules(data.records, truth, cfg.population.n_mules, motif, mule_stream);
      } else {
        inject_mules_for(data.records, truth, mules, motif, mule_stream);
      }
    }
    weeks.push_back(std::move(data));
  }

  const fs::path dir = prepare_out_dir(cfg);
  for (const auto& data : weeks) {
    write_transactions_csv_file((dir / (data.label + ".csv")).string(), data.records);
  }
  write_file(dir / "truth.csv", [&](std::ostream& out) { write_truth_csv(out, truth); });
  echo_config(cfg, dir);
  return weeks;
}

int cmd_synth(const CommonOpts& opts) {
  RunConfig cfg = load_config(opts, true);
  auto weeks = synth_weeks(cfg);
  std::cout << "synth: wrote " << weeks.size() << " week(s) to " << cfg.out_dir << "\n";
  return 0;
}

Checkpoint train_on_week(const RunConfig& cfg, const HeteroGraph& g, const fs::path& dir) {
  TrainResult result = train(g, cfg.model, cfg.trainer, cfg.sampler);
  Checkpoint ckpt{cfg.model, cfg.trainer.seed, std::move(result.params)};
  save_checkpoint((dir / "model.ckpt").string(), ckpt);
  write_file(dir / "training_log.csv",
             [&](std::ostream& out) { write_training_log_csv(out, result.log); });
  return ckpt;
}

int cmd_train(const CommonOpts& opts, const std::string& week_path) {
  RunConfig cfg = load_config(opts, true);
  const fs::path dir = prepare_out_dir(cfg);
  HeteroGraph g = load_week(week_path);
  train_on_week(cfg, g, dir);
  echo_config(cfg, dir);
  std::cout << "train: checkpoint and log written to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_infer(const CommonOpts& opts, const std::string& ckpt_path,
              const std::string& week_path) {
  RunConfig cfg = load_config(opts, false);
  const fs::path dir = prepare_out_dir(cfg);
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  HeteroGraph g = load_week(week_path);
  EmbeddingTable table = forward_all(g, ckpt.config, ckpt.params);
  const std::string name = "embeddings_" + g.week() + ".csv";
  write_file(dir / name, [&](std::ostream& out) { write_embeddings_csv(out, g, table); });
  std::cout << "infer: wrote " << (dir / name).string() << "\n";
  return 0;
}

int cmd_eval_sim(const CommonOpts& opts, const std::string& ckpt_path,
                 const std::vector<std::string>& week_paths) {
  RunConfig cfg = load_config(opts, false);
  const fs::path dir = prepare_out_dir(cfg);
  Checkpoint ckpt = load_checkpoint(ckpt_path);

  std::vector<HeteroGraph> graphs;
  graphs.reserve(week_paths.size());
  for (const auto& path : week_paths) graphs.push_back(load_week(path));

  WeeklySeries series = weekly_series(graphs, ckpt.config, ckpt.params, cfg.eval, cfg.seed);
  write_file(dir / "similarity.csv",
             [&](std::ostream& out) { write_similarity_csv(out, series.reports); });
  write_file(dir / "trend.csv", [&](std::ostream& out) {
    write_trend_csv(out, series.pos_trend, series.neg_trend);
  });
  echo_config(cfg, dir);
  std::cout << "eval-sim: wrote similarity.csv and trend.csv to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_project(const CommonOpts& opts, const std::string& emb_path,
                const std::string& truth_path) {
  RunConfig cfg = load_config(opts, false);
  const fs::path dir = prepare_out_dir(cfg);

  std::ifstream in(emb_path);
  if (!in) throw std::runtime_error("cannot open " + emb_path);
  EmbeddingRows rows = read_embeddings_csv(in);
  if (rows.ids.empty()) throw std::runtime_error("no embeddings in " + emb_path);
  GroundTruth truth = read_truth_csv_file(truth_path);

  Projection proj = project_2d(rows.vectors);
  std::vector<std::string> labels;
  labels.reserve(rows.ids.size());
  for (const auto& id : rows.ids) {
    auto it = truth.rows.find(id);
    labels.push_back(it != truth.rows.end() ? it->second.region : "none");
  }
  write_file(dir / "projection.csv", [&](std::ostream& out) {
    write_projection_csv(out, rows.ids, rows.types, proj, labels);
  });
  std::cout << "project: wrote " << (dir / "projection.csv").string() << "\n";
  return 0;
}

int cmd_mule_bench(const CommonOpts& opts) {
  RunConfig cfg = load_config(opts, true);
  if (cfg.population.weeks < 2) {
    throw std::runtime_error("mule-bench needs weeks >= 2 (train week + test week)");
  }
  if (cfg.population.n_mules == 0) {
    throw std::runtime_error("mule-bench needs n_mules > 0");
  }
  const fs::path dir = prepare_out_dir(cfg);

  auto weeks = synth_weeks(cfg);
  GroundTruth truth = read_truth_csv_file((dir / "truth.csv").string());

  HeteroGraph train_graph = build_graph(weeks[0].records, weeks[0].label);
  Checkpoint ckpt = train_on_week(cfg, train_graph, dir);

  HeteroGraph test_graph = build_graph(weeks[1].records, weeks[1].label);
  EmbeddingTable train_emb = forward_all(train_graph, ckpt.config, ckpt.params);
  EmbeddingTable test_emb = forward_all(test_graph, ckpt.config, ckpt.params);
  write_file(dir / ("embeddings_" + weeks[0].label + ".csv"),
             [&](std::ostream& out) { write_embeddings_csv(out, train_graph, train_emb); });
  write_file(dir / ("embeddings_" + weeks[1].label + ".csv"),
             [&](std::ostream& out) { write_embeddings_csv(out, test_graph, test_emb); });

  CounterpartyHistory empty_history;
  CounterpartyHistory week1_history = build_counterparty_history(weeks[0].records);

  auto base_rows = build_features(train_graph, weeks[0].records, empty_history, truth, nullptr);
  auto base_test = build_features(test_graph, weeks[1].records, week1_history, truth, nullptr);
  base_rows.insert(base_rows.end(), base_test.begin(), base_test.end());

  auto aug_rows = build_features(train_graph, weeks[0].records, empty_history, truth, &train_emb);
  auto aug_test = build_features(test_graph, weeks[1].records, week1_history, truth, &test_emb);
  aug_rows.insert(aug_rows.end(), aug_test.begin(), aug_test.end());

  CompareConfig cc;
  cc.ks = cfg.precision_ks;
  cc.train_week = weeks[0].label;
  cc.test_week = weeks[1].label;
  cc.logreg = cfg.logreg;
  CompareResult result = compare(base_rows, aug_rows, cc);

  write_file(dir / "results.csv", [&](std::ostream& out) { write_compare_csv(out, result); });
  std::cout << "mule-bench: wrote " << (dir / "results.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inductive transaction-graph embeddings with a mule-detection benchmark"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string week_path, ckpt_path, emb_path, truth_path;
  std::vector<std::string> week_paths;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "run configuration file");
    sub->add_option("--seed", opts.seed_override, "override the config seed");
    sub->add_option("--out", opts.out_dir, "output directory");
  };

  auto* synth = app.add_subcommand("synth", "generate weekly transaction CSVs + truth sidecar");
  add_common(synth);

  auto* train_cmd = app.add_subcommand("train", "train the embedding model on one week");
  add_common(train_cmd);
  train_cmd->add_option("--week", week_path, "training week CSV")->required();

  auto* infer = app.add_subcommand("infer", "embed every node of a week");
  add_common(infer);
  infer->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
  infer->add_option("--week", week_path, "week CSV")->required();

  auto* eval_sim = app.add_subcommand("eval-sim", "weekly cosine similarity report + trend");
  add_common(eval_sim);
  eval_sim->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
  eval_sim->add_option("--weeks", week_paths, "week CSVs (>= 2)")->required()->expected(-1);

  auto* project = app.add_subcommand("project", "2-D PCA projection of an embedding CSV");
  add_common(project);
  project->add_option("--embeddings", emb_path, "embedding CSV")->required();
  project->add_option("--truth", truth_path, "truth sidecar CSV")->required();

  auto* bench = app.add_subcommand("mule-bench", "full synthetic mule benchmark pipeline");
  add_common(bench);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(opts);
    if (train_cmd->parsed()) return cmd_train(opts, week_path);
    if (infer->parsed()) return cmd_infer(opts, ckpt_path, week_path);
    if (eval_sim->parsed()) return cmd_eval_sim(opts, ckpt_path, week_paths);
    if (project->parsed()) return cmd_project(opts, emb_path, truth_path);
    if (bench->parsed()) return cmd_mule_bench(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
