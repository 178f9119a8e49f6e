// Command-line front end: profiling runs, the UNI baseline, sweeps,
// ground-truth dumps, model evaluation, heatmaps and correlation reports.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dta/bench.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

std::string output_dir(const json& config, const std::string& flag_override) {
  if (!flag_override.empty()) return flag_override;
  if (const char* env = std::getenv("DTA_OUTPUT_DIR"); env && *env) return env;
  return config.value("output_dir", std::string("."));
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  // profile-level overrides; <0 / empty means "not set"
  long long budget = -1;
  long long batch = -1;
  long long seed = -1;
  std::string mode, scorer, retrain;
  double w_error = -1.0, w_size = -1.0, w_cost = -1.0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Run config JSON file")->required();
  cmd->add_option("--out-dir", flags.out_dir, "Output directory (overrides config and env)");
  cmd->add_option("--budget", flags.budget, "Override budget_B");
  cmd->add_option("--batch", flags.batch, "Override batch_b");
  cmd->add_option("--seed", flags.seed, "Override seed");
  cmd->add_option("--mode", flags.mode, "Override tree mode (oblique|flat)");
  cmd->add_option("--scorer", flags.scorer, "Override split scorer");
  cmd->add_option("--retrain", flags.retrain, "Override retrain policy (offline|online)");
  cmd->add_option("--w-error", flags.w_error, "Override w_error");
  cmd->add_option("--w-size", flags.w_size, "Override w_size");
  cmd->add_option("--w-cost", flags.w_cost, "Override w_cost");
}

// flags win over the config file
json profile_section(const json& config, const CommonFlags& flags) {
  json p = config.value("profile", json::object());
  if (flags.budget >= 0) p["budget_B"] = flags.budget;
  if (flags.batch >= 0) p["batch_b"] = flags.batch;
  if (flags.seed >= 0) p["seed"] = flags.seed;
  if (!flags.mode.empty()) p["mode"] = flags.mode;
  if (!flags.scorer.empty()) p["scorer"] = flags.scorer;
  if (!flags.retrain.empty()) p["retrain"] = flags.retrain;
  json w = p.value("weights", json::object());
  if (flags.w_error >= 0) w["w_error"] = flags.w_error;
  if (flags.w_size >= 0) w["w_size"] = flags.w_size;
  if (flags.w_cost >= 0) w["w_cost"] = flags.w_cost;
  if (!w.empty()) p["weights"] = w;
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_profile(const CommonFlags& flags, bool baseline) {
  const json config = load_json(flags.config_path);
  const std::string base_dir = fs::path(flags.config_path).parent_path().string();
  const dta::DeploymentSpace space = dta::space_from_config(config, base_dir);
  const auto deployer = dta::make_deployer(space, config.at("deployer"));
  const dta::ProfilerConfig cfg =
      dta::profiler_config_from_json(space, profile_section(config, flags));

  dta::RunResult result =
      baseline ? dta::run_uni_baseline(space, *deployer, cfg.budget, cfg.final_pool, cfg.cv_folds,
                                       cfg.seed, cfg.tree, cfg.sa, cfg.bagged_members,
                                       cfg.parallelism)
               : dta::run(space, *deployer, cfg);

  const fs::path dir = output_dir(config, flags.out_dir);
  fs::create_directories(dir);
  const std::string stem = baseline ? "uni" : "profile";
  write_text(dir / (stem + "_model.json"), result.model.to_json(&space).dump(2) + "\n");
  result.log.write((dir / (stem + "_runlog.jsonl")).string());

  json summary{{"samples", result.samples.size()},
               {"chosen_model", result.log.summary.chosen_kind},
               {"candidate_cv", result.log.summary.candidate_cv},
               {"wall_ms", result.log.summary.wall_ms}};
  if (deployer->deterministic()) {
    const auto truth = dta::make_deployer(space, config.at("deployer"));
    const auto [mse, mae] = dta::evaluate_full_grid(
        [&](const dta::Point& p) { return result.model.predict(p); }, space, *truth);
    summary["full_grid_mse"] = mse;
    summary["full_grid_mae"] = mae;
  }
  write_text(dir / (stem + "_summary.json"), summary.dump(2) + "\n");
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_flag, int parallelism) {
  const json config = load_json(config_path);
  const std::string base_dir = fs::path(config_path).parent_path().string();
  dta::Experiment exp = dta::Experiment::from_json(config, base_dir);
  const fs::path dir = output_dir(config, out_flag);
  fs::create_directories(dir);
  const fs::path csv_path = dir / "results.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  csv << dta::kResultsCsvHeader << '\n';
  const auto rows = dta::sweep(exp, &csv, parallelism);
  std::size_t failed = 0;
  for (const auto& r : rows)
    if (!r.error.empty()) ++failed;
  std::cout << "wrote " << rows.size() << " rows to " << csv_path.string();
  if (failed) std::cout << " (" << failed << " failed)";
  std::cout << '\n';
  return failed == 0 ? 0 : 1;
}

int cmd_synth_dump(const std::string& config_path, const std::string& out_path) {
  const json config = load_json(config_path);
  const std::string base_dir = fs::path(config_path).parent_path().string();
  const dta::DeploymentSpace space = dta::space_from_config(config, base_dir);
  const auto deployer = dta::make_deployer(space, config.at("deployer"));
  const std::uint64_t rows = dta::dump_grid_csv(space, *deployer, out_path);
  std::cout << "wrote " << rows << " rows to " << out_path << '\n';
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& model_path) {
  const json config = load_json(config_path);
  const std::string base_dir = fs::path(config_path).parent_path().string();
  const dta::DeploymentSpace space = dta::space_from_config(config, base_dir);
  const auto deployer = dta::make_deployer(space, config.at("deployer"));
  const dta::FinalModel model = dta::FinalModel::from_json(load_json(model_path));
  const auto [mse, mae] = dta::evaluate_full_grid(
      [&](const dta::Point& p) { return model.predict(p); }, space, *deployer);
  std::cout << json{{"mse", mse}, {"mae", mae}}.dump() << '\n';
  return 0;
}

int cmd_heatmap(const std::string& runlog_path, int bins, const std::string& out_path) {
  const dta::RunLog log = dta::RunLog::read(runlog_path);
  const dta::DeploymentSpace space = dta::DeploymentSpace::from_json(log.space_echo);
  std::vector<dta::Point> points;
  for (const auto& rec : log.iterations)
    points.insert(points.end(), rec.drawn.begin(), rec.drawn.end());
  const auto matrix = dta::heatmap(points, space, bins);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  dta::write_heatmap_csv(matrix, out);
  std::cout << "wrote " << bins << "x" << bins << " heatmap (" << points.size() << " samples) to "
            << out_path << '\n';
  return 0;
}

int cmd_correlate(const std::string& grid_path, const std::string& out_path) {
  const auto rows = dta::correlation_report(grid_path);
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"dimension", r.name}, {"r", r.r}, {"zero_variance", r.zero_variance}});
  if (!out_path.empty()) write_text(out_path, out.dump(2) + "\n");
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive black-box performance profiling with oblique regression trees"};
  app.require_subcommand(1);

  CommonFlags profile_flags, baseline_flags;
  auto* profile = app.add_subcommand("profile", "Run the adaptive profiler");
  add_common(profile, profile_flags);
  auto* baseline = app.add_subcommand("baseline", "Run the UNI uniform-sampling baseline");
  add_common(baseline, baseline_flags);

  std::string sweep_config, sweep_out;
  int sweep_parallelism = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment sweep, write results.csv");
  sweep_cmd->add_option("--config", sweep_config, "Sweep config JSON")->required();
  sweep_cmd->add_option("--out-dir", sweep_out, "Output directory");
  sweep_cmd->add_option("--parallelism", sweep_parallelism, "Concurrent runs");

  std::string dump_config, dump_out;
  auto* dump_cmd = app.add_subcommand("synth-dump", "Write the full ground-truth grid CSV");
  dump_cmd->add_option("--config", dump_config, "Run config JSON")->required();
  dump_cmd->add_option("--out", dump_out, "Output CSV path")->required();

  std::string eval_config, eval_model;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model file over the full grid");
  eval_cmd->add_option("--config", eval_config, "Run config JSON")->required();
  eval_cmd->add_option("--model", eval_model, "Model JSON file")->required();

  std::string heat_runlog, heat_out = "heatmap.csv";
  int heat_bins = 20;
  auto* heat_cmd = app.add_subcommand("heatmap", "Sample-distribution heatmap from a run log");
  heat_cmd->add_option("--runlog", heat_runlog, "Run log JSONL")->required();
  heat_cmd->add_option("--bins", heat_bins, "Bins per dimension");
  heat_cmd->add_option("--out", heat_out, "Output CSV path");

  std::string corr_grid, corr_out;
  auto* corr_cmd = app.add_subcommand("correlate", "Per-dimension Pearson correlation report");
  corr_cmd->add_option("--grid", corr_grid, "Ground-truth grid CSV")->required();
  corr_cmd->add_option("--out", corr_out, "Output JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (profile->parsed()) return cmd_profile(profile_flags, false);
    if (baseline->parsed()) return cmd_profile(baseline_flags, true);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_config, sweep_out, sweep_parallelism);
    if (dump_cmd->parsed()) return cmd_synth_dump(dump_config, dump_out);
    if (eval_cmd->parsed()) return cmd_eval(eval_config, eval_model);
    if (heat_cmd->parsed()) return cmd_heatmap(heat_runlog, heat_bins, heat_out);
    if (corr_cmd->parsed()) return cmd_correlate(corr_grid, corr_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
