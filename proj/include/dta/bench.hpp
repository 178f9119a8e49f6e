#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dta/deployers.hpp"
#include "dta/profiler.hpp"
#include "dta/space.hpp"

namespace dta {

// ---------------------------------------------------------------------------
// Run configuration (JSON) helpers shared by the CLI, tests and bindings
// ---------------------------------------------------------------------------

/// Builds a deployer from its JSON spec:
///   {"kind":"synthetic","synthetic":{"kind":"HAT","seed":7,"coeffs":[...]?}}
///   {"kind":"replay","replay":{"path":"grid.csv"}}
///   {"kind":"command","command":{"template":"...","timeout_secs":10}}
///   {"kind":"plane-bump","plane_bump":{"seed":5,"amplitude":2.0,"sigma":0.05}}
std::unique_ptr<Deployer> make_deployer(const DeploymentSpace& space, const nlohmann::json& spec);

/// Short function label for result tables ("HAT", "plane-bump", "replay", ...).
std::string deployer_label(const nlohmann::json& spec);

ProfilerConfig profiler_config_from_json(const DeploymentSpace& space, const nlohmann::json& j);

/// Loads the space of a run config: inline under "space" or from "space_file".
DeploymentSpace space_from_config(const nlohmann::json& config,
                                  const std::string& base_dir = "");

// ---------------------------------------------------------------------------
// Baseline and evaluation
// ---------------------------------------------------------------------------

/// UNI baseline: B uniform-without-replacement points, then the same final
/// model selection as the profiler. Shares the profiler's RNG derivation so
/// a B=b profiling run draws the identical point set for the same seed.
RunResult run_uni_baseline(const DeploymentSpace& space, Deployer& deployer, std::uint64_t budget,
                           const std::vector<ModelKind>& pool, int folds, std::uint64_t seed,
                           const TreeConfig& tree_cfg, const AnnealSchedule& sched,
                           int bagged_members = 25, int parallelism = 1);

/// MSE and MAE of a predictor against a deterministic deployer over the
/// entire grid.
std::pair<double, double> evaluate_full_grid(const std::function<double(const Point&)>& predict,
                                             const DeploymentSpace& space, Deployer& deployer);

// ---------------------------------------------------------------------------
// Abnormality test sets (ridge functions EXPABS / WAVE)
// ---------------------------------------------------------------------------

enum class TestsetMode { kAll, kAbn, kMix };

/// Grid points whose scaled-coordinate distance to the ridge f1 = 0 is
/// below eps (mode kAbn), all points (kAll), or the near points plus an
/// equal number of far points (kMix, seeded). Throws std::runtime_error
/// naming the minimum attainable distance when the near set is empty.
std::vector<Point> abnormality_testset(const SyntheticDeployer& deployer,
                                       const DeploymentSpace& space, double eps, TestsetMode mode,
                                       std::uint64_t seed = 0);

/// MSE of a predictor on an explicit set of points.
double testset_mse(const std::function<double(const Point&)>& predict,
                   const std::vector<Point>& points, Deployer& deployer);

// ---------------------------------------------------------------------------
// Sample-distribution heatmap and correlation analysis
// ---------------------------------------------------------------------------

/// bins x bins counts of points over the first two dimensions' raw ranges.
std::vector<std::vector<std::uint64_t>> heatmap(const std::vector<Point>& points,
                                                const DeploymentSpace& space, int bins = 20);

void write_heatmap_csv(const std::vector<std::vector<std::uint64_t>>& matrix, std::ostream& out);

struct DimCorrelation {
  std::string name;
  double r = 0.0;
  bool zero_variance = false;
};

/// Pearson correlation of each input dimension with the metric, from a
/// ground-truth grid CSV (dimension columns followed by `metric`).
std::vector<DimCorrelation> correlation_report(const std::string& csv_path);

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct Experiment {
  DeploymentSpace space;
  nlohmann::json deployer_spec;
  ProfilerConfig base;
  std::vector<double> sampling_rates;   // SR axis; converted to budgets
  std::vector<std::uint64_t> budgets;   // explicit B axis (overrides SRs)
  std::vector<std::uint64_t> ratios;    // B/b axis; b = max(1, round(B/ratio))
  std::vector<double> w_costs;
  std::vector<TreeMode> modes;
  std::vector<SplitScorerKind> scorers;
  std::vector<Retrain> retrains;
  std::vector<std::string> methods;     // "dta", "uni"
  int repetitions = 20;
  std::uint64_t base_seed = 1;

  Experiment(DeploymentSpace s, nlohmann::json deployer, ProfilerConfig base_cfg);
  static Experiment from_json(const nlohmann::json& j, const std::string& base_dir = "");
};

struct ResultRow {
  std::string exp_id;
  std::string deployer;
  std::string fn;
  std::size_t n_dims = 0;
  std::string grid;
  std::uint64_t budget = 0;
  std::uint64_t batch = 0;
  double sr = 0.0;
  std::string mode;
  std::string scorer;
  std::string retrain;
  double w_error = 0.0, w_size = 0.0, w_cost = 0.0;
  std::uint64_t seed = 0;
  double mse = 0.0, mae = 0.0;
  double wall_ms = 0.0;
  std::string error;  // per-run failure, row kept so the sweep continues
};

extern const char* const kResultsCsvHeader;
void write_result_row(std::ostream& out, const ResultRow& row);

/// Cross product of the configured axes times repetitions. Rows are emitted
/// to `sink` (when given) incrementally in deterministic order.
std::vector<ResultRow> sweep(const Experiment& exp, std::ostream* sink = nullptr,
                             int parallelism = 1);

double median(std::vector<double> values);

}  // namespace dta
