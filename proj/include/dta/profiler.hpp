#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dta/anneal.hpp"
#include "dta/deployers.hpp"
#include "dta/obtree.hpp"
#include "dta/sampler.hpp"
#include "dta/space.hpp"

namespace dta {

enum class Retrain { kOffline, kOnline };

enum class ModelKind { kTree, kGlobalOls, kBaggedLinear };

const char* to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct ProfilerConfig {
  std::uint64_t budget = 0;  // B: total deployments
  std::uint64_t batch = 0;   // b: deployments per iteration
  Weights weights;
  TreeConfig tree;
  AnnealSchedule sa;
  Retrain retrain = Retrain::kOffline;
  std::uint64_t seed = 0;
  std::vector<ModelKind> final_pool = {ModelKind::kTree, ModelKind::kGlobalOls,
                                       ModelKind::kBaggedLinear};
  int cv_folds = 10;
  std::optional<CostModel> cost_model;
  int parallelism = 1;
  int bagged_members = 25;
};

/// The model handed back at the end of a profiling run: the tree rebuilt
/// from all samples, a global OLS fit, or a bagged-linear ensemble,
/// whichever won the cross-validation comparison.
struct FinalModel {
  ModelKind kind = ModelKind::kTree;
  std::optional<ObliqueTree> tree;
  std::optional<LinearModel> ols;
  std::vector<LinearModel> bag;

  double predict(const Point& p) const;

  nlohmann::json to_json(const DeploymentSpace* space = nullptr) const;
  static FinalModel from_json(const nlohmann::json& j);
};

struct IterationRecord {
  int iteration = 0;
  std::vector<LeafScore> scores;
  std::vector<Point> drawn;      // committed in lexicographic point order
  std::vector<double> outputs;   // aligned with drawn
  std::vector<std::pair<Point, std::string>> failures;
  double wall_ms = 0.0;
};

/// Reproducibility record of a run: config echo, one record per iteration,
/// final summary. Serialized as JSON-lines; timing fields can be excluded
/// to get the canonical (bit-reproducible) form.
struct RunLog {
  nlohmann::json header() const;
  nlohmann::json config_echo;
  nlohmann::json space_echo;
  std::vector<IterationRecord> iterations;

  struct Summary {
    std::string chosen_kind;
    std::vector<std::pair<std::string, double>> candidate_cv;
    std::uint64_t total_samples = 0;
    double wall_ms = 0.0;
    std::string note;
  } summary;

  std::string to_jsonl(bool include_timing = true) const;
  void write(const std::string& path, bool include_timing = true) const;
  static RunLog read(const std::string& path);
};

struct RunResult {
  FinalModel model;
  RunLog log;
  std::vector<LabeledSample> samples;
};

/// Trains every candidate in the pool on the samples, scores each with
/// k-fold CV (shared fold assignment), returns the argmin retrained on all
/// samples. Ties break by pool order.
FinalModel select_final_model(const std::vector<LabeledSample>& samples,
                              const std::vector<ModelKind>& pool, int folds, std::uint64_t seed,
                              const TreeConfig& tree_cfg, const AnnealSchedule& sched,
                              int bagged_members,
                              std::vector<std::pair<std::string, double>>* cv_report = nullptr);

/// The adaptive profiling loop: bootstrap batch, then iterate
/// (retrain -> score -> allocate -> draw -> deploy -> accumulate) until
/// exactly min(B, |D|) samples are collected, then select the final model.
RunResult run(const DeploymentSpace& space, Deployer& deployer, const ProfilerConfig& cfg);

}  // namespace dta
