#include "dta/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dta/linmodel.hpp"
#include "dta/rng.hpp"
#include "dta/sampler.hpp"

namespace dta {

namespace {

// Mirrors the profiler's RNG stream derivation (locked by the B=b
// degeneration-equivalence test).
constexpr std::uint64_t kStreamSample = 1;
constexpr std::uint64_t kStreamFinal = 4;

}  // namespace

std::unique_ptr<Deployer> make_deployer(const DeploymentSpace& space, const nlohmann::json& spec) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "synthetic") {
    const auto& s = spec.at("synthetic");
    const SyntheticKind fk = synthetic_kind_from_string(s.at("kind").get<std::string>());
    SyntheticFunction fn;
    if (s.contains("coeffs"))
      fn = SyntheticFunction::with_coeffs(fk, s.at("coeffs").get<std::vector<double>>());
    else
      fn = SyntheticFunction::generate(fk, space.num_dims(), s.value("seed", 0ULL));
    return std::make_unique<SyntheticDeployer>(space, std::move(fn));
  }
  if (kind == "replay") {
    return std::make_unique<GridReplay>(
        GridReplay::load(spec.at("replay").at("path").get<std::string>(), space));
  }
  if (kind == "command") {
    const auto& c = spec.at("command");
    return std::make_unique<CommandDeployer>(space, c.at("template").get<std::string>(),
                                             c.value("timeout_secs", 60.0));
  }
  if (kind == "plane-bump") {
    const auto& b = spec.value("plane_bump", nlohmann::json::object());
    return std::make_unique<PlaneBumpDeployer>(space, b.value("seed", 0ULL),
                                               b.value("amplitude", 2.0), b.value("sigma", 0.05));
  }
  throw std::invalid_argument("unknown deployer kind: " + kind);
}

std::string deployer_label(const nlohmann::json& spec) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "synthetic") return spec.at("synthetic").at("kind").get<std::string>();
  return kind;
}

ProfilerConfig profiler_config_from_json(const DeploymentSpace& space, const nlohmann::json& j) {
  ProfilerConfig cfg;
  cfg.budget = j.at("budget_B").get<std::uint64_t>();
  cfg.batch = j.at("batch_b").get<std::uint64_t>();
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    cfg.weights.w_error = w.value("w_error", 1.0);
    cfg.weights.w_size = w.value("w_size", 0.5);
    cfg.weights.w_cost = w.value("w_cost", 0.0);
  }
  const std::string mode = j.value("mode", "oblique");
  if (mode == "flat")
    cfg.tree.mode = TreeMode::kFlat;
  else if (mode == "oblique")
    cfg.tree.mode = TreeMode::kOblique;
  else
    throw std::invalid_argument("config: mode must be 'flat' or 'oblique'");
  const std::string scorer = j.value("scorer", "regression");
  if (scorer == "variance_reduction")
    cfg.tree.scorer = SplitScorerKind::kVarianceReduction;
  else if (scorer == "regression")
    cfg.tree.scorer = SplitScorerKind::kRegression;
  else
    throw std::invalid_argument("config: scorer must be 'regression' or 'variance_reduction'");
  cfg.tree.min_leaf_samples = j.value("min_leaf_samples", 0ULL);
  cfg.tree.min_split_gain = j.value("min_split_gain", 0.01);
  if (j.contains("sa")) {
    const auto& sa = j.at("sa");
    cfg.sa.max_iters = sa.value("max_iters", 500);
    cfg.sa.initial_temp = sa.value("initial_temp", 1.0);
    cfg.sa.cooling_rate = sa.value("cooling_rate", 0.99);
  }
  const std::string retrain = j.value("retrain", "offline");
  if (retrain == "online")
    cfg.retrain = Retrain::kOnline;
  else if (retrain == "offline")
    cfg.retrain = Retrain::kOffline;
  else
    throw std::invalid_argument("config: retrain must be 'online' or 'offline'");
  cfg.seed = j.value("seed", 0ULL);
  cfg.cv_folds = j.value("cv_folds", 10);
  cfg.parallelism = j.value("parallelism", 1);
  cfg.bagged_members = j.value("bagged_members", 25);
  if (j.contains("final_model_pool")) {
    cfg.final_pool.clear();
    for (const auto& k : j.at("final_model_pool"))
      cfg.final_pool.push_back(model_kind_from_string(k.get<std::string>()));
    if (cfg.final_pool.empty())
      throw std::invalid_argument("config: final_model_pool must not be empty");
  }
  if (j.contains("cost_model")) cfg.cost_model = CostModel::from_json(space, j.at("cost_model"));
  return cfg;
}

DeploymentSpace space_from_config(const nlohmann::json& config, const std::string& base_dir) {
  if (config.contains("space")) return DeploymentSpace::from_json(config.at("space"));
  if (config.contains("space_file")) {
    std::string path = config.at("space_file").get<std::string>();
    if (!base_dir.empty() && !path.empty() && path[0] != '/') path = base_dir + "/" + path;
    return DeploymentSpace::load(path);
  }
  throw std::invalid_argument("config: needs 'space' or 'space_file'");
}

RunResult run_uni_baseline(const DeploymentSpace& space, Deployer& deployer, std::uint64_t budget,
                           const std::vector<ModelKind>& pool, int folds, std::uint64_t seed,
                           const TreeConfig& tree_cfg, const AnnealSchedule& sched,
                           int bagged_members, int parallelism) {
  if (budget == 0) throw std::invalid_argument("run_uni_baseline: budget must be positive");
  const std::uint64_t target = std::min(budget, space.cardinality());

  RunLog log;
  log.config_echo = {{"method", "uni"}, {"budget_B", budget}, {"seed", seed}};
  log.space_echo = space.to_json();

  SampledSet sampled;
  Rng rng(Rng::mix(Rng::mix(seed, kStreamSample), 0));
  const std::vector<Point> batch = draw(space, Region{}, target, sampled, rng);

  IterationRecord rec;
  rec.iteration = 0;
  std::vector<LabeledSample> samples;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::pair<Point, DeployResult>> outcomes(batch.size());
  const int workers = std::max(1, parallelism);
  if (workers > 1 && deployer.concurrent_safe() && batch.size() > 1) {
    std::vector<std::future<void>> futures;
    const std::size_t chunk = (batch.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk, hi = std::min(batch.size(), lo + chunk);
      if (lo >= hi) break;
      futures.push_back(std::async(std::launch::async, [&, lo, hi] {
        for (std::size_t i = lo; i < hi; ++i) outcomes[i] = {batch[i], deployer.evaluate(batch[i])};
      }));
    }
    for (auto& f : futures) f.get();
  } else {
    for (std::size_t i = 0; i < batch.size(); ++i)
      outcomes[i] = {batch[i], deployer.evaluate(batch[i])};
  }
  for (auto& [p, r] : outcomes)
    if (!r.ok()) r = deployer.evaluate(p);  // one retry
  std::sort(outcomes.begin(), outcomes.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [p, r] : outcomes) {
    if (r.ok()) {
      samples.push_back({p, *r.value});
      rec.drawn.push_back(p);
      rec.outputs.push_back(*r.value);
    } else {
      rec.failures.emplace_back(p, std::string(to_string(r.failure->kind)) + ": " +
                                       r.failure->message);
    }
  }
  rec.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  log.iterations.push_back(std::move(rec));

  RunResult result{FinalModel{}, std::move(log), std::move(samples)};
  result.model =
      select_final_model(result.samples, pool, folds, Rng::mix(seed, kStreamFinal), tree_cfg,
                         sched, bagged_members, &result.log.summary.candidate_cv);
  result.log.summary.chosen_kind = to_string(result.model.kind);
  result.log.summary.total_samples = result.samples.size();
  result.log.summary.wall_ms = rec.wall_ms;
  return result;
}

std::pair<double, double> evaluate_full_grid(const std::function<double(const Point&)>& predict,
                                             const DeploymentSpace& space, Deployer& deployer) {
  if (!deployer.deterministic())
    throw std::invalid_argument("evaluate_full_grid: deployer must be deterministic");
  std::vector<double> pred, actual;
  pred.reserve(space.cardinality());
  actual.reserve(space.cardinality());
  space.for_each_point([&](const Point& p, std::uint64_t) {
    const DeployResult r = deployer.evaluate(p);
    if (!r.ok())
      throw std::runtime_error(std::string("evaluate_full_grid: deployment failed: ") +
                               r.failure->message);
    pred.push_back(predict(p));
    actual.push_back(*r.value);
  });
  return {mse(pred, actual), mae(pred, actual)};
}

std::vector<Point> abnormality_testset(const SyntheticDeployer& deployer,
                                       const DeploymentSpace& space, double eps, TestsetMode mode,
                                       std::uint64_t seed) {
  const SyntheticFunction& fn = deployer.function();
  if (fn.kind != SyntheticKind::kExpAbs && fn.kind != SyntheticKind::kWave)
    throw std::invalid_argument("abnormality_testset: function has no f1=0 ridge (need EXPABS or WAVE)");
  double norm2 = 0.0;
  for (double a : fn.coeffs) norm2 += a * a;
  const double norm = std::sqrt(norm2);

  std::vector<Point> all, near, far;
  double min_dist = std::numeric_limits<double>::infinity();
  space.for_each_point([&](const Point& p, std::uint64_t) {
    const double d = std::abs(fn.f1(deployer.scale_point(p))) / norm;
    min_dist = std::min(min_dist, d);
    if (mode == TestsetMode::kAll) {
      all.push_back(p);
      return;
    }
    if (d < eps)
      near.push_back(p);
    else if (mode == TestsetMode::kMix)
      far.push_back(p);
  });
  if (mode == TestsetMode::kAll) return all;
  if (near.empty()) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", min_dist);
    throw std::runtime_error(
        std::string("abnormality_testset: no grid point within eps; minimum attainable distance is ") +
        buf);
  }
  if (mode == TestsetMode::kAbn) return near;

  // MIX: all near points plus an equal number of far points.
  Rng rng(Rng::mix(seed, 77));
  std::vector<Point> out = near;
  const std::size_t want = std::min(far.size(), near.size());
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(far.size() - i));
    std::swap(far[i], far[j]);
    out.push_back(far[i]);
  }
  return out;
}

double testset_mse(const std::function<double(const Point&)>& predict,
                   const std::vector<Point>& points, Deployer& deployer) {
  if (points.empty()) throw std::invalid_argument("testset_mse: empty test set");
  std::vector<double> pred, actual;
  for (const Point& p : points) {
    const DeployResult r = deployer.evaluate(p);
    if (!r.ok()) throw std::runtime_error("testset_mse: deployment failed");
    pred.push_back(predict(p));
    actual.push_back(*r.value);
  }
  return mse(pred, actual);
}

std::vector<std::vector<std::uint64_t>> heatmap(const std::vector<Point>& points,
                                                const DeploymentSpace& space, int bins) {
  if (space.num_dims() < 2)
    throw std::invalid_argument("heatmap: needs at least two dimensions");
  if (bins <= 0) throw std::invalid_argument("heatmap: bins must be positive");
  std::vector<std::vector<std::uint64_t>> matrix(bins, std::vector<std::uint64_t>(bins, 0));
  const auto bin_of = [&](double v, std::size_t dim) {
    const auto& lv = space.dim(dim).levels;
    const double lo = lv.front(), hi = lv.back();
    if (hi <= lo) return 0;
    const int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    return std::max(0, std::min(bins - 1, b));
  };
  for (const Point& p : points) ++matrix[bin_of(p[0], 0)][bin_of(p[1], 1)];
  return matrix;
}

void write_heatmap_csv(const std::vector<std::vector<std::uint64_t>>& matrix, std::ostream& out) {
  for (const auto& row : matrix) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

std::vector<DimCorrelation> correlation_report(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("correlate: cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("correlate: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) names.push_back(field);
  }
  if (names.size() < 2 || names.back() != "metric")
    throw std::runtime_error("correlate: header must end with 'metric'");
  names.pop_back();

  std::vector<std::vector<double>> cols(names.size());
  std::vector<double> metric;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::size_t i = 0;
    double last = 0.0;
    while (std::getline(ss, field, ',')) {
      const double v = std::strtod(field.c_str(), nullptr);
      if (i < names.size())
        cols[i].push_back(v);
      else
        last = v;
      ++i;
    }
    if (i != names.size() + 1) throw std::runtime_error("correlate: ragged row");
    metric.push_back(last);
  }
  if (metric.empty()) throw std::runtime_error("correlate: no data rows");

  const double my = stable_sum(metric) / metric.size();
  std::vector<double> dy(metric.size());
  for (std::size_t i = 0; i < metric.size(); ++i) dy[i] = metric[i] - my;
  std::vector<double> dy2(metric.size());
  for (std::size_t i = 0; i < metric.size(); ++i) dy2[i] = dy[i] * dy[i];
  const double sy = std::sqrt(stable_sum(dy2));

  std::vector<DimCorrelation> out;
  for (std::size_t d = 0; d < names.size(); ++d) {
    DimCorrelation c;
    c.name = names[d];
    const double mx = stable_sum(cols[d]) / cols[d].size();
    std::vector<double> dx2(cols[d].size()), dxy(cols[d].size());
    for (std::size_t i = 0; i < cols[d].size(); ++i) {
      const double dx = cols[d][i] - mx;
      dx2[i] = dx * dx;
      dxy[i] = dx * dy[i];
    }
    const double sx = std::sqrt(stable_sum(dx2));
    if (sx == 0.0 || sy == 0.0) {
      c.r = 0.0;
      c.zero_variance = true;
    } else {
      c.r = stable_sum(dxy) / (sx * sy);
    }
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

Experiment::Experiment(DeploymentSpace s, nlohmann::json deployer, ProfilerConfig base_cfg)
    : space(std::move(s)), deployer_spec(std::move(deployer)), base(std::move(base_cfg)) {
  ratios = {1};
  methods = {"dta"};
}

Experiment Experiment::from_json(const nlohmann::json& j, const std::string& base_dir) {
  DeploymentSpace space = space_from_config(j, base_dir);
  nlohmann::json base_cfg = j.value("base", nlohmann::json::object());
  if (!base_cfg.contains("budget_B")) base_cfg["budget_B"] = 1;
  if (!base_cfg.contains("batch_b")) base_cfg["batch_b"] = 1;
  Experiment exp(std::move(space), j.at("deployer"), ProfilerConfig{});
  exp.base = profiler_config_from_json(exp.space, base_cfg);

  const auto axes = j.value("axes", nlohmann::json::object());
  if (axes.contains("SR")) exp.sampling_rates = axes.at("SR").get<std::vector<double>>();
  if (axes.contains("B")) exp.budgets = axes.at("B").get<std::vector<std::uint64_t>>();
  if (axes.contains("ratio")) exp.ratios = axes.at("ratio").get<std::vector<std::uint64_t>>();
  if (axes.contains("w_cost")) exp.w_costs = axes.at("w_cost").get<std::vector<double>>();
  if (axes.contains("mode")) {
    exp.modes.clear();
    for (const auto& m : axes.at("mode"))
      exp.modes.push_back(m.get<std::string>() == "flat" ? TreeMode::kFlat : TreeMode::kOblique);
  }
  if (axes.contains("scorer")) {
    exp.scorers.clear();
    for (const auto& s : axes.at("scorer"))
      exp.scorers.push_back(s.get<std::string>() == "variance_reduction"
                                ? SplitScorerKind::kVarianceReduction
                                : SplitScorerKind::kRegression);
  }
  if (axes.contains("retrain")) {
    exp.retrains.clear();
    for (const auto& r : axes.at("retrain"))
      exp.retrains.push_back(r.get<std::string>() == "online" ? Retrain::kOnline
                                                              : Retrain::kOffline);
  }
  if (axes.contains("method")) exp.methods = axes.at("method").get<std::vector<std::string>>();
  exp.repetitions = j.value("repetitions", 20);
  exp.base_seed = j.value("base_seed", 1ULL);
  return exp;
}

const char* const kResultsCsvHeader =
    "exp_id,deployer,fn,n_dims,grid,B,b,SR,mode,scorer,retrain,w_error,w_size,w_cost,seed,mse,"
    "mae,wall_ms";

void write_result_row(std::ostream& out, const ResultRow& row) {
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << row.exp_id << ',' << row.deployer << ',' << row.fn << ',' << row.n_dims << ','
      << row.grid << ',' << row.budget << ',' << row.batch << ',' << num(row.sr) << ','
      << row.mode << ',' << row.scorer << ',' << row.retrain << ',' << num(row.w_error) << ','
      << num(row.w_size) << ',' << num(row.w_cost) << ',' << row.seed << ','
      << (row.error.empty() ? num(row.mse) : "nan") << ','
      << (row.error.empty() ? num(row.mae) : "nan") << ',' << num(row.wall_ms) << '\n';
}

namespace {

std::string grid_label(const DeploymentSpace& space) {
  std::string s;
  for (std::size_t i = 0; i < space.num_dims(); ++i) {
    if (i) s += 'x';
    s += std::to_string(space.dim(i).levels.size());
  }
  return s;
}

struct SweepCase {
  ProfilerConfig cfg;
  std::string method;
  std::uint64_t budget;
  std::uint64_t batch;
  double sr;
  std::uint64_t seed;
  std::string exp_id;
};

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<ResultRow> sweep(const Experiment& exp, std::ostream* sink, int parallelism) {
  // Materialize the case list first so rows come out in deterministic order.
  std::vector<std::uint64_t> budgets = exp.budgets;
  if (budgets.empty()) {
    for (double sr : exp.sampling_rates) {
      const double raw = sr * static_cast<double>(exp.space.cardinality());
      budgets.push_back(std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(raw))));
    }
  }
  if (budgets.empty()) budgets.push_back(exp.base.budget);

  const std::vector<double> w_costs = exp.w_costs.empty()
                                          ? std::vector<double>{exp.base.weights.w_cost}
                                          : exp.w_costs;
  const std::vector<TreeMode> modes =
      exp.modes.empty() ? std::vector<TreeMode>{exp.base.tree.mode} : exp.modes;
  const std::vector<SplitScorerKind> scorers =
      exp.scorers.empty() ? std::vector<SplitScorerKind>{exp.base.tree.scorer} : exp.scorers;
  const std::vector<Retrain> retrains =
      exp.retrains.empty() ? std::vector<Retrain>{exp.base.retrain} : exp.retrains;

  std::vector<SweepCase> cases;
  int case_no = 0;
  for (std::uint64_t B : budgets)
    for (std::uint64_t ratio : exp.ratios)
      for (double wc : w_costs)
        for (TreeMode mode : modes)
          for (SplitScorerKind scorer : scorers)
            for (Retrain retrain : retrains)
              for (const std::string& method : exp.methods)
                for (int rep = 0; rep < exp.repetitions; ++rep) {
                  SweepCase c;
                  c.cfg = exp.base;
                  c.cfg.budget = B;
                  c.cfg.batch = std::max<std::uint64_t>(
                      1, static_cast<std::uint64_t>(std::llround(
                             static_cast<double>(B) / static_cast<double>(std::max<std::uint64_t>(1, ratio)))));
                  c.cfg.batch = std::min(c.cfg.batch, B);
                  c.cfg.weights.w_cost = wc;
                  c.cfg.tree.mode = mode;
                  c.cfg.tree.scorer = scorer;
                  c.cfg.retrain = retrain;
                  c.cfg.seed = Rng::mix(exp.base_seed, static_cast<std::uint64_t>(rep));
                  c.method = method;
                  c.budget = B;
                  c.batch = c.cfg.batch;
                  c.sr = static_cast<double>(B) / static_cast<double>(exp.space.cardinality());
                  c.seed = c.cfg.seed;
                  c.exp_id = method + "-" + std::to_string(case_no / exp.repetitions) + "-r" +
                             std::to_string(rep);
                  cases.push_back(std::move(c));
                  ++case_no;
                }

  std::vector<ResultRow> rows(cases.size());
  const auto run_case = [&](std::size_t i) {
    const SweepCase& c = cases[i];
    ResultRow row;
    row.exp_id = c.exp_id;
    row.deployer = exp.deployer_spec.at("kind").get<std::string>();
    row.fn = deployer_label(exp.deployer_spec);
    row.n_dims = exp.space.num_dims();
    row.grid = grid_label(exp.space);
    row.budget = c.budget;
    row.batch = c.batch;
    row.sr = c.sr;
    row.mode = c.cfg.tree.mode == TreeMode::kFlat ? "flat" : "oblique";
    row.scorer = c.cfg.tree.scorer == SplitScorerKind::kVarianceReduction ? "variance_reduction"
                                                                          : "regression";
    row.retrain = c.cfg.retrain == Retrain::kOnline ? "online" : "offline";
    row.w_error = c.cfg.weights.w_error;
    row.w_size = c.cfg.weights.w_size;
    row.w_cost = c.cfg.weights.w_cost;
    row.seed = c.seed;
    try {
      const auto deployer = make_deployer(exp.space, exp.deployer_spec);
      const auto t0 = std::chrono::steady_clock::now();
      RunResult result =
          c.method == "uni"
              ? run_uni_baseline(exp.space, *deployer, c.budget, c.cfg.final_pool, c.cfg.cv_folds,
                                 c.cfg.seed, c.cfg.tree, c.cfg.sa, c.cfg.bagged_members)
              : run(exp.space, *deployer, c.cfg);
      const auto truth = make_deployer(exp.space, exp.deployer_spec);
      const auto [m, a] = evaluate_full_grid(
          [&](const Point& p) { return result.model.predict(p); }, exp.space, *truth);
      row.mse = m;
      row.mae = a;
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                        .count();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows[i] = std::move(row);
  };

  const int workers = std::max(1, parallelism);
  if (workers == 1) {
    for (std::size_t i = 0; i < cases.size(); ++i) {
      run_case(i);
      if (sink) write_result_row(*sink, rows[i]);
    }
  } else {
    std::size_t next_write = 0;
    for (std::size_t base = 0; base < cases.size(); base += workers) {
      std::vector<std::future<void>> futures;
      for (std::size_t i = base; i < std::min(cases.size(), base + workers); ++i)
        futures.push_back(std::async(std::launch::async, run_case, i));
      for (auto& f : futures) f.get();
      if (sink)
        for (; next_write < std::min(cases.size(), base + workers); ++next_write)
          write_result_row(*sink, rows[next_write]);
    }
  }
  return rows;
}

}  // namespace dta
