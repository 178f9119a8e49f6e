#include "dta/profiler.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dta {

namespace {

// RNG stream tags: one sub-stream family per concern, mixed with the
// iteration index where the concern repeats per iteration.
constexpr std::uint64_t kStreamSample = 1;
constexpr std::uint64_t kStreamTree = 2;
constexpr std::uint64_t kStreamCv = 3;
constexpr std::uint64_t kStreamFinal = 4;

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kTree: return "tree";
    case ModelKind::kGlobalOls: return "global-ols";
    case ModelKind::kBaggedLinear: return "bagged-linear";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "tree") return ModelKind::kTree;
  if (s == "global-ols") return ModelKind::kGlobalOls;
  if (s == "bagged-linear") return ModelKind::kBaggedLinear;
  throw std::invalid_argument("unknown model kind: " + s);
}

double FinalModel::predict(const Point& p) const {
  switch (kind) {
    case ModelKind::kTree: return tree->predict(p);
    case ModelKind::kGlobalOls: return ols->predict(p);
    case ModelKind::kBaggedLinear: {
      double acc = 0.0;
      for (const LinearModel& m : bag) acc += m.predict(p);
      return acc / static_cast<double>(bag.size());
    }
  }
  throw std::logic_error("FinalModel::predict: bad kind");
}

nlohmann::json FinalModel::to_json(const DeploymentSpace* space) const {
  nlohmann::json j{{"kind", to_string(kind)}};
  switch (kind) {
    case ModelKind::kTree:
      j["tree"] = tree->to_json(space);
      break;
    case ModelKind::kGlobalOls:
      j["coeffs"] = ols->coeffs;
      j["intercept"] = ols->intercept;
      break;
    case ModelKind::kBaggedLinear: {
      nlohmann::json models = nlohmann::json::array();
      for (const LinearModel& m : bag)
        models.push_back({{"coeffs", m.coeffs}, {"intercept", m.intercept}});
      j["models"] = std::move(models);
      break;
    }
  }
  if (space) j["space"] = space->to_json();
  return j;
}

FinalModel FinalModel::from_json(const nlohmann::json& j) {
  FinalModel m;
  m.kind = model_kind_from_string(j.at("kind").get<std::string>());
  switch (m.kind) {
    case ModelKind::kTree:
      m.tree = ObliqueTree::from_json(j.at("tree"));
      break;
    case ModelKind::kGlobalOls: {
      LinearModel lm;
      lm.coeffs = j.at("coeffs").get<std::vector<double>>();
      lm.intercept = j.at("intercept").get<double>();
      m.ols = std::move(lm);
      break;
    }
    case ModelKind::kBaggedLinear:
      for (const auto& mj : j.at("models")) {
        LinearModel lm;
        lm.coeffs = mj.at("coeffs").get<std::vector<double>>();
        lm.intercept = mj.at("intercept").get<double>();
        m.bag.push_back(std::move(lm));
      }
      break;
  }
  return m;
}

// ---------------------------------------------------------------------------
// RunLog serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json scores_to_json(const std::vector<LeafScore>& scores) {
  nlohmann::json arr = nlohmann::json::array();
  for (const LeafScore& s : scores)
    arr.push_back({{"leaf_id", s.leaf_id},
                   {"error", s.error},
                   {"size", s.size},
                   {"cost", s.cost},
                   {"score", s.score},
                   {"allocation", s.allocation}});
  return arr;
}

std::vector<LeafScore> scores_from_json(const nlohmann::json& arr) {
  std::vector<LeafScore> out;
  for (const auto& j : arr) {
    LeafScore s;
    s.leaf_id = j.at("leaf_id").get<int>();
    s.error = j.at("error").get<double>();
    s.size = j.at("size").get<std::uint64_t>();
    s.cost = j.at("cost").get<double>();
    s.score = j.at("score").get<double>();
    s.allocation = j.at("allocation").get<std::uint64_t>();
    out.push_back(s);
  }
  return out;
}

}  // namespace

nlohmann::json RunLog::header() const {
  return {{"type", "header"}, {"config", config_echo}, {"space", space_echo}};
}

std::string RunLog::to_jsonl(bool include_timing) const {
  std::ostringstream out;
  out << header().dump() << '\n';
  for (const IterationRecord& rec : iterations) {
    nlohmann::json j{{"type", "iteration"},
                     {"iteration", rec.iteration},
                     {"scores", scores_to_json(rec.scores)},
                     {"drawn", rec.drawn},
                     {"outputs", rec.outputs}};
    nlohmann::json fails = nlohmann::json::array();
    for (const auto& [p, why] : rec.failures) fails.push_back({{"point", p}, {"error", why}});
    j["failures"] = std::move(fails);
    if (include_timing) j["wall_ms"] = rec.wall_ms;
    out << j.dump() << '\n';
  }
  nlohmann::json s{{"type", "summary"},
                   {"chosen_kind", summary.chosen_kind},
                   {"candidate_cv", summary.candidate_cv},
                   {"total_samples", summary.total_samples}};
  if (!summary.note.empty()) s["note"] = summary.note;
  if (include_timing) s["wall_ms"] = summary.wall_ms;
  out << s.dump() << '\n';
  return out.str();
}

void RunLog::write(const std::string& path, bool include_timing) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write run log: " + path);
  out << to_jsonl(include_timing);
}

RunLog RunLog::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open run log: " + path);
  RunLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "header") {
      log.config_echo = j.at("config");
      log.space_echo = j.at("space");
    } else if (type == "iteration") {
      IterationRecord rec;
      rec.iteration = j.at("iteration").get<int>();
      rec.scores = scores_from_json(j.at("scores"));
      rec.drawn = j.at("drawn").get<std::vector<Point>>();
      rec.outputs = j.at("outputs").get<std::vector<double>>();
      rec.wall_ms = j.value("wall_ms", 0.0);
      for (const auto& f : j.at("failures"))
        rec.failures.emplace_back(f.at("point").get<Point>(), f.at("error").get<std::string>());
      log.iterations.push_back(std::move(rec));
    } else if (type == "summary") {
      log.summary.chosen_kind = j.at("chosen_kind").get<std::string>();
      log.summary.candidate_cv =
          j.at("candidate_cv").get<std::vector<std::pair<std::string, double>>>();
      log.summary.total_samples = j.at("total_samples").get<std::uint64_t>();
      log.summary.wall_ms = j.value("wall_ms", 0.0);
      log.summary.note = j.value("note", std::string{});
    }
  }
  return log;
}

// ---------------------------------------------------------------------------
// Final model selection
// ---------------------------------------------------------------------------

namespace {

std::vector<LinearModel> fit_bagged(const std::vector<LabeledSample>& train, int members,
                                    Rng& rng) {
  std::vector<LinearModel> bag;
  bag.reserve(members);
  std::vector<LabeledSample> boot(train.size());
  for (int m = 0; m < members; ++m) {
    for (std::size_t i = 0; i < train.size(); ++i)
      boot[i] = train[static_cast<std::size_t>(rng.below(train.size()))];
    bag.push_back(fit_ols(boot));
  }
  return bag;
}

FinalModel fit_candidate(ModelKind kind, const std::vector<LabeledSample>& train,
                         const TreeConfig& tree_cfg, const AnnealSchedule& sched, int folds,
                         int bagged_members, std::uint64_t seed) {
  FinalModel m;
  m.kind = kind;
  switch (kind) {
    case ModelKind::kTree: {
      ObliqueTree t = rebuild_from_scratch(train, tree_cfg, sched, Rng::mix(seed, 1));
      fit_leaf_models(t, folds, Rng::mix(seed, 2));
      m.tree = std::move(t);
      break;
    }
    case ModelKind::kGlobalOls:
      m.ols = fit_ols(train);
      break;
    case ModelKind::kBaggedLinear: {
      Rng rng(Rng::mix(seed, 3));
      m.bag = fit_bagged(train, bagged_members, rng);
      break;
    }
  }
  return m;
}

}  // namespace

FinalModel select_final_model(const std::vector<LabeledSample>& samples,
                              const std::vector<ModelKind>& pool, int folds, std::uint64_t seed,
                              const TreeConfig& tree_cfg, const AnnealSchedule& sched,
                              int bagged_members,
                              std::vector<std::pair<std::string, double>>* cv_report) {
  if (pool.empty()) throw std::invalid_argument("select_final_model: empty candidate pool");
  if (samples.size() < 2)
    throw std::invalid_argument("select_final_model: need at least 2 samples");

  const std::size_t m = samples.size();
  const std::size_t k = std::min<std::size_t>(std::max(folds, 2), m);
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  Rng fold_rng(Rng::mix(seed, 101));
  fold_rng.shuffle(order);

  double best_cv = 0.0;
  std::size_t best_idx = 0;
  for (std::size_t c = 0; c < pool.size(); ++c) {
    std::vector<double> sq;
    sq.reserve(m);
    std::size_t start = 0;
    for (std::size_t f = 0; f < k; ++f) {
      const std::size_t size = m / k + (f < m % k ? 1 : 0);
      const std::size_t end = start + size;
      std::vector<LabeledSample> train;
      train.reserve(m - size);
      for (std::size_t i = 0; i < m; ++i)
        if (i < start || i >= end) train.push_back(samples[order[i]]);
      const FinalModel cand = fit_candidate(pool[c], train, tree_cfg, sched, folds, bagged_members,
                                            Rng::mix(Rng::mix(seed, 1000 + c), f));
      for (std::size_t i = start; i < end; ++i) {
        const LabeledSample& s = samples[order[i]];
        const double r = s.output - cand.predict(s.input);
        sq.push_back(r * r);
      }
      start = end;
    }
    const double cv = stable_sum(sq) / static_cast<double>(m);
    if (cv_report) cv_report->emplace_back(to_string(pool[c]), cv);
    if (c == 0 || cv < best_cv) {
      best_cv = cv;
      best_idx = c;
    }
  }

  return fit_candidate(pool[best_idx], samples, tree_cfg, sched, folds, bagged_members,
                       Rng::mix(seed, 2000 + best_idx));
}

// ---------------------------------------------------------------------------
// The profiling loop
// ---------------------------------------------------------------------------

namespace {

struct DeployOutcome {
  Point point;
  DeployResult result;
};

std::vector<DeployOutcome> deploy_batch(Deployer& deployer, const std::vector<Point>& points,
                                        int parallelism) {
  std::vector<DeployOutcome> out(points.size());
  const int workers = std::max(1, parallelism);
  if (workers > 1 && deployer.concurrent_safe() && points.size() > 1) {
    std::vector<std::future<void>> futures;
    const std::size_t chunk = (points.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(points.size(), lo + chunk);
      if (lo >= hi) break;
      futures.push_back(std::async(std::launch::async, [&, lo, hi] {
        for (std::size_t i = lo; i < hi; ++i) out[i] = {points[i], deployer.evaluate(points[i])};
      }));
    }
    for (auto& f : futures) f.get();
  } else {
    for (std::size_t i = 0; i < points.size(); ++i)
      out[i] = {points[i], deployer.evaluate(points[i])};
  }
  // One retry per failed point, then it is dropped.
  for (DeployOutcome& o : out)
    if (!o.result.ok()) o.result = deployer.evaluate(o.point);
  std::sort(out.begin(), out.end(), [](const DeployOutcome& a, const DeployOutcome& b) {
    return a.point < b.point;
  });
  return out;
}

nlohmann::json config_echo_json(const DeploymentSpace& space, const ProfilerConfig& cfg) {
  nlohmann::json pool = nlohmann::json::array();
  for (ModelKind k : cfg.final_pool) pool.push_back(to_string(k));
  nlohmann::json j{
      {"budget_B", cfg.budget},
      {"batch_b", cfg.batch},
      {"weights",
       {{"w_error", cfg.weights.w_error},
        {"w_size", cfg.weights.w_size},
        {"w_cost", cfg.weights.w_cost}}},
      {"mode", cfg.tree.mode == TreeMode::kFlat ? "flat" : "oblique"},
      {"scorer",
       cfg.tree.scorer == SplitScorerKind::kVarianceReduction ? "variance_reduction"
                                                              : "regression"},
      {"min_leaf_samples", cfg.tree.min_leaf_samples},
      {"min_split_gain", cfg.tree.min_split_gain},
      {"sa", {{"max_iters", cfg.sa.max_iters},
              {"initial_temp", cfg.sa.initial_temp},
              {"cooling_rate", cfg.sa.cooling_rate}}},
      {"retrain", cfg.retrain == Retrain::kOffline ? "offline" : "online"},
      {"seed", cfg.seed},
      {"cv_folds", cfg.cv_folds},
      {"final_model_pool", std::move(pool)},
      {"parallelism", cfg.parallelism}};
  if (cfg.cost_model) j["cost_model"] = cfg.cost_model->to_json(space);
  return j;
}

}  // namespace

RunResult run(const DeploymentSpace& space, Deployer& deployer, const ProfilerConfig& cfg) {
  if (cfg.budget == 0) throw std::invalid_argument("run: budget_B must be positive");
  if (cfg.batch == 0 || cfg.batch > cfg.budget)
    throw std::invalid_argument("run: batch_b must be in [1, budget_B]");
  if (!(cfg.weights.w_error + cfg.weights.w_size > 0.0))
    throw std::invalid_argument("run: w_error + w_size must be positive");

  const auto run_start = std::chrono::steady_clock::now();
  const std::uint64_t target = std::min(cfg.budget, space.cardinality());

  RunLog log;
  log.config_echo = config_echo_json(space, cfg);
  log.space_echo = space.to_json();

  std::vector<LabeledSample> samples;
  samples.reserve(target);
  SampledSet sampled;
  ObliqueTree tree = ObliqueTree::single_root({});
  std::uint64_t carry = 0;
  int iter = 0;

  while (samples.size() < target) {
    const auto iter_start = std::chrono::steady_clock::now();
    const std::uint64_t remaining = target - samples.size();
    const std::uint64_t available = space.cardinality() - sampled.size();
    if (available == 0) {
      log.summary.note = "space exhausted before budget";
      break;
    }
    const std::uint64_t b_iter = std::min({cfg.batch + carry, remaining, available});
    carry = 0;

    IterationRecord rec;
    rec.iteration = iter;
    std::vector<Point> batch;
    Rng draw_rng(Rng::mix(Rng::mix(cfg.seed, kStreamSample), static_cast<std::uint64_t>(iter)));

    if (iter == 0) {
      // Bootstrap: no models exist yet, the root is treated as the
      // maximum-error leaf and sampled uniformly.
      batch = draw(space, Region{}, b_iter, sampled, draw_rng);
      LeafScore root_score;
      root_score.leaf_id = 0;
      root_score.size = available;
      root_score.score = 1.0;
      root_score.allocation = b_iter;
      rec.scores.push_back(root_score);
    } else {
      const std::uint64_t stage_seed =
          Rng::mix(Rng::mix(cfg.seed, kStreamTree), static_cast<std::uint64_t>(iter));
      if (cfg.retrain == Retrain::kOffline)
        tree = rebuild_from_scratch(samples, cfg.tree, cfg.sa, stage_seed);
      else
        tree = expand_tree(tree, cfg.tree, cfg.sa, stage_seed);
      fit_leaf_models(tree, cfg.cv_folds,
                      Rng::mix(Rng::mix(cfg.seed, kStreamCv), static_cast<std::uint64_t>(iter)));

      rec.scores = score_leaves(tree, space, cfg.weights,
                                cfg.cost_model ? &*cfg.cost_model : nullptr, sampled);
      allocate(rec.scores, b_iter);

      std::map<int, const ObliqueTree::LeafNode*> leaves;
      tree.for_each_leaf([&](const ObliqueTree::LeafNode& l) { leaves[l.id] = &l; });
      std::vector<const LeafScore*> order;
      for (const LeafScore& s : rec.scores) order.push_back(&s);
      std::stable_sort(order.begin(), order.end(), [](const LeafScore* a, const LeafScore* b) {
        if (a->score != b->score) return a->score > b->score;
        return a->leaf_id < b->leaf_id;
      });
      for (const LeafScore* s : order) {
        if (s->allocation == 0) continue;
        const auto pts = draw(space, leaves.at(s->leaf_id)->region, s->allocation, sampled,
                              draw_rng);
        for (const Point& p : pts) batch.push_back(p);
      }
    }

    const auto outcomes = deploy_batch(deployer, batch, cfg.parallelism);
    for (const DeployOutcome& o : outcomes) {
      sampled.insert(space.rank_of(o.point));
      if (o.result.ok()) {
        const LabeledSample s{o.point, *o.result.value};
        samples.push_back(s);
        if (cfg.retrain == Retrain::kOnline) tree.insert_sample(s);
        rec.drawn.push_back(o.point);
        rec.outputs.push_back(*o.result.value);
      } else {
        rec.failures.emplace_back(
            o.point, std::string(to_string(o.result.failure->kind)) + ": " +
                         o.result.failure->message);
        ++carry;
      }
    }

    rec.wall_ms = elapsed_ms(iter_start);
    log.iterations.push_back(std::move(rec));
    ++iter;
  }

  RunResult result{FinalModel{}, std::move(log), std::move(samples)};
  result.model = select_final_model(result.samples, cfg.final_pool, cfg.cv_folds,
                                    Rng::mix(cfg.seed, kStreamFinal), cfg.tree, cfg.sa,
                                    cfg.bagged_members, &result.log.summary.candidate_cv);
  result.log.summary.chosen_kind = to_string(result.model.kind);
  result.log.summary.total_samples = result.samples.size();
  result.log.summary.wall_ms = elapsed_ms(run_start);
  return result;
}

}  // namespace dta
