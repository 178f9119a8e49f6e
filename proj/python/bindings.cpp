#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "dta/bench.hpp"

namespace py = pybind11;
using namespace dta;

namespace {

nlohmann::json json_from_pystr(const std::string& s) { return nlohmann::json::parse(s); }

DeploymentSpace space_from_dims(const std::vector<std::pair<std::string, std::vector<double>>>& dims) {
  std::vector<Dimension> out;
  for (const auto& [name, levels] : dims) out.push_back({name, levels});
  return DeploymentSpace(std::move(out));
}

}  // namespace

PYBIND11_MODULE(_dta, m) {
  m.doc() = "Adaptive black-box performance profiling with oblique regression trees";

  py::class_<DeploymentSpace>(m, "DeploymentSpace")
      .def(py::init(&space_from_dims), py::arg("dimensions"),
           "Build from [(name, [levels...]), ...]")
      .def_static("from_json", [](const std::string& s) {
        return DeploymentSpace::from_json(json_from_pystr(s));
      })
      .def_static("load", &DeploymentSpace::load)
      .def("save", &DeploymentSpace::save)
      .def_property_readonly("cardinality", &DeploymentSpace::cardinality)
      .def_property_readonly("num_dims", &DeploymentSpace::num_dims)
      .def("dimension_names",
           [](const DeploymentSpace& s) {
             std::vector<std::string> names;
             for (const auto& d : s.dims()) names.push_back(d.name);
             return names;
           })
      .def("point_at", &DeploymentSpace::point_at)
      .def("rank_of", &DeploymentSpace::rank_of)
      .def("to_json", [](const DeploymentSpace& s) { return s.to_json().dump(); });

  py::class_<Deployer, std::shared_ptr<Deployer>>(m, "Deployer")
      .def("evaluate",
           [](Deployer& d, const Point& p) {
             const DeployResult r = d.evaluate(p);
             if (!r.ok())
               throw std::runtime_error(std::string(to_string(r.failure->kind)) + ": " +
                                        r.failure->message);
             return *r.value;
           })
      .def_property_readonly("deterministic", &Deployer::deterministic);

  m.def(
      "make_deployer",
      [](const DeploymentSpace& space, const std::string& spec_json) {
        return std::shared_ptr<Deployer>(make_deployer(space, json_from_pystr(spec_json)));
      },
      py::arg("space"), py::arg("spec_json"),
      "Build a deployer from its JSON spec (synthetic | replay | command | plane-bump)");

  py::class_<FinalModel>(m, "FinalModel")
      .def("predict", &FinalModel::predict)
      .def_property_readonly("kind", [](const FinalModel& m) { return to_string(m.kind); })
      .def("to_json", [](const FinalModel& m) { return m.to_json().dump(); })
      .def_static("from_json",
                  [](const std::string& s) { return FinalModel::from_json(json_from_pystr(s)); });

  py::class_<RunResult>(m, "RunResult")
      .def_property_readonly("model", [](const RunResult& r) { return r.model; })
      .def_property_readonly("samples",
                             [](const RunResult& r) {
                               std::vector<std::pair<Point, double>> out;
                               for (const auto& s : r.samples) out.emplace_back(s.input, s.output);
                               return out;
                             })
      .def_property_readonly("chosen_kind",
                             [](const RunResult& r) { return r.log.summary.chosen_kind; })
      .def_property_readonly("candidate_cv",
                             [](const RunResult& r) { return r.log.summary.candidate_cv; })
      .def("log_jsonl", [](const RunResult& r, bool timing) { return r.log.to_jsonl(timing); },
           py::arg("include_timing") = true)
      .def("write_log", [](const RunResult& r, const std::string& path) { r.log.write(path); });

  m.def(
      "run_profile",
      [](const DeploymentSpace& space, const std::shared_ptr<Deployer>& deployer,
         const std::string& config_json) {
        const ProfilerConfig cfg =
            profiler_config_from_json(space, json_from_pystr(config_json));
        return run(space, *deployer, cfg);
      },
      py::arg("space"), py::arg("deployer"), py::arg("config_json"),
      "Run the adaptive profiling loop; config uses the run-config 'profile' schema");

  m.def(
      "run_uni_baseline",
      [](const DeploymentSpace& space, const std::shared_ptr<Deployer>& deployer,
         const std::string& config_json) {
        const ProfilerConfig cfg =
            profiler_config_from_json(space, json_from_pystr(config_json));
        return run_uni_baseline(space, *deployer, cfg.budget, cfg.final_pool, cfg.cv_folds,
                                cfg.seed, cfg.tree, cfg.sa, cfg.bagged_members, cfg.parallelism);
      },
      py::arg("space"), py::arg("deployer"), py::arg("config_json"),
      "Uniform-sampling baseline with the same final-model selection");

  m.def(
      "evaluate_full_grid",
      [](const FinalModel& model, const DeploymentSpace& space,
         const std::shared_ptr<Deployer>& deployer) {
        return evaluate_full_grid([&](const Point& p) { return model.predict(p); }, space,
                                  *deployer);
      },
      "Full-grid (MSE, MAE) of a model against a deterministic deployer");

  m.def(
      "complexity_r2",
      [](const DeploymentSpace& space, const std::shared_ptr<Deployer>& deployer) {
        return complexity_r2(space, *deployer);
      },
      "R-squared of the best full-grid linear fit");

  m.def(
      "dump_grid_csv",
      [](const DeploymentSpace& space, const std::shared_ptr<Deployer>& deployer,
         const std::string& path) { return dump_grid_csv(space, *deployer, path); },
      "Write the full ground-truth grid CSV; returns the row count");
}
