#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "perfshift/errors.hpp"
#include "perfshift/experiment.hpp"
#include "perfshift/metrics.hpp"
#include "perfshift/oracle.hpp"
#include "perfshift/policy.hpp"
#include "perfshift/population.hpp"
#include "perfshift/predictor.hpp"
#include "perfshift/rng.hpp"
#include "perfshift/verify.hpp"

namespace py = pybind11;
using namespace perfshift;

namespace {

std::string spec_to_json_text(const PopulationSpec& spec) { return spec.to_json().dump(2); }

PopulationSpec spec_from_json_text(const std::string& text) {
  return PopulationSpec::from_json(nlohmann::json::parse(text));
}

std::string report_csv(const MetricReport& report) {
  std::ostringstream out;
  write_csv(report, out);
  return out.str();
}

std::string cells_csv(const CellTable& cells) {
  std::ostringstream out;
  cells.to_csv(out);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "simulation lab: decision-coupled predictors, outcome shift, fairness metrics";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<PartitionMismatchError>(m, "PartitionMismatchError", PyExc_ValueError);
  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("normal_cdf", &normal_cdf, py::arg("x"));
  m.def("odds_multiply", &odds_multiply, py::arg("p"), py::arg("k"));

  py::class_<CellKey>(m, "CellKey")
      .def(py::init<int, int, int>(), py::arg("a"), py::arg("x1"), py::arg("x2bin"))
      .def_readwrite("a", &CellKey::a)
      .def_readwrite("x1", &CellKey::x1)
      .def_readwrite("x2bin", &CellKey::x2bin)
      .def("__repr__", [](const CellKey& k) { return to_string(k); })
      .def(py::self == py::self);

  py::class_<Cell>(m, "Cell")
      .def(py::init<>())
      .def_readwrite("a", &Cell::a)
      .def_readwrite("x1", &Cell::x1)
      .def_readwrite("x2bin", &Cell::x2bin)
      .def_readwrite("mass", &Cell::mass)
      .def_readwrite("mu0", &Cell::mu0)
      .def_readwrite("mu1", &Cell::mu1)
      .def_readwrite("pi_pre", &Cell::pi_pre)
      .def("key", &Cell::key);

  py::class_<CellTable>(m, "CellTable")
      .def(py::init<std::vector<Cell>, std::optional<double>>(), py::arg("cells"),
           py::arg("x2_split") = std::nullopt)
      .def_property_readonly("cells", &CellTable::cells)
      .def_property_readonly("x2_split", &CellTable::x2_split)
      .def("at", &CellTable::at, py::return_value_policy::copy)
      .def("to_csv", &cells_csv)
      .def_static("from_csv", py::overload_cast<const std::string&>(&CellTable::from_csv))
      .def("__len__", &CellTable::size);

  py::class_<PopulationSpec>(m, "PopulationSpec")
      .def(py::init<>())
      .def_readwrite("p_a", &PopulationSpec::p_a)
      .def_readwrite("p_x1_given_a", &PopulationSpec::p_x1_given_a)
      .def_readwrite("x2_threshold", &PopulationSpec::x2_threshold)
      .def_readwrite("outcome_base", &PopulationSpec::outcome_base)
      .def_readwrite("treatment_odds_factor", &PopulationSpec::treatment_odds_factor)
      .def_readwrite("pi_pre_base", &PopulationSpec::pi_pre_base)
      .def("validate", &PopulationSpec::validate)
      .def("to_json", &spec_to_json_text)
      .def_static("from_json", &spec_from_json_text, py::arg("text"));

  py::class_<Individual>(m, "Individual")
      .def(py::init<>())
      .def_readwrite("a", &Individual::a)
      .def_readwrite("x1", &Individual::x1)
      .def_readwrite("x2", &Individual::x2)
      .def_readwrite("y0", &Individual::y0)
      .def_readwrite("y1", &Individual::y1)
      .def_readwrite("d", &Individual::d)
      .def_readwrite("y", &Individual::y)
      .def("observed", &Individual::observed);

  m.def("build_example_population", &build_example_population, py::arg("spec"));
  m.def("sample_individuals", &sample_individuals, py::arg("spec"), py::arg("n"),
        py::arg("seed"));
  m.def("observe", &observe, py::arg("individual"), py::arg("d"));
  m.def("cell_key_of", &cell_key_of, py::arg("individual"), py::arg("x2_split"));

  py::class_<rng::DrawKey>(m, "DrawKey")
      .def(py::init<std::uint64_t, std::uint64_t, std::uint64_t>(), py::arg("seed"),
           py::arg("stream"), py::arg("index"))
      .def_readwrite("seed", &rng::DrawKey::seed)
      .def_readwrite("stream", &rng::DrawKey::stream)
      .def_readwrite("index", &rng::DrawKey::index);
  m.def("uniform01",
        [](const rng::DrawKey& key) { return rng::uniform01(key); }, py::arg("key"));

  py::class_<DecisionPolicy>(m, "DecisionPolicy")
      .def(py::init<const std::map<CellKey, double>&, std::optional<double>>(),
           py::arg("propensity"), py::arg("x2_split") = std::nullopt)
      .def("at", &DecisionPolicy::at)
      .def_property_readonly("entries", &DecisionPolicy::entries)
      .def_property_readonly("x2_split", &DecisionPolicy::x2_split);

  py::class_<Intervention>(m, "Intervention")
      .def(py::init([](std::optional<int> select_a, std::optional<int> select_r,
                       double odds_factor) {
             Intervention iv;
             iv.select_a = select_a;
             iv.select_r = select_r;
             iv.odds_factor = odds_factor;
             iv.validate();
             return iv;
           }),
           py::arg("select_a") = std::nullopt, py::arg("select_r") = std::nullopt,
           py::arg("odds_factor") = 1.0)
      .def_readwrite("select_a", &Intervention::select_a)
      .def_readwrite("select_r", &Intervention::select_r)
      .def_readwrite("odds_factor", &Intervention::odds_factor);

  m.def("baseline_policy", &baseline_policy, py::arg("cells"));
  m.def("intervene", &intervene, py::arg("base"), py::arg("intervention"), py::arg("predictor"),
        py::arg("cells"));
  m.def("decide", &decide, py::arg("policy"), py::arg("individual"), py::arg("key"));

  py::class_<FeatureSet>(m, "FeatureSet")
      .def(py::init<bool, bool>(), py::arg("use_a") = false, py::arg("use_x1") = false)
      .def_readwrite("use_a", &FeatureSet::use_a)
      .def_readwrite("use_x1", &FeatureSet::use_x1);

  py::class_<Predictor>(m, "Predictor")
      .def_static("make_threshold", &Predictor::make_threshold, py::arg("threshold"))
      .def_static("make_plugin", &Predictor::make_plugin, py::arg("features"), py::arg("table"))
      .def("predict",
           py::overload_cast<int, int, double>(&Predictor::predict, py::const_), py::arg("a"),
           py::arg("x1"), py::arg("x2"))
      .def("predict_individual",
           py::overload_cast<const Individual&>(&Predictor::predict, py::const_))
      .def("partition_on", &Predictor::partition_on, py::arg("cells"))
      .def("to_json", [](const Predictor& p) { return p.to_json().dump(2); })
      .def_static("from_json", [](const std::string& text) {
        return Predictor::from_json(nlohmann::json::parse(text));
      });

  m.def(
      "fit_plugin",
      [](const std::vector<Individual>& samples, const FeatureSet& features, double threshold) {
        return fit_plugin(samples, features, threshold);
      },
      py::arg("samples"), py::arg("features"), py::arg("threshold") = 0.5);

  py::enum_<OutcomeVariant>(m, "OutcomeVariant")
      .value("observable", OutcomeVariant::observable)
      .value("counterfactual", OutcomeVariant::counterfactual);

  py::class_<GroupMetrics>(m, "GroupMetrics")
      .def_readonly("prediction_rate", &GroupMetrics::prediction_rate)
      .def_readonly("ppv", &GroupMetrics::ppv)
      .def_readonly("npv", &GroupMetrics::npv)
      .def_readonly("fpr", &GroupMetrics::fpr)
      .def_readonly("fnr", &GroupMetrics::fnr)
      .def_readonly("accuracy", &GroupMetrics::accuracy);

  py::class_<GroupCounts>(m, "GroupCounts")
      .def_readonly("n", &GroupCounts::n)
      .def_readonly("n_r1", &GroupCounts::n_r1)
      .def_readonly("n_r0", &GroupCounts::n_r0)
      .def_readonly("n_out1", &GroupCounts::n_out1)
      .def_readonly("n_out0", &GroupCounts::n_out0);

  py::class_<MetricReport>(m, "MetricReport")
      .def_readonly("variant", &MetricReport::variant)
      .def_readonly("group", &MetricReport::group)
      .def_readonly("counts", &MetricReport::counts)
      .def_readonly("abs_diff", &MetricReport::abs_diff)
      .def("to_csv", &report_csv);

  m.def(
      "empirical_metrics",
      [](const std::vector<Individual>& samples, const Predictor& pred, OutcomeVariant variant) {
        return empirical_metrics(samples, pred, variant);
      },
      py::arg("samples"), py::arg("predictor"), py::arg("variant"));
  m.def("disparity", &disparity, py::arg("report"));
  m.def("default_tolerance", &default_tolerance, py::arg("report"));

  py::enum_<Criterion>(m, "Criterion")
      .value("demographic_parity", Criterion::demographic_parity)
      .value("equalized_odds", Criterion::equalized_odds)
      .value("predictive_parity", Criterion::predictive_parity);
  py::enum_<CheckStatus>(m, "CheckStatus")
      .value("passed", CheckStatus::pass)
      .value("failed", CheckStatus::fail)
      .value("indeterminate", CheckStatus::indeterminate);
  py::class_<CriterionFinding>(m, "CriterionFinding")
      .def_readonly("metric", &CriterionFinding::metric)
      .def_readonly("magnitude", &CriterionFinding::magnitude);
  py::class_<CriterionResult>(m, "CriterionResult")
      .def_readonly("status", &CriterionResult::status)
      .def_readonly("findings", &CriterionResult::findings);
  m.def("check_criterion", &check_criterion, py::arg("report"), py::arg("criterion"),
        py::arg("tol"));

  py::class_<oracle::Context>(m, "OracleContext")
      .def_static("make",
                  py::overload_cast<CellTable, DecisionPolicy, const Predictor&>(
                      &oracle::Context::make),
                  py::arg("cells"), py::arg("policy"), py::arg("predictor"))
      .def_readonly("cells", &oracle::Context::cells)
      .def_readonly("rmap", &oracle::Context::rmap);

  m.def("cell_outcome_rate", &oracle::cell_outcome_rate, py::arg("ctx"), py::arg("cell"));
  m.def("conditional_outcome", &oracle::conditional_outcome, py::arg("ctx"), py::arg("a"),
        py::arg("x1"), py::arg("x2bin") = std::nullopt);
  m.def("prediction_rate", &oracle::prediction_rate, py::arg("ctx"), py::arg("a"));
  m.def("predictive_values", &oracle::predictive_values, py::arg("ctx"), py::arg("a"));
  m.def("error_rates", &oracle::error_rates, py::arg("ctx"), py::arg("a"));
  m.def("oracle_accuracy", &oracle::accuracy, py::arg("ctx"), py::arg("a"));
  m.def("observable_metrics", &oracle::observable_metrics, py::arg("ctx"), py::arg("a"));
  m.def("counterfactual_metrics", &oracle::counterfactual_metrics, py::arg("ctx"), py::arg("a"));

  py::enum_<EvalMode>(m, "EvalMode")
      .value("oracle", EvalMode::oracle)
      .value("mc", EvalMode::mc)
      .value("both", EvalMode::both);
  py::enum_<Path>(m, "SweepPath").value("oracle", Path::oracle).value("mc", Path::mc);

  py::class_<EvalSettings>(m, "EvalSettings")
      .def_readwrite("n_samples", &EvalSettings::n_samples)
      .def_readwrite("seed", &EvalSettings::seed)
      .def_readwrite("mode", &EvalSettings::mode);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readwrite("odds_grid", &ScenarioConfig::odds_grid)
      .def_readwrite("intervention", &ScenarioConfig::intervention)
      .def_readwrite("eval", &ScenarioConfig::eval)
      .def("validate", &ScenarioConfig::validate)
      .def_static("from_json", [](const std::string& text) {
        return ScenarioConfig::from_json(nlohmann::json::parse(text));
      });

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("k", &SweepRow::k)
      .def_readonly("delta_pi", &SweepRow::delta_pi)
      .def_readonly("variant", &SweepRow::variant)
      .def_readonly("path", &SweepRow::path)
      .def_readonly("group", &SweepRow::group)
      .def_readonly("abs_diff", &SweepRow::abs_diff)
      .def_readonly("counts", &SweepRow::counts);

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("rows", &SweepResult::rows)
      .def("to_csv", [](const SweepResult& r) { return to_csv(r); })
      .def("find", [](const SweepResult& r, double k, OutcomeVariant variant, Path path) {
        const SweepRow* row = r.find(k, variant, path);
        return row == nullptr ? std::optional<SweepRow>() : std::optional<SweepRow>(*row);
      });

  m.def("log_spaced_grid", &log_spaced_grid, py::arg("from_value"), py::arg("to_value"),
        py::arg("points"));
  m.def("run_scenario", &run_scenario, py::arg("config"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("write_sweep_csv",
        py::overload_cast<const SweepResult&, const std::string&>(&write_csv), py::arg("result"),
        py::arg("path"));
  m.def("read_sweep_csv", &read_csv_file, py::arg("path"));
  m.def("emit_plot", &emit_plot, py::arg("result"), py::arg("metrics"), py::arg("path"));
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("builtin_config_text", &builtin_config_text, py::arg("name"));
  m.def(
      "cli_main", [](const std::vector<std::string>& args) { return cli_main(args); },
      py::arg("args"));
}
