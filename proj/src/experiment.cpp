#include "perfshift/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "perfshift/errors.hpp"
#include "perfshift/rng.hpp"

namespace perfshift {

const char* to_string(EvalMode m) {
  switch (m) {
    case EvalMode::oracle: return "oracle";
    case EvalMode::mc: return "mc";
    default: return "both";
  }
}

EvalMode mode_from_string(const std::string& s) {
  if (s == "oracle") return EvalMode::oracle;
  if (s == "mc") return EvalMode::mc;
  if (s == "both") return EvalMode::both;
  throw ValidationError("unknown mode '" + s + "' (known: oracle, mc, both)");
}

const char* to_string(Path p) { return p == Path::oracle ? "oracle" : "mc"; }

Path path_from_string(const std::string& s) {
  if (s == "oracle") return Path::oracle;
  if (s == "mc") return Path::mc;
  throw ValidationError("unknown path '" + s + "' (known: oracle, mc)");
}

std::vector<double> log_spaced_grid(double from, double to, int points) {
  if (!(from > 0.0) || !(to >= from)) {
    throw ValidationError("log_spaced_grid: need 0 < from <= to");
  }
  if (points < 1) throw ValidationError("log_spaced_grid: need at least one point");
  if (points == 1) return {from};
  std::vector<double> grid(points);
  const double lf = std::log(from);
  const double lt = std::log(to);
  for (int i = 0; i < points; ++i) {
    grid[i] = std::exp(lf + (lt - lf) * static_cast<double>(i) / (points - 1));
  }
  grid.front() = from;  // exact endpoints
  grid.back() = to;
  return grid;
}

void ScenarioConfig::validate() const {
  if (std::holds_alternative<PopulationSpec>(population)) {
    std::get<PopulationSpec>(population).validate();
  }
  const bool sampleable = std::holds_alternative<PopulationSpec>(population);
  if (eval.mode != EvalMode::oracle) {
    if (!sampleable) {
      throw ValidationError(
          "config: mode '" + std::string(to_string(eval.mode)) +
          "' needs a sampleable population spec; raw cell tables support mode 'oracle' only");
    }
    if (eval.n_samples < 1) {
      throw ValidationError("config: eval.n_samples must be >= 1 for mc modes");
    }
  }
  if (std::holds_alternative<FitInstruction>(predictor)) {
    const auto& fit = std::get<FitInstruction>(predictor);
    if (!sampleable) {
      throw ValidationError("config: fitting a predictor needs a sampleable population spec");
    }
    if (fit.train_size < 1) throw ValidationError("config: fit.train_size must be >= 1");
  }
  Intervention probe = intervention;
  probe.odds_factor = 1.0;  // grid values supply the factor
  probe.validate();
  for (std::size_t i = 0; i < odds_grid.size(); ++i) {
    if (!(odds_grid[i] >= 1.0) || !std::isfinite(odds_grid[i])) {
      throw ValidationError("config: odds grid values must be finite and >= 1");
    }
    if (i > 0 && !(odds_grid[i] > odds_grid[i - 1])) {
      throw ValidationError("config: odds grid must be strictly ascending");
    }
  }
}

namespace {

constexpr std::uint64_t kDefaultSeed = 1729;

void require_keys(const nlohmann::json& j, const char* where,
                  std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(std::string(where) + ": expected a JSON object");
  for (const auto& [key, ignored] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }) == allowed.end()) {
      std::string known;
      for (const char* k : allowed) known += std::string(known.empty() ? "" : ", ") + k;
      throw ValidationError(std::string(where) + ": unknown key '" + key + "' (known: " + known +
                            ")");
    }
  }
}

CellTable cells_from_json_array(const nlohmann::json& arr) {
  std::vector<Cell> cells;
  for (const auto& e : arr) {
    require_keys(e, "population.cells[]", {"a", "x1", "x2bin", "mass", "mu0", "mu1", "pi_pre"});
    Cell c;
    c.a = e.at("a").get<int>();
    c.x1 = e.at("x1").get<int>();
    c.x2bin = e.at("x2bin").get<int>();
    c.mass = e.at("mass").get<double>();
    c.mu0 = e.at("mu0").get<double>();
    c.mu1 = e.at("mu1").get<double>();
    c.pi_pre = e.at("pi_pre").get<double>();
    cells.push_back(c);
  }
  return CellTable(std::move(cells));
}

FeatureSet features_from_json(const nlohmann::json& arr) {
  FeatureSet features;
  for (const auto& f : arr) {
    const std::string name = f.get<std::string>();
    if (name == "a") {
      features.use_a = true;
    } else if (name == "x1") {
      features.use_x1 = true;
    } else {
      throw ValidationError("fit.features: unknown feature '" + name + "' (known: a, x1)");
    }
  }
  return features;
}

std::vector<double> grid_from_json(const nlohmann::json& iv) {
  if (iv.contains("odds_factor_grid")) {
    const auto& g = iv.at("odds_factor_grid");
    if (g.is_array()) return g.get<std::vector<double>>();
    require_keys(g, "intervention.odds_factor_grid", {"from", "to", "points"});
    return log_spaced_grid(g.at("from").get<double>(), g.at("to").get<double>(),
                           g.at("points").get<int>());
  }
  if (iv.contains("odds_factor")) return {iv.at("odds_factor").get<double>()};
  return log_spaced_grid(1.0, 1e4, 50);
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  require_keys(j, "config", {"population", "predictor", "intervention", "eval"});
  ScenarioConfig cfg;

  if (j.contains("population")) {
    const auto& p = j.at("population");
    if (p.contains("cells")) {
      require_keys(p, "population", {"cells"});
      cfg.population = cells_from_json_array(p.at("cells"));
    } else if (p.contains("cells_csv")) {
      require_keys(p, "population", {"cells_csv"});
      try {
        cfg.population = CellTable::from_csv(p.at("cells_csv").get<std::string>());
      } catch (const IoError& e) {
        throw ValidationError(std::string("population.cells_csv: ") + e.what());
      }
    } else {
      require_keys(p, "population",
                   {"p_a", "p_x1_given_a", "x2_threshold", "outcome_base",
                    "treatment_odds_factor", "pi_pre_base"});
      cfg.population = PopulationSpec::from_json(p);
    }
  }

  if (j.contains("predictor")) {
    const auto& p = j.at("predictor");
    if (p.contains("fit")) {
      require_keys(p, "predictor", {"fit"});
      const auto& f = p.at("fit");
      require_keys(f, "predictor.fit", {"features", "train_size", "seed", "threshold"});
      FitInstruction fit;
      if (f.contains("features")) fit.features = features_from_json(f.at("features"));
      if (f.contains("train_size")) fit.train_size = f.at("train_size").get<std::size_t>();
      if (f.contains("seed")) fit.seed = f.at("seed").get<std::uint64_t>();
      if (f.contains("threshold")) fit.threshold = f.at("threshold").get<double>();
      cfg.predictor = fit;
    } else {
      cfg.predictor = Predictor::from_json(p);
    }
  }

  if (j.contains("intervention")) {
    const auto& iv = j.at("intervention");
    require_keys(iv, "intervention",
                 {"select_a", "select_r", "odds_factor", "odds_factor_grid"});
    cfg.intervention = Intervention::from_json(iv);
    cfg.odds_grid = grid_from_json(iv);
  } else {
    throw ValidationError("config: missing 'intervention'");
  }

  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    require_keys(e, "eval", {"n_samples", "seed", "mode"});
    if (e.contains("n_samples")) cfg.eval.n_samples = e.at("n_samples").get<std::size_t>();
    if (e.contains("seed")) cfg.eval.seed = e.at("seed").get<std::uint64_t>();
    if (e.contains("mode")) cfg.eval.mode = mode_from_string(e.at("mode").get<std::string>());
  }

  cfg.validate();
  return cfg;
}

std::uint64_t resolve_master_seed(const ScenarioConfig& cfg) {
  if (cfg.eval.seed.has_value()) return *cfg.eval.seed;
  if (const char* env = std::getenv("PFL_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw ValidationError("PFL_SEED must be an unsigned integer, got '" + std::string(env) +
                            "'");
    }
    return static_cast<std::uint64_t>(v);
  }
  return kDefaultSeed;
}

namespace {

Predictor resolve_predictor(const ScenarioConfig& cfg, const DecisionPolicy& base,
                            std::uint64_t master_seed) {
  if (std::holds_alternative<Predictor>(cfg.predictor)) {
    return std::get<Predictor>(cfg.predictor);
  }
  const auto& fit = std::get<FitInstruction>(cfg.predictor);
  const auto& spec = std::get<PopulationSpec>(cfg.population);
  const std::uint64_t fit_seed =
      fit.seed.has_value() ? *fit.seed : rng::bits({master_seed, rng::stream::train_decision, 0});
  auto train = sample_individuals(spec, fit.train_size, fit_seed);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const int d = decide(base, train[i], {fit_seed, rng::stream::train_decision, i});
    train[i] = observe(train[i], d);
  }
  return fit_plugin(train, fit.features, fit.threshold);
}

GroupMetrics disparity_of(OutcomeVariant variant, const std::array<GroupMetrics, 2>& groups) {
  MetricReport tmp;
  tmp.variant = variant;
  tmp.group = groups;
  return disparity(tmp);
}

struct PointOutput {
  std::optional<double> delta_pi;
  std::vector<SweepRow> rows;
};

}  // namespace

SweepResult run_scenario(const ScenarioConfig& cfg, int threads) {
  cfg.validate();
  if (threads < 1) throw ValidationError("run_scenario: threads must be >= 1");
  const std::uint64_t seed = resolve_master_seed(cfg);

  const CellTable cells = std::holds_alternative<PopulationSpec>(cfg.population)
                              ? build_example_population(std::get<PopulationSpec>(cfg.population))
                              : std::get<CellTable>(cfg.population);
  const DecisionPolicy base = baseline_policy(cells);
  const Predictor pred = resolve_predictor(cfg, base, seed);
  const auto rmap = pred.partition_on(cells);  // fails fast on partition mismatch

  const bool want_oracle = cfg.eval.mode != EvalMode::mc;
  const bool want_mc = cfg.eval.mode != EvalMode::oracle;

  std::vector<Individual> eval_base;
  if (want_mc) {
    eval_base =
        sample_individuals(std::get<PopulationSpec>(cfg.population), cfg.eval.n_samples, seed);
  }

  const std::size_t n_points = cfg.odds_grid.size();
  std::vector<PointOutput> outputs(n_points);

  auto eval_point = [&](std::size_t j, std::vector<Individual>& scratch) {
    PointOutput& out = outputs[j];
    const double k = cfg.odds_grid[j];
    Intervention iv = cfg.intervention;
    iv.odds_factor = k;
    const DecisionPolicy post = intervene(base, iv, pred, cells);

    double sel_mass = 0.0;
    double sel_shift = 0.0;
    for (const Cell& c : cells.cells()) {
      if (!iv.matches(c, rmap.at(c.key()))) continue;
      sel_mass += c.mass;
      sel_shift += c.mass * (post.at(c.key()) - base.at(c.key()));
    }
    if (sel_mass > 0.0) out.delta_pi = sel_shift / sel_mass;

    auto push_row = [&](OutcomeVariant variant, Path path, std::array<GroupMetrics, 2> groups,
                        std::array<GroupCounts, 2> counts) {
      SweepRow row;
      row.k = k;
      row.delta_pi = out.delta_pi;
      row.variant = variant;
      row.path = path;
      row.group = groups;
      row.abs_diff = disparity_of(variant, groups);
      row.counts = counts;
      out.rows.push_back(std::move(row));
    };

    // Row order within a sweep point matches the CSV sort contract:
    // (variant, path) lexicographic.
    if (want_mc) {
      // Covariates and potential outcomes are shared across sweep points;
      // only d and y are rewritten, so the scratch copy happens once per
      // worker.
      if (scratch.size() != eval_base.size()) scratch = eval_base;
      for (std::size_t i = 0; i < scratch.size(); ++i) {
        const int d = decide(post, scratch[i], {seed, rng::stream::decision_base + j, i});
        scratch[i] = observe(scratch[i], d);
      }
      const MetricReport cf = empirical_metrics(scratch, pred, OutcomeVariant::counterfactual);
      push_row(OutcomeVariant::counterfactual, Path::mc, cf.group, cf.counts);
    }
    if (want_oracle) {
      const auto ctx = oracle::Context::make(cells, post, rmap);
      std::array<GroupMetrics, 2> cf_groups = {oracle::counterfactual_metrics(ctx, 0),
                                               oracle::counterfactual_metrics(ctx, 1)};
      push_row(OutcomeVariant::counterfactual, Path::oracle, cf_groups, {});
    }
    if (want_mc) {
      const MetricReport obs = empirical_metrics(scratch, pred, OutcomeVariant::observable);
      push_row(OutcomeVariant::observable, Path::mc, obs.group, obs.counts);
    }
    if (want_oracle) {
      const auto ctx = oracle::Context::make(cells, post, rmap);
      std::array<GroupMetrics, 2> obs_groups = {oracle::observable_metrics(ctx, 0),
                                                oracle::observable_metrics(ctx, 1)};
      push_row(OutcomeVariant::observable, Path::oracle, obs_groups, {});
    }
  };

  const int n_workers =
      static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), n_points));
  if (n_workers <= 1) {
    std::vector<Individual> scratch;
    for (std::size_t j = 0; j < n_points; ++j) eval_point(j, scratch);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) {
      pool.emplace_back([&, t] {
        std::vector<Individual> scratch;
        for (std::size_t j = static_cast<std::size_t>(t); j < n_points;
             j += static_cast<std::size_t>(n_workers)) {
          eval_point(j, scratch);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  SweepResult result;
  for (auto& out : outputs) {
    for (auto& row : out.rows) result.rows.push_back(std::move(row));
  }
  return result;
}

const SweepRow* SweepResult::find(double k, OutcomeVariant variant, Path path) const {
  for (const SweepRow& row : rows) {
    if (row.k == k && row.variant == variant && row.path == path) return &row;
  }
  return nullptr;
}

namespace {

constexpr char kSweepCsvHeader[] =
    "k,delta_pi,variant,path,group,prediction_rate,ppv,npv,fpr,fnr,accuracy,"
    "d_prediction_rate,d_ppv,d_npv,d_fpr,d_fnr,d_accuracy";

std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string fmt_opt(const MetricValue& v) { return v.has_value() ? fmt9(*v) : std::string(); }

void append_group_fields(std::string& line, const GroupMetrics& m) {
  for (const char* name : kMetricNames) {
    line += ',';
    line += fmt_opt(metric_by_name(m, name));
  }
}

MetricValue parse_opt(const std::string& field, const char* what) {
  if (field.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0') {
    throw ValidationError(std::string("sweep CSV: unparseable ") + what + " '" + field + "'");
  }
  return v;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

void assign_metric(GroupMetrics& m, std::size_t idx, const MetricValue& v) {
  switch (idx) {
    case 0: m.prediction_rate = v; break;
    case 1: m.ppv = v; break;
    case 2: m.npv = v; break;
    case 3: m.fpr = v; break;
    case 4: m.fnr = v; break;
    default: m.accuracy = v; break;
  }
}

}  // namespace

void write_csv(const SweepResult& result, std::ostream& out) {
  out << kSweepCsvHeader << "\n";
  const std::string empty_metrics(6, ',');
  for (const SweepRow& row : result.rows) {
    const std::string prefix = fmt9(row.k) + "," + fmt_opt(row.delta_pi) + "," +
                               to_string(row.variant) + "," + to_string(row.path) + ",";
    for (int g = 0; g <= 1; ++g) {
      std::string line = prefix + std::to_string(g);
      append_group_fields(line, row.group[g]);
      line += empty_metrics;
      out << line << "\n";
    }
    std::string line = prefix + "abs_diff" + empty_metrics;
    append_group_fields(line, row.abs_diff);
    out << line << "\n";
  }
}

std::string to_csv(const SweepResult& result) {
  std::ostringstream out;
  write_csv(result, out);
  return out.str();
}

void write_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(result, out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

SweepResult read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("sweep CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepCsvHeader) throw ValidationError("sweep CSV: unexpected header");

  SweepResult result;
  auto row_key = [](const SweepRow& r) {
    return std::tuple<double, int, int>(r.k, static_cast<int>(r.variant),
                                        static_cast<int>(r.path));
  };
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != 17) {
      throw ValidationError("sweep CSV line " + std::to_string(lineno) +
                            ": expected 17 fields, got " + std::to_string(fields.size()));
    }
    const MetricValue k = parse_opt(fields[0], "k");
    if (!k.has_value()) {
      throw ValidationError("sweep CSV line " + std::to_string(lineno) + ": missing k");
    }
    SweepRow probe;
    probe.k = *k;
    probe.delta_pi = parse_opt(fields[1], "delta_pi");
    probe.variant = variant_from_string(fields[2]);
    probe.path = path_from_string(fields[3]);

    SweepRow* row = nullptr;
    for (auto it = result.rows.rbegin(); it != result.rows.rend(); ++it) {
      if (row_key(*it) == row_key(probe)) {
        row = &*it;
        break;
      }
    }
    if (row == nullptr) {
      result.rows.push_back(probe);
      row = &result.rows.back();
    }

    const std::string& group = fields[4];
    if (group == "0" || group == "1") {
      GroupMetrics m;
      for (std::size_t i = 0; i < 6; ++i) assign_metric(m, i, parse_opt(fields[5 + i], "metric"));
      row->group[group == "1" ? 1 : 0] = m;
    } else if (group == "abs_diff") {
      GroupMetrics m;
      for (std::size_t i = 0; i < 6; ++i) {
        assign_metric(m, i, parse_opt(fields[11 + i], "disparity"));
      }
      row->abs_diff = m;
    } else {
      throw ValidationError("sweep CSV line " + std::to_string(lineno) + ": unknown group '" +
                            group + "'");
    }
  }
  return result;
}

SweepResult read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open sweep CSV '" + path + "'");
  return read_csv(in);
}

bool serialized_equal(const SweepResult& lhs, const SweepResult& rhs) {
  return to_csv(lhs) == to_csv(rhs);
}

}  // namespace perfshift
