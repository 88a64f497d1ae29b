#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "perfshift/metrics.hpp"
#include "perfshift/oracle.hpp"
#include "perfshift/policy.hpp"
#include "perfshift/population.hpp"
#include "perfshift/predictor.hpp"

namespace perfshift {

enum class EvalMode { oracle, mc, both };
enum class Path { oracle, mc };

const char* to_string(EvalMode m);
EvalMode mode_from_string(const std::string& s);
const char* to_string(Path p);
Path path_from_string(const std::string& s);

/// `points` log-spaced values on [from, to], endpoints included.
std::vector<double> log_spaced_grid(double from, double to, int points);

/// Recipe for fitting a plug-in predictor on pre-deployment data.
struct FitInstruction {
  FeatureSet features{false, true};
  std::size_t train_size = 10000;
  std::optional<std::uint64_t> seed;  // falls back to a substream of the master seed
  double threshold = 0.5;
};

struct EvalSettings {
  std::size_t n_samples = 1'000'000;
  std::optional<std::uint64_t> seed;  // master seed; see resolve_master_seed
  EvalMode mode = EvalMode::both;
};

/// A full experiment: population, predictor, intervention template, and the
/// odds-factor sweep grid.
struct ScenarioConfig {
  std::variant<PopulationSpec, CellTable> population = PopulationSpec{};
  std::variant<Predictor, FitInstruction> predictor = FitInstruction{};
  Intervention intervention;        // odds_factor is taken from the grid per sweep point
  std::vector<double> odds_grid;    // >= 1, sorted ascending
  EvalSettings eval;

  void validate() const;
  static ScenarioConfig from_json(const nlohmann::json& j);
};

/// Seed precedence: config (already carrying any CLI override) first, then
/// the PFL_SEED environment variable, then a fixed default.
std::uint64_t resolve_master_seed(const ScenarioConfig& cfg);

/// Metrics at one sweep point for one (variant, path) combination, both
/// groups plus disparities. `delta_pi` is the mass-weighted propensity change
/// of the selected stratum (empty if the stratum has zero mass). `counts`
/// carries MC conditioning-set sizes; it is zero for oracle rows and is not
/// serialized.
struct SweepRow {
  double k = 1.0;
  std::optional<double> delta_pi;
  OutcomeVariant variant = OutcomeVariant::observable;
  Path path = Path::oracle;
  std::array<GroupMetrics, 2> group;
  GroupMetrics abs_diff;
  std::array<GroupCounts, 2> counts;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (k, variant, path)

  const SweepRow* find(double k, OutcomeVariant variant, Path path) const;
};

/// Runs the sweep. Fully deterministic given the config (including seeds)
/// and independent of `threads`: sweep points are pure functions of
/// (master seed, point index) and results are assembled in grid order.
SweepResult run_scenario(const ScenarioConfig& cfg, int threads = 1);

/// CSV with header
/// `k,delta_pi,variant,path,group,prediction_rate,...,d_accuracy`; floats at
/// 9 significant digits, empty fields for undefined values; per (k, variant,
/// path): one row per group plus an abs_diff row carrying the d_* columns.
void write_csv(const SweepResult& result, std::ostream& out);
void write_csv(const SweepResult& result, const std::string& path);
std::string to_csv(const SweepResult& result);

SweepResult read_csv(std::istream& in);
SweepResult read_csv_file(const std::string& path);

/// Equality at serialization precision (the CSV is the type's contract).
bool serialized_equal(const SweepResult& lhs, const SweepResult& rhs);

/// Renders selected metrics as a multi-panel SVG: x-axis is the realized
/// propensity change, one line per group plus the absolute difference,
/// odds-factor values annotated along the top. Pure rendering, no
/// computation. Unknown metric names raise ValidationError listing the
/// valid ones.
void emit_plot(const SweepResult& result, const std::vector<std::string>& metrics,
               const std::string& path);

/// `run`, `plot`, `verify` subcommands. Returns the process exit status:
/// 0 success, 1 verification/internal failure, 2 config error.
int cli_main(const std::vector<std::string>& args);
int cli_main(int argc, const char* const* argv);

/// Text of a bundled scenario config, or empty if the name is not bundled.
std::string builtin_config_text(const std::string& name);

/// Reads a config from disk, falling back to the bundled configs when the
/// path does not exist but matches a bundled name.
ScenarioConfig load_scenario(const std::string& path);

}  // namespace perfshift
