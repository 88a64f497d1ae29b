#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "perfshift/errors.hpp"
#include "perfshift/experiment.hpp"
#include "perfshift/verify.hpp"

namespace perfshift {

namespace detail {
// Defined in the generated builtin_configs.cpp.
extern const char* const kPredictor1Json;
extern const char* const kPredictor2Json;
}  // namespace detail

std::string builtin_config_text(const std::string& name) {
  if (name == "predictor1.json" || name == "predictor1") return detail::kPredictor1Json;
  if (name == "predictor2.json" || name == "predictor2") return detail::kPredictor2Json;
  return {};
}

ScenarioConfig load_scenario(const std::string& path) {
  std::string text;
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  } else {
    text = builtin_config_text(std::filesystem::path(path).filename().string());
    if (text.empty()) {
      throw ValidationError("config '" + path +
                            "' not found (bundled configs: predictor1.json, predictor2.json)");
    }
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config '" + path + "': " + e.what());
  }
  try {
    return ScenarioConfig::from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config '" + path + "': " + e.what());
  }
}

namespace {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : csv) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int run_command(const std::string& config_path, const std::string& out_dir,
                const std::string& mode, std::optional<std::uint64_t> seed,
                std::optional<std::size_t> n_samples, int threads) {
  ScenarioConfig cfg = load_scenario(config_path);
  if (!mode.empty()) cfg.eval.mode = mode_from_string(mode);
  if (seed.has_value()) cfg.eval.seed = *seed;
  if (n_samples.has_value()) cfg.eval.n_samples = *n_samples;
  cfg.validate();

  const SweepResult result = run_scenario(cfg, threads);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string stem = fs::path(config_path).stem().string();
  const fs::path out_path = fs::path(out_dir) / (stem + ".csv");
  write_csv(result, out_path.string());
  std::cout << "wrote " << out_path.string() << " (" << cfg.odds_grid.size()
            << " sweep points, " << result.rows.size() << " rows)\n";
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"simulation lab: how decision-coupled predictors shift outcome distributions "
               "and break observable fairness metrics"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_samples;
  int threads = 1;
  auto* run = app.add_subcommand("run", "run a sweep scenario and write its CSV");
  run->add_option("--config", config_path, "config path or bundled name")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--mode", mode, "oracle|mc|both (overrides the config)");
  run->add_option("--seed", seed, "master seed override");
  run->add_option("--n-samples", n_samples, "Monte Carlo sample size override");
  run->add_option("--threads", threads, "worker threads for sweep points");

  std::string plot_in, plot_out = "sweep.svg", metrics_csv = "ppv,npv,accuracy";
  auto* plot = app.add_subcommand("plot", "render sweep CSV panels as SVG");
  plot->add_option("--in", plot_in, "sweep CSV produced by run")->required();
  plot->add_option("--metrics", metrics_csv, "comma-separated metric panels");
  plot->add_option("--out", plot_out, "output SVG path");

  int verify_threads = 2;
  auto* verify_cmd = app.add_subcommand("verify", "run the full invariant suite");
  verify_cmd->add_option("--threads", verify_threads, "worker threads for sweep points");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage problems are config errors
  }

  try {
    if (run->parsed()) {
      return run_command(config_path, out_dir, mode, seed, n_samples, threads);
    }
    if (plot->parsed()) {
      const SweepResult result = read_csv_file(plot_in);
      emit_plot(result, split_list(metrics_csv), plot_out);
      std::cout << "wrote " << plot_out << "\n";
      return 0;
    }
    // verify
    const int failures = verify::run_all(std::cout, {verify_threads});
    return failures == 0 ? 0 : 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const PartitionMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_main(int argc, const char* const* argv) {
  return cli_main(std::vector<std::string>(argv + 1, argv + argc));
}

}  // namespace perfshift
