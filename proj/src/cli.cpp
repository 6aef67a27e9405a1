#include "iontrap/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "iontrap/config.hpp"
#include "iontrap/experiments.hpp"
#include "iontrap/readout.hpp"
#include "iontrap/report_io.hpp"
#include "iontrap/rng.hpp"

namespace iontrap {

namespace {

struct ExperimentOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> shots;
  std::optional<int> runs;
  std::optional<int> ions;
  std::optional<int> workers;
  std::optional<double> target_fidelity;
  std::string out_dir = ".";
  bool analytic = false;
  bool timing = false;
};

struct CalibrationOptions {
  int ions = 2;
  double lambda_bright = 10.0;
  double lambda_dark = 0.1;
  double target = 0.02;
  double tolerance = 0.002;
  std::uint64_t shots = 100000;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

void add_experiment_options(CLI::App* cmd, ExperimentOptions& opt) {
  cmd->add_option("--config", opt.config_path, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", opt.seed, "Master seed");
  cmd->add_option("--shots", opt.shots, "Shots per setting");
  cmd->add_option("--runs", opt.runs, "Number of repeated runs");
  cmd->add_option("--ions", opt.ions, "Number of ions");
  cmd->add_option("--workers", opt.workers, "Worker threads (does not change results)");
  cmd->add_option("--target-fidelity", opt.target_fidelity,
                  "Set gate depolarizing so the analytic two-ion fidelity equals this value");
  cmd->add_option("--out-dir", opt.out_dir, "Directory for the report and shot CSV");
  cmd->add_flag("--analytic", opt.analytic, "Exact expectations instead of sampling");
  cmd->add_flag("--timing", opt.timing, "Record runtime_ms in the report");
}

ExperimentConfig build_config(ExperimentKind kind, const ExperimentOptions& opt) {
  ExperimentConfig cfg = default_config(kind);
  if (!opt.config_path.empty()) {
    cfg = load_config(opt.config_path);
    if (cfg.kind != kind) {
      throw ConfigError(fmt::format("config file is for '{}' but the command is '{}'",
                                    to_string(cfg.kind), to_string(kind)));
    }
  }
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.shots) cfg.shots_per_setting = *opt.shots;
  if (opt.runs) cfg.runs = *opt.runs;
  if (opt.ions) cfg.n_ions = *opt.ions;
  if (opt.workers) cfg.workers = *opt.workers;
  if (opt.analytic) cfg.analytic = true;
  cfg.validate();
  if (opt.target_fidelity) {
    ExperimentConfig probe = cfg;
    probe.n_ions = 2;
    probe.noise.dephasing.reset();
    cfg.noise.gate_depolarize_p = calibrate_gate_depolarizing(probe, *opt.target_fidelity);
  }
  return cfg;
}

int run_experiment_command(ExperimentKind kind, const ExperimentOptions& opt, std::ostream& out) {
  const ExperimentConfig cfg = build_config(kind, opt);
  const auto start = std::chrono::steady_clock::now();
  ExperimentOutput result = run_experiment(cfg);
  if (opt.timing) {
    result.report.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  write_outputs(opt.out_dir, result.report, result.shots);
  out << report_to_json(result.report).dump(2) << '\n';
  return kExitOk;
}

// Draws the true bright count uniformly, then counts photons and classifies.
double empirical_misclassification(const ReadoutConfig& cfg, int n_ions, std::uint64_t shots,
                                   std::uint64_t seed) {
  const RngPlan plan{seed};
  const std::size_t dim = dimension_for(n_ions);
  std::uint64_t wrong = 0;
  for (std::uint64_t s = 0; s < shots; ++s) {
    auto rng = plan.aux_engine(AuxStream::kReadoutCheck, s);
    const auto bright = static_cast<int>(rng() % static_cast<std::uint64_t>(n_ions + 1));
    const std::size_t outcome = (dim - 1) >> bright;
    const int count = sample_photon_counts(outcome, n_ions, cfg, rng);
    if (classify_threshold(count, cfg.thresholds) != bright) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(shots);
}

int run_calibration_command(const CalibrationOptions& opt, std::ostream& out) {
  if (opt.ions < kMinIons || opt.ions > kMaxIons) {
    throw ConfigError(fmt::format("ions must be in [{}, {}]", kMinIons, kMaxIons));
  }
  if (opt.shots == 0) throw ConfigError("shots must be positive");
  ReadoutCalibration cal;
  try {
    cal = calibrate_readout(opt.ions, opt.lambda_bright, opt.lambda_dark, opt.target, opt.tolerance);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const double empirical = empirical_misclassification(cal.config, opt.ions, opt.shots, opt.seed);

  nlohmann::ordered_json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["experiment"] = "calibrate-readout";
  doc["seed"] = opt.seed;
  doc["n_ions"] = opt.ions;
  doc["lambda_bright"] = cal.config.lambda_bright;
  doc["lambda_dark"] = cal.config.lambda_dark;
  doc["window_scale"] = cal.window_scale;
  doc["thresholds"] = cal.config.thresholds;
  doc["exact_rate"] = cal.exact_rate;
  doc["empirical_rate"] = empirical;
  doc["empirical_shots"] = opt.shots;
  doc["target"] = opt.target;
  doc["tolerance"] = opt.tolerance;
  std::filesystem::create_directories(opt.out_dir);
  const std::string text = doc.dump(2) + "\n";
  write_text_file(std::filesystem::path(opt.out_dir) / "readout_calibration.json", text);
  out << text;
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trapped-ion entanglement, Bell test and DFS storage simulator", "iontrap"};
  app.require_subcommand(1);

  ExperimentOptions entangle_opt;
  ExperimentOptions bell_opt;
  ExperimentOptions dfs_opt;
  auto* entangle = app.add_subcommand("entangle", "GHZ generation, parity fringe and fidelity");
  auto* bell = app.add_subcommand("bell", "CHSH Bell test");
  auto* dfs = app.add_subcommand("dfs", "Decoherence-free subspace storage under dephasing");
  add_experiment_options(entangle, entangle_opt);
  add_experiment_options(bell, bell_opt);
  add_experiment_options(dfs, dfs_opt);

  CalibrationOptions cal_opt;
  auto* calibrate = app.add_subcommand("calibrate-readout", "Photon-count threshold calibration");
  calibrate->add_option("--ions", cal_opt.ions, "Number of ions");
  calibrate->add_option("--lambda-bright", cal_opt.lambda_bright, "Mean counts of a bright ion");
  calibrate->add_option("--lambda-dark", cal_opt.lambda_dark, "Mean counts of a dark ion");
  calibrate->add_option("--target", cal_opt.target, "Target misclassification rate");
  calibrate->add_option("--tolerance", cal_opt.tolerance, "Allowed deviation from the target");
  calibrate->add_option("--shots", cal_opt.shots, "Shots for the empirical check");
  calibrate->add_option("--seed", cal_opt.seed, "Seed for the empirical check");
  calibrate->add_option("--out-dir", cal_opt.out_dir, "Directory for readout_calibration.json");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*entangle) return run_experiment_command(ExperimentKind::kEntangle, entangle_opt, out);
    if (*bell) return run_experiment_command(ExperimentKind::kBell, bell_opt, out);
    if (*dfs) return run_experiment_command(ExperimentKind::kDfs, dfs_opt, out);
    return run_calibration_command(cal_opt, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cli_main(int argc, char** argv) {
  return cli_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace iontrap
