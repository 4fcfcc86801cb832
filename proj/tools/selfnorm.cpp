// selfnorm: command-line front end for experiments, sweeps and oracle tables.
//
// Exit codes: 0 ok, 1 config error, 2 missing dependency (oracle table),
// 3 I/O error, 4 internal failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "selfnorm/selfnorm.hpp"

#ifndef SELFNORM_VERSION
#define SELFNORM_VERSION "dev"
#endif
#ifndef SELFNORM_DEFAULT_THRESHOLDS
#define SELFNORM_DEFAULT_THRESHOLDS "config/regime_thresholds.json"
#endif

namespace {

using namespace selfnorm;

enum ExitCode { kOk = 0, kConfig = 1, kDependency = 2, kIo = 3, kInternal = 4 };

struct CommonOptions {
  std::string family;
  std::vector<double> alphas;
  std::vector<double> ps;
  std::vector<std::size_t> n_grid;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> experiments;
  std::vector<double> t_grid;
  std::optional<double> epsilon;
  std::vector<double> delta_grid;
  std::optional<std::size_t> workers;
  std::string out;
  std::string format = "csv";
  std::string config_file;
  std::string oracle_dir;
  std::string thresholds_file;
  std::string matrix_out;
};

void add_common(CLI::App& cmd, CommonOptions& o, bool lists) {
  cmd.add_option("--family", o.family, "SymStable, Cauchy, SymPareto, Gaussian or StudentT");
  cmd.add_option("--alpha", o.alphas, lists ? "Tail indices (comma list)" : "Tail index")->delimiter(',');
  cmd.add_option("--p", o.ps, lists ? "Norm indices (comma list)" : "Norm index")->delimiter(',');
  cmd.add_option("--n", o.n_grid, "Sample sizes (comma list)")->delimiter(',');
  cmd.add_option("--reps", o.reps, "Replications per sample size");
  cmd.add_option("--seed", o.seed, "Master seed");
  cmd.add_option("--experiment", o.experiments,
                 lists ? "Experiment battery (comma list)" : "degenerate_scan, ek_functionals, fdd_covariance, "
                                                             "tightness_scan or chf_compare")
      ->delimiter(',');
  cmd.add_option("--t-grid", o.t_grid, "Time grid for fdd_covariance")->delimiter(',');
  cmd.add_option("--epsilon", o.epsilon, "Exceedance level");
  cmd.add_option("--delta-grid", o.delta_grid, "Window widths for the modulus of continuity")->delimiter(',');
  cmd.add_option("--workers", o.workers, "Worker threads (does not change results)");
  cmd.add_option("--out", o.out, "Output file (default: stdout)");
  cmd.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd.add_option("--config", o.config_file, "JSON config; its keys override the flags");
  cmd.add_option("--oracle-dir", o.oracle_dir, "Directory with g3.oracle and g4.oracle");
  cmd.add_option("--thresholds", o.thresholds_file, "Regime thresholds file")
      ->default_str(SELFNORM_DEFAULT_THRESHOLDS);
  if (lists) cmd.add_option("--matrix-out", o.matrix_out, "Also write the regime matrix CSV here");
}

RegimeThresholds resolve_thresholds(const CommonOptions& o) {
  if (!o.thresholds_file.empty()) return load_thresholds(o.thresholds_file);
  const std::filesystem::path fallback = SELFNORM_DEFAULT_THRESHOLDS;
  if (std::filesystem::exists(fallback)) return load_thresholds(fallback);
  std::cerr << "warning: no regime thresholds found at " << fallback.string() << "; decisions are inconclusive\n";
  return {};
}

ExperimentConfig build_config(const CommonOptions& o, const nlohmann::json& file, bool sweep_mode) {
  ExperimentConfig c;
  if (!o.family.empty()) {
    c.family.kind = parse_family_kind(o.family);
    if (o.family == "Cauchy") c.family.alpha = 1.0;
  }
  if (!sweep_mode) {
    if (o.alphas.size() > 1 || o.ps.size() > 1 || o.experiments.size() > 1) {
      throw ConfigError("run takes a single --alpha, --p and --experiment; use sweep for lists");
    }
    if (!o.alphas.empty()) c.family.alpha = o.alphas.front();
    if (!o.ps.empty()) c.p = o.ps.front();
  }
  if (!o.experiments.empty()) c.experiment = parse_experiment_kind(o.experiments.front());
  if (!o.n_grid.empty()) c.n_grid = o.n_grid;
  if (o.reps) c.reps = *o.reps;
  if (o.seed) c.master_seed = *o.seed;
  if (!o.t_grid.empty()) c.t_grid = o.t_grid;
  if (o.epsilon) c.epsilon = *o.epsilon;
  if (!o.delta_grid.empty()) c.delta_grid = o.delta_grid;
  if (o.workers) c.workers = *o.workers;
  if (!o.oracle_dir.empty()) c.oracle_dir = o.oracle_dir;
  c.thresholds = resolve_thresholds(o);
  if (!file.is_null()) apply_config_json(file, c);
  return c;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  write_text_file(path, text);
}

int run_command(const CommonOptions& o) {
  const nlohmann::json file = o.config_file.empty() ? nlohmann::json() : read_json_file(o.config_file);
  const auto config = build_config(o, file, false);
  const auto report = run_experiment(config);
  emit(render_report(report, parse_report_format(o.format)), o.out);
  std::cerr << "run " << report.run_id << ": " << report.aggregates.size() << " aggregates, regime "
            << to_string(report.regime) << ", " << report.wall_seconds << " s\n";
  return kOk;
}

int sweep_command(const CommonOptions& o) {
  const nlohmann::json file = o.config_file.empty() ? nlohmann::json() : read_json_file(o.config_file);
  auto base = build_config(o, file, true);
  std::vector<double> alphas = o.alphas;
  std::vector<double> ps = o.ps;
  std::vector<ExperimentKind> battery;
  for (const auto& name : o.experiments) battery.push_back(parse_experiment_kind(name));
  try {
    if (file.contains("alphas")) alphas = file.at("alphas").get<std::vector<double>>();
    if (file.contains("ps")) ps = file.at("ps").get<std::vector<double>>();
    if (file.contains("battery")) {
      battery.clear();
      for (const auto& name : file.at("battery")) battery.push_back(parse_experiment_kind(name.get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed sweep config: ") + e.what());
  }
  if (alphas.empty()) alphas.push_back(base.family.alpha);
  if (ps.empty()) ps.push_back(base.p);
  if (!battery.empty()) base.experiment = battery.front();

  const auto result = sweep(base, alphas, ps, battery);
  emit(render_sweep(result, parse_report_format(o.format)), o.out);
  const auto matrix = regime_matrix_csv(result);
  if (!o.matrix_out.empty()) write_text_file(o.matrix_out, matrix);
  std::cerr << matrix;
  return kOk;
}

struct OracleOptions {
  std::size_t paths = 100000;
  std::size_t steps = 10000;
  std::uint64_t seed = 20240601;
  std::size_t workers = 1;
  std::string out_dir = ".";
};

int oracle_build_command(const OracleOptions& o) {
  if (o.paths == 0 || o.steps == 0) throw ConfigError("--paths and --steps must be positive");
  if (o.workers == 0) throw ConfigError("--workers must be at least 1");
  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec) throw IoError("cannot create " + o.out_dir + ": " + ec.message());
  auto samples = simulate_brownian_functionals(o.paths, o.steps, o.seed, o.workers);
  const std::string stamp = std::string("selfnorm-") + SELFNORM_VERSION;
  const std::pair<LawKind, std::vector<double>*> tables[] = {{LawKind::G1, &samples.sup},
                                                             {LawKind::G2, &samples.sup_abs},
                                                             {LawKind::G3Oracle, &samples.integral_sq},
                                                             {LawKind::G4Oracle, &samples.integral_abs}};
  for (const auto& [kind, values] : tables) {
    const auto table = make_oracle_table(kind, std::move(*values), o.steps, o.seed, stamp);
    const auto path = std::filesystem::path(o.out_dir) / oracle_file_name(kind);
    write_oracle_table(table, path);
    std::cerr << "wrote " << path.string() << " (mean " << table.mean() << ")\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for self-normalized partial-sum processes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SELFNORM_VERSION);

  CommonOptions run_options;
  auto* run = app.add_subcommand("run", "Run one experiment");
  add_common(*run, run_options, false);

  CommonOptions sweep_options;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an (alpha, p) grid and print the regime matrix");
  add_common(*sweep_cmd, sweep_options, true);

  OracleOptions oracle_options;
  auto* oracle = app.add_subcommand("oracle-build", "Simulate Brownian functional oracle tables");
  oracle->add_option("--paths", oracle_options.paths, "Brownian paths")->capture_default_str();
  oracle->add_option("--steps", oracle_options.steps, "Steps per path")->capture_default_str();
  oracle->add_option("--seed", oracle_options.seed, "Master seed")->capture_default_str();
  oracle->add_option("--workers", oracle_options.workers, "Worker threads")->capture_default_str();
  oracle->add_option("--out-dir", oracle_options.out_dir, "Destination directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return run_command(run_options);
    if (*sweep_cmd) return sweep_command(sweep_options);
    if (*oracle) return oracle_build_command(oracle_options);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DependencyError& e) {
    std::cerr << "dependency error: " << e.what() << "\n";
    return kDependency;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
