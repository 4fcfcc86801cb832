// Prints a small (alpha, p) regime map for symmetric stable samples.
//
//   regime_map_demo [thresholds.json]
//
// A coarse oracle table (2000 paths) is built in a temporary directory first;
// the acceptance suite uses 10^5 paths.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <vector>

#include "selfnorm/selfnorm.hpp"

int main(int argc, char** argv) {
  using namespace selfnorm;
  const std::filesystem::path thresholds = argc > 1 ? argv[1] : "config/regime_thresholds.json";

  const auto oracle_dir = std::filesystem::temp_directory_path() / "selfnorm_demo_oracle";
  std::filesystem::create_directories(oracle_dir);
  auto paths = simulate_brownian_functionals(2000, 1000, 99);
  write_oracle_table(make_oracle_table(LawKind::G3Oracle, std::move(paths.integral_sq), 1000, 99),
                     oracle_dir / oracle_file_name(LawKind::G3Oracle));
  write_oracle_table(make_oracle_table(LawKind::G4Oracle, std::move(paths.integral_abs), 1000, 99),
                     oracle_dir / oracle_file_name(LawKind::G4Oracle));

  ExperimentConfig base;
  base.family = FamilySpec::sym_stable(1.0);
  base.n_grid = {100, 1000, 5000};
  base.reps = 300;
  base.master_seed = 2024;
  base.epsilon = 0.5;
  base.delta_grid = {0.5};
  base.oracle_dir = oracle_dir.string();
  base.thresholds = load_thresholds(thresholds);

  const std::vector<double> grid{0.8, 1.5, 2.0};
  const std::vector<ExperimentKind> battery{ExperimentKind::DegenerateScan, ExperimentKind::TightnessScan,
                                            ExperimentKind::EkFunctionals};
  const auto result = sweep(base, grid, grid, battery);

  std::cout << "alpha \\ p";
  for (double p : grid) std::cout << std::setw(14) << p;
  std::cout << "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::cout << std::setw(9) << grid[i];
    for (std::size_t j = 0; j < grid.size(); ++j) std::cout << std::setw(14) << to_string(result.cell(i, j).decision);
    std::cout << "\n";
  }
}
