#pragma once

// Cartesian (alpha, p) sweeps producing the regime matrix.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "selfnorm/errors.hpp"
#include "selfnorm/harness/config.hpp"
#include "selfnorm/harness/experiment.hpp"
#include "selfnorm/harness/regime.hpp"
#include "selfnorm/harness/report.hpp"
#include "selfnorm/philox.hpp"

namespace selfnorm {

/// Seed of sweep cell `index`. Cell 0 keeps the base seed, so a 1x1 sweep is
/// the plain run; mix64 is a bijection, so cells never share a seed.
inline std::uint64_t sweep_cell_seed(std::uint64_t base_seed, std::size_t index) {
  if (index == 0) return base_seed;
  return base_seed ^ mix64(static_cast<std::uint64_t>(index));
}

inline ExperimentConfig sweep_cell_config(const ExperimentConfig& base, double alpha, double p, std::size_t index) {
  ExperimentConfig cell = base;
  cell.family.alpha = alpha;
  cell.p = p;
  cell.master_seed = sweep_cell_seed(base.master_seed, index);
  return cell;
}

struct SweepCell {
  double alpha = 0.0;
  double p = 0.0;
  /// One report per experiment of the battery, in battery order.
  std::vector<ExperimentReport> reports;
  RegimeDecision decision = RegimeDecision::Inconclusive;
};

struct SweepResult {
  std::vector<double> alphas;
  std::vector<double> ps;
  /// Row-major over (alpha, p).
  std::vector<SweepCell> cells;

  const SweepCell& cell(std::size_t alpha_index, std::size_t p_index) const {
    return cells.at(alpha_index * ps.size() + p_index);
  }

  std::vector<ExperimentReport> reports() const {
    std::vector<ExperimentReport> out;
    for (const auto& c : cells) out.insert(out.end(), c.reports.begin(), c.reports.end());
    return out;
  }
};

/// Runs every experiment of `battery` (default: base.experiment) at every
/// (alpha, p) cell. The cell decision uses the merged aggregates of the
/// battery and is stored in each of the cell's reports.
inline SweepResult sweep(const ExperimentConfig& base, std::span<const double> alphas, std::span<const double> ps,
                         std::span<const ExperimentKind> battery = {}) {
  if (alphas.empty() || ps.empty()) throw ConfigError("sweep needs nonempty alpha and p lists");
  std::vector<ExperimentKind> kinds(battery.begin(), battery.end());
  if (kinds.empty()) kinds.push_back(base.experiment);

  SweepResult result;
  result.alphas.assign(alphas.begin(), alphas.end());
  result.ps.assign(ps.begin(), ps.end());
  std::size_t index = 0;
  for (double alpha : alphas) {
    for (double p : ps) {
      SweepCell cell{alpha, p, {}, RegimeDecision::Inconclusive};
      auto config = sweep_cell_config(base, alpha, p, index++);
      std::vector<Aggregate> merged;
      for (auto kind : kinds) {
        config.experiment = kind;
        cell.reports.push_back(run_experiment(config));
        const auto& a = cell.reports.back().aggregates;
        merged.insert(merged.end(), a.begin(), a.end());
      }
      if (base.thresholds.is_set()) {
        try {
          cell.decision = decide_regime(merged, base.thresholds);
        } catch (const DependencyError&) {
          cell.decision = RegimeDecision::Inconclusive;
        }
      }
      for (auto& r : cell.reports) r.regime = cell.decision;
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

/// "alpha,p,decision" rows.
inline std::string regime_matrix_csv(const SweepResult& result) {
  std::string out = "alpha,p,decision\n";
  for (const auto& c : result.cells) {
    out += format_double(c.alpha) + "," + format_double(c.p) + "," + std::string(to_string(c.decision)) + "\n";
  }
  return out;
}

inline std::string render_sweep(const SweepResult& result, ReportFormat format) {
  if (format == ReportFormat::Csv) {
    std::string out(kCsvHeader);
    out += "\n";
    for (const auto& c : result.cells) {
      for (const auto& r : c.reports) append_csv_rows(r, out);
    }
    return out;
  }
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : result.cells) {
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : c.reports) reports.push_back(report_to_json(r));
    cells.push_back({{"alpha", c.alpha},
                     {"p", c.p},
                     {"decision", std::string(to_string(c.decision))},
                     {"reports", std::move(reports)}});
  }
  nlohmann::json j = {{"format_version", kReportFormatVersion}, {"alphas", result.alphas}, {"ps", result.ps},
                      {"cells", std::move(cells)}};
  return j.dump(2) + "\n";
}

}  // namespace selfnorm
