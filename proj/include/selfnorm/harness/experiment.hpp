#pragma once

// Monte Carlo driver. For every n in the grid, replication r draws its sample
// from SeededStream(master_seed, r); per-replication statistics land in
// slots indexed by r and are aggregated in index order, so the report does not
// depend on the worker count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "selfnorm/diagnostics.hpp"
#include "selfnorm/errors.hpp"
#include "selfnorm/harness/config.hpp"
#include "selfnorm/harness/regime.hpp"
#include "selfnorm/harness/report.hpp"
#include "selfnorm/limit_laws.hpp"
#include "selfnorm/oracle_io.hpp"
#include "selfnorm/parallel.hpp"
#include "selfnorm/process.hpp"
#include "selfnorm/sampler.hpp"

namespace selfnorm {

/// Asymptotic 5% critical value of the one-sample KS distance.
inline double ks_critical_value(std::size_t reps) { return 1.36 / std::sqrt(static_cast<double>(reps)); }

namespace detail {

struct Summary {
  double mean = 0.0;
  double std_error = 0.0;
};

inline Summary summarize(std::span<const double> xs) {
  const auto m = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= m;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = xs.size() > 1 ? std::sqrt(ss / (m - 1.0)) : std::numeric_limits<double>::quiet_NaN();
  return {mean, sd / std::sqrt(m)};
}

inline double quantile_of_sorted(std::span<const double> sorted, double position) {
  const double clamped = std::clamp(position, 0.0, static_cast<double>(sorted.size() - 1));
  const auto lo = static_cast<std::size_t>(std::floor(clamped));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (clamped - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Median with a distribution-free standard error from the order statistics
// at R/2 +- sqrt(R)/2.
inline Summary median_summary(std::span<const double> xs) {
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  const double centre = (m - 1.0) / 2.0;
  const double half_width = std::sqrt(m) / 2.0;
  return {quantile_of_sorted(sorted, centre),
          (quantile_of_sorted(sorted, centre + half_width) - quantile_of_sorted(sorted, centre - half_width)) / 2.0};
}

inline Summary proportion(std::span<const double> indicators) {
  const auto s = summarize(indicators);
  const auto m = static_cast<double>(indicators.size());
  return {s.mean, std::sqrt(s.mean * (1.0 - s.mean) / m)};
}

// Short label for a grid value inside a statistic name, e.g. 0.25 -> "0.25".
inline std::string label(double v) { return format_double(v); }

struct OracleLaws {
  ReferenceLaw g3;
  ReferenceLaw g4;
  OracleProvenance provenance;
};

inline OracleLaws load_oracle_laws(const std::string& oracle_dir) {
  const std::filesystem::path dir = oracle_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(oracle_dir);
  auto load = [&](LawKind kind) {
    const auto path = dir / oracle_file_name(kind);
    if (!std::filesystem::exists(path)) {
      throw DependencyError("oracle table " + path.string() +
                            " is missing; build it with `selfnorm oracle-build --out-dir " + dir.string() + "`");
    }
    return read_oracle_table(path);
  };
  auto g3 = load(LawKind::G3Oracle);
  auto g4 = load(LawKind::G4Oracle);
  if (g3.kind != LawKind::G3Oracle || g4.kind != LawKind::G4Oracle) {
    throw DependencyError("oracle tables in " + dir.string() + " carry the wrong kind");
  }
  OracleProvenance provenance{g3.paths, g3.steps, g3.seed};
  return {ReferenceLaw::from_table(std::move(g3)), ReferenceLaw::from_table(std::move(g4)), provenance};
}

// Per-replication statistic columns: columns[c][r].
using Columns = std::vector<std::vector<double>>;

class Runner {
 public:
  explicit Runner(const ExperimentConfig& config) : config_(config) {}

  ExperimentReport run() {
    const auto started = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.config = config_;
    report.run_id = make_run_id(config_);
    prepare(report);
    Columns previous;
    for (std::size_t n : config_.n_grid) {
      Columns columns(column_count(), std::vector<double>(config_.reps));
      parallel_for(config_.reps, config_.workers, [&](std::size_t r) {
        const auto batch = sample_family(config_.family, SeededStream(config_.master_seed, r), n);
        record(batch, r, columns);
      });
      report.draws += static_cast<std::uint64_t>(n) * config_.reps;
      aggregate(n, columns, previous, report.aggregates);
      previous = std::move(columns);
    }
    if (config_.thresholds.is_set()) {
      try {
        report.regime = decide_regime(report.aggregates, config_.thresholds);
      } catch (const DependencyError&) {
        report.regime = RegimeDecision::Inconclusive;
      }
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
  }

 private:
  const ExperimentConfig& config_;
  std::optional<OracleLaws> oracles_;
  std::vector<std::complex<double>> chf_limits_;
  double attraction_ = 2.0;

  void prepare(ExperimentReport& report) {
    attraction_ = config_.family.attraction_index();
    switch (config_.experiment) {
      case ExperimentKind::EkFunctionals:
        oracles_ = load_oracle_laws(config_.oracle_dir);
        report.oracle = oracles_->provenance;
        break;
      case ExperimentKind::ChfCompare: {
        if (!(attraction_ < 2.0)) throw ConfigError("chf_compare needs a family with attraction index below 2");
        if (!(config_.p > attraction_)) throw ConfigError("chf_compare needs p above the attraction index");
        TailConstants tails;
        try {
          tails = tail_constants(config_.family);
        } catch (const DomainError& e) {
          throw ConfigError(e.what());
        }
        for (double u : config_.u_grid) {
          for (double w : config_.w_grid) {
            chf_limits_.push_back(limit_chf(u, w, attraction_, config_.p, tails));
          }
        }
        break;
      }
      default: break;
    }
  }

  std::size_t column_count() const {
    switch (config_.experiment) {
      case ExperimentKind::DegenerateScan: return 2;  // S/V, sum_sq_ratio
      case ExperimentKind::EkFunctionals: return 4;
      case ExperimentKind::FddCovariance: return config_.t_grid.size();
      case ExperimentKind::TightnessScan: return 2 + config_.delta_grid.size();
      case ExperimentKind::ChfCompare: return 2;  // A, B
    }
    return 0;
  }

  void record(const SampleBatch& batch, std::size_t r, Columns& columns) const {
    switch (config_.experiment) {
      case ExperimentKind::DegenerateScan: {
        const auto norm = p_norm(batch, config_.p);
        if (norm.degenerate()) throw DomainError("all-zero sample");
        columns[0][r] = partial_sums(batch).last() / norm.value;
        columns[1][r] = sum_sq_ratio(batch, attraction_);
        break;
      }
      case ExperimentKind::EkFunctionals: {
        const auto ek = ek_functionals(batch, config_.p);
        columns[0][r] = ek.max_sn;
        columns[1][r] = ek.max_abs_sn;
        columns[2][r] = ek.mean_sq;
        columns[3][r] = ek.mean_abs;
        break;
      }
      case ExperimentKind::FddCovariance: {
        const ProcessPath path(batch, config_.p);
        for (std::size_t i = 0; i < config_.t_grid.size(); ++i) columns[i][r] = path.at(config_.t_grid[i]);
        break;
      }
      case ExperimentKind::TightnessScan: {
        columns[0][r] = darling_ratio(batch);
        columns[1][r] = max_ratio(batch, config_.p);
        if (!config_.delta_grid.empty()) {
          const ProcessPath path(batch, config_.p);
          const auto omega = modulus_profile(path, config_.delta_grid, config_.grid_refinement);
          for (std::size_t i = 0; i < omega.size(); ++i) columns[2 + i][r] = omega[i];
        }
        break;
      }
      case ExperimentKind::ChfCompare: {
        const auto n = static_cast<double>(batch.n());
        columns[0][r] = partial_sums(batch).last() / std::pow(n, 1.0 / attraction_);
        columns[1][r] = p_norm(batch, config_.p).power_sum / std::pow(n, config_.p / attraction_);
        break;
      }
    }
  }

  void aggregate(std::size_t n, const Columns& columns, const Columns& previous, std::vector<Aggregate>& out) const {
    const std::size_t reps = config_.reps;
    auto push = [&](std::string statistic, double value, double std_error) {
      out.push_back({n, std::move(statistic), value, std_error, reps});
    };
    constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

    switch (config_.experiment) {
      case ExperimentKind::DegenerateScan: {
        std::vector<double> squares, exceed, magnitudes;
        for (double y : columns[0]) {
          squares.push_back(y * y);
          exceed.push_back(std::abs(y) > config_.epsilon ? 1.0 : 0.0);
          magnitudes.push_back(std::abs(y));
        }
        const auto sq = summarize(squares);
        const auto ex = proportion(exceed);
        const auto ratio = summarize(columns[1]);
        const auto med = median_summary(magnitudes);
        push(std::string(stat::kMeanSqSelfnorm), sq.mean, sq.std_error);
        push(std::string(stat::kExceed), ex.mean, ex.std_error);
        push(std::string(stat::kMeanSumSqRatio), ratio.mean, ratio.std_error);
        push(std::string(stat::kMedianAbsSelfnorm), med.mean, med.std_error);
        break;
      }
      case ExperimentKind::EkFunctionals: {
        const double critical = ks_critical_value(reps);
        push(std::string(stat::kKsG1), ks_statistic(columns[0], ReferenceLaw::g1()), critical);
        push(std::string(stat::kKsG2), ks_statistic(columns[1], ReferenceLaw::g2()), critical);
        push(std::string(stat::kKsG3), ks_statistic(columns[2], oracles_->g3), critical);
        push(std::string(stat::kKsG4), ks_statistic(columns[3], oracles_->g4), critical);
        break;
      }
      case ExperimentKind::FddCovariance: {
        const auto& grid = config_.t_grid;
        std::vector<double> means;
        for (const auto& c : columns) means.push_back(summarize(c).mean);
        double max_err = 0.0;
        double max_err_se = kNaN;
        bool first_entry = true;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          for (std::size_t j = i; j < grid.size(); ++j) {
            std::vector<double> products(reps);
            for (std::size_t r = 0; r < reps; ++r) {
              products[r] = (columns[i][r] - means[i]) * (columns[j][r] - means[j]);
            }
            const auto s = summarize(products);
            const double cov = reps > 1 ? s.mean * static_cast<double>(reps) / static_cast<double>(reps - 1) : kNaN;
            push("cov_" + label(grid[i]) + "_" + label(grid[j]), cov, s.std_error);
            const double err = std::abs(cov - std::min(grid[i], grid[j]));
            if (first_entry || !(err <= max_err)) {
              max_err = err;
              max_err_se = s.std_error;
            }
            first_entry = false;
          }
        }
        push(std::string(stat::kCovMaxErr), max_err, max_err_se);
        const double critical = ks_critical_value(reps);
        for (std::size_t i = 0; i < grid.size(); ++i) {
          push("ks_y_" + label(grid[i]), ks_statistic(columns[i], ReferenceLaw::scaled_normal(std::sqrt(grid[i]))),
               critical);
        }
        break;
      }
      case ExperimentKind::TightnessScan: {
        const auto darling_median = median_summary(columns[0]);
        const auto darling_mean = summarize(columns[0]);
        const auto ratio_median = median_summary(columns[1]);
        const auto ratio_mean = summarize(columns[1]);
        push(std::string(stat::kMedianDarling), darling_median.mean, darling_median.std_error);
        push(std::string(stat::kMeanDarling), darling_mean.mean, darling_mean.std_error);
        push(std::string(stat::kMedianMaxRatio), ratio_median.mean, ratio_median.std_error);
        push(std::string(stat::kMeanMaxRatio), ratio_mean.mean, ratio_mean.std_error);
        const double critical = 1.36 * std::sqrt(2.0 / static_cast<double>(reps));
        const bool first = previous.empty();
        push(std::string(stat::kKsDarlingPrev), first ? kNaN : ks_two_sample(previous[0], columns[0]), critical);
        push(std::string(stat::kKsMaxRatioPrev), first ? kNaN : ks_two_sample(previous[1], columns[1]), critical);
        for (std::size_t i = 0; i < config_.delta_grid.size(); ++i) {
          std::vector<double> exceed;
          for (double w : columns[2 + i]) exceed.push_back(w >= config_.epsilon ? 1.0 : 0.0);
          const auto p = proportion(exceed);
          push("omega_exceed_" + label(config_.delta_grid[i]), p.mean, p.std_error);
        }
        break;
      }
      case ExperimentKind::ChfCompare: {
        double max_err = 0.0;
        double max_err_se = kNaN;
        std::size_t k = 0;
        for (double u : config_.u_grid) {
          for (double w : config_.w_grid) {
            const auto empirical = empirical_chf(columns[0], columns[1], u, w);
            const double err = std::abs(empirical - chf_limits_[k++]);
            const double se = std::sqrt(std::max(0.0, 1.0 - std::norm(empirical)) / static_cast<double>(reps));
            push("chf_err_u" + label(u) + "_w" + label(w), err, se);
            if (k == 1 || err > max_err) {
              max_err = err;
              max_err_se = se;
            }
          }
        }
        push(std::string(stat::kChfMaxErr), max_err, max_err_se);
        break;
      }
    }
  }
};

}  // namespace detail

/// Runs `config` and classifies the regime when thresholds are set. Throws
/// ConfigError for an invalid config and DependencyError when ek_functionals
/// cannot find its oracle tables.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  return detail::Runner(config).run();
}

}  // namespace selfnorm
