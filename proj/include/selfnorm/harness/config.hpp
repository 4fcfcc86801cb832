#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "selfnorm/errors.hpp"
#include "selfnorm/sampler.hpp"

namespace selfnorm {

enum class ExperimentKind { DegenerateScan, EkFunctionals, FddCovariance, TightnessScan, ChfCompare };

inline std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::DegenerateScan: return "degenerate_scan";
    case ExperimentKind::EkFunctionals: return "ek_functionals";
    case ExperimentKind::FddCovariance: return "fdd_covariance";
    case ExperimentKind::TightnessScan: return "tightness_scan";
    case ExperimentKind::ChfCompare: return "chf_compare";
  }
  return "?";
}

inline ExperimentKind parse_experiment_kind(std::string_view name) {
  for (auto kind : {ExperimentKind::DegenerateScan, ExperimentKind::EkFunctionals,
                    ExperimentKind::FddCovariance, ExperimentKind::TightnessScan,
                    ExperimentKind::ChfCompare}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

/// Cutoffs of the regime classifier. "Tightening" means lowering the *_low
/// values, stability_ks and ek_ks_cutoff, and raising the *_high values.
///
/// There are no built-in values: fields start unset (NaN) and are loaded from
/// the shipped defaults file config/regime_thresholds.json or a user file.
struct RegimeThresholds {
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  /// Degenerate: last exceedance P(|S_n/V| > eps) strictly below this.
  double exceed_low = kUnset;
  /// Brownian and not-tight: last exceedance at least this.
  double exceed_high = kUnset;
  /// Brownian: median max_i|X_i|/V at the largest n strictly below this.
  double max_ratio_low = kUnset;
  /// Not tight: median max ratio at the two largest n at least this.
  double max_ratio_high = kUnset;
  /// Not tight: two-sample KS between the max-ratio samples at the two largest n.
  double stability_ks = kUnset;
  /// Brownian: every EK functional KS distance at the largest n.
  double ek_ks_cutoff = kUnset;

  bool is_set() const {
    for (double v : {exceed_low, exceed_high, max_ratio_low, max_ratio_high, stability_ks, ek_ks_cutoff}) {
      if (std::isnan(v)) return false;
    }
    return true;
  }

  void validate() const {
    for (double v : {exceed_low, exceed_high, max_ratio_low, max_ratio_high, stability_ks, ek_ks_cutoff}) {
      if (!std::isfinite(v) || v < 0.0) throw ConfigError("regime thresholds must be finite and non-negative");
    }
    if (exceed_low > exceed_high) throw ConfigError("exceed_low must not exceed exceed_high");
    if (max_ratio_low > max_ratio_high) throw ConfigError("max_ratio_low must not exceed max_ratio_high");
  }

  friend bool operator==(const RegimeThresholds& a, const RegimeThresholds& b) {
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return same(a.exceed_low, b.exceed_low) && same(a.exceed_high, b.exceed_high) &&
           same(a.max_ratio_low, b.max_ratio_low) && same(a.max_ratio_high, b.max_ratio_high) &&
           same(a.stability_ks, b.stability_ks) && same(a.ek_ks_cutoff, b.ek_ks_cutoff);
  }
};

struct ExperimentConfig {
  FamilySpec family = FamilySpec::gaussian();
  double p = 2.0;
  std::vector<std::size_t> n_grid{100, 1000};
  std::size_t reps = 100;
  std::uint64_t master_seed = 1;
  ExperimentKind experiment = ExperimentKind::DegenerateScan;
  std::vector<double> t_grid{0.25, 0.5, 0.75, 1.0};
  double epsilon = 0.1;
  std::vector<double> delta_grid{0.5, 0.2, 0.1, 0.05};
  /// Grid refinement for the modulus of continuity.
  std::size_t grid_refinement = 1;
  std::vector<double> u_grid{-2.0, -1.0, 0.0, 1.0, 2.0};
  std::vector<double> w_grid{0.0, 0.5, 1.0};
  /// Directory holding g3.oracle / g4.oracle (ek_functionals only).
  std::string oracle_dir;
  RegimeThresholds thresholds;
  /// Does not influence any output.
  std::size_t workers = 1;

  void validate() const {
    try {
      family.validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    if (!(p > 0.0 && p <= 2.0)) throw ConfigError("p must lie in (0,2]");
    if (n_grid.empty()) throw ConfigError("n_grid must not be empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      if (n_grid[i] == 0) throw ConfigError("n_grid entries must be positive");
      if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ConfigError("n_grid must be strictly increasing");
    }
    if (reps == 0) throw ConfigError("reps must be at least 1");
    if (t_grid.empty()) throw ConfigError("t_grid must not be empty");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      if (!(t_grid[i] > 0.0 && t_grid[i] <= 1.0)) throw ConfigError("t_grid must lie in (0,1]");
      if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw ConfigError("t_grid must be strictly increasing");
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
    for (double d : delta_grid) {
      if (!(d > 0.0 && d <= 1.0)) throw ConfigError("delta_grid must lie in (0,1]");
    }
    if (grid_refinement == 0) throw ConfigError("grid_refinement must be positive");
    if (workers == 0) throw ConfigError("workers must be at least 1");
    if (thresholds.is_set()) thresholds.validate();
  }
};

// JSON mapping --------------------------------------------------------------

/// NaN is written as null.
inline nlohmann::json number_or_null(double v) {
  return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
}

inline double number_or_nan(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline void to_json(nlohmann::json& j, const RegimeThresholds& t) {
  j = {{"exceed_low", number_or_null(t.exceed_low)},
       {"exceed_high", number_or_null(t.exceed_high)},
       {"max_ratio_low", number_or_null(t.max_ratio_low)},
       {"max_ratio_high", number_or_null(t.max_ratio_high)},
       {"stability_ks", number_or_null(t.stability_ks)},
       {"ek_ks_cutoff", number_or_null(t.ek_ks_cutoff)}};
}

inline void from_json(const nlohmann::json& j, RegimeThresholds& t) {
  auto field = [&](const char* key, double& target) {
    if (j.contains(key)) target = number_or_nan(j.at(key));
  };
  field("exceed_low", t.exceed_low);
  field("exceed_high", t.exceed_high);
  field("max_ratio_low", t.max_ratio_low);
  field("max_ratio_high", t.max_ratio_high);
  field("stability_ks", t.stability_ks);
  field("ek_ks_cutoff", t.ek_ks_cutoff);
}

inline void to_json(nlohmann::json& j, const FamilySpec& f) {
  j = {{"kind", std::string(to_string(f.kind))}, {"alpha", f.alpha}, {"scale", f.scale}};
}

inline void from_json(const nlohmann::json& j, FamilySpec& f) {
  const auto name = j.at("kind").get<std::string>();
  f.kind = parse_family_kind(name);
  const double implied = f.kind == FamilyKind::Gaussian ? 2.0 : name == "Cauchy" ? 1.0 : f.alpha;
  f.alpha = j.value("alpha", implied);
  f.scale = j.value("scale", 1.0);
}

/// Canonical echo; `workers` and `oracle_dir` are left out because they do
/// not influence results.
inline nlohmann::json config_echo(const ExperimentConfig& c) {
  return {{"family", c.family},
          {"p", c.p},
          {"n_grid", c.n_grid},
          {"reps", c.reps},
          {"master_seed", c.master_seed},
          {"experiment", std::string(to_string(c.experiment))},
          {"t_grid", c.t_grid},
          {"epsilon", c.epsilon},
          {"delta_grid", c.delta_grid},
          {"grid_refinement", c.grid_refinement},
          {"u_grid", c.u_grid},
          {"w_grid", c.w_grid},
          {"thresholds", c.thresholds}};
}

/// Overlays every key present in `j` onto `c`; absent keys keep their value.
inline void apply_config_json(const nlohmann::json& j, ExperimentConfig& c) {
  try {
    if (j.contains("family")) {
      FamilySpec f = c.family;
      from_json(j.at("family"), f);
      c.family = f;
    }
    if (j.contains("p")) c.p = j.at("p").get<double>();
    if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    if (j.contains("reps")) c.reps = j.at("reps").get<std::size_t>();
    if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("experiment")) c.experiment = parse_experiment_kind(j.at("experiment").get<std::string>());
    if (j.contains("t_grid")) c.t_grid = j.at("t_grid").get<std::vector<double>>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("delta_grid")) c.delta_grid = j.at("delta_grid").get<std::vector<double>>();
    if (j.contains("grid_refinement")) c.grid_refinement = j.at("grid_refinement").get<std::size_t>();
    if (j.contains("u_grid")) c.u_grid = j.at("u_grid").get<std::vector<double>>();
    if (j.contains("w_grid")) c.w_grid = j.at("w_grid").get<std::vector<double>>();
    if (j.contains("oracle_dir")) c.oracle_dir = j.at("oracle_dir").get<std::string>();
    if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
    if (j.contains("thresholds")) {
      RegimeThresholds t = c.thresholds;
      from_json(j.at("thresholds"), t);
      c.thresholds = t;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  apply_config_json(j, c);
  return c;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

/// Loads the shipped thresholds file (its "thresholds" object, or the root).
inline RegimeThresholds load_thresholds(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  RegimeThresholds t;
  from_json(j.contains("thresholds") ? j.at("thresholds") : j, t);
  t.validate();
  return t;
}

}  // namespace selfnorm
