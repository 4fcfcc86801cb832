#pragma once

// Classifies aggregates into the degenerate / Brownian / not-tight trichotomy.
//
// Each label has its own rule. The rules are mutually exclusive for any valid
// thresholds: the exceedance probability separates degenerate from the other
// two (exceed_low <= exceed_high) and the median max ratio separates Brownian
// from not-tight (max_ratio_low <= max_ratio_high). Tightening thresholds only
// makes each rule harder to satisfy, so it can turn a label into
// "inconclusive" but never into another label.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selfnorm/errors.hpp"
#include "selfnorm/harness/config.hpp"
#include "selfnorm/harness/report.hpp"

namespace selfnorm {

namespace stat {
inline constexpr std::string_view kMeanSqSelfnorm = "mean_sq_selfnorm";
inline constexpr std::string_view kExceed = "exceed_eps";
inline constexpr std::string_view kMeanSumSqRatio = "mean_sum_sq_ratio";
inline constexpr std::string_view kMedianAbsSelfnorm = "median_abs_selfnorm";
inline constexpr std::string_view kKsG1 = "ks_g1";
inline constexpr std::string_view kKsG2 = "ks_g2";
inline constexpr std::string_view kKsG3 = "ks_g3";
inline constexpr std::string_view kKsG4 = "ks_g4";
inline constexpr std::string_view kMedianDarling = "median_darling";
inline constexpr std::string_view kMeanDarling = "mean_darling";
inline constexpr std::string_view kMedianMaxRatio = "median_max_ratio";
inline constexpr std::string_view kMeanMaxRatio = "mean_max_ratio";
inline constexpr std::string_view kKsDarlingPrev = "ks_darling_prev";
inline constexpr std::string_view kKsMaxRatioPrev = "ks_max_ratio_prev";
inline constexpr std::string_view kChfMaxErr = "chf_max_err";
inline constexpr std::string_view kCovMaxErr = "cov_max_abs_err";
}  // namespace stat

namespace detail {

// statistic -> (n -> value), n ascending
inline std::vector<double> series_of(std::span<const Aggregate> aggregates, std::string_view statistic) {
  std::map<std::size_t, double> by_n;
  for (const auto& a : aggregates) {
    if (a.statistic == statistic) by_n[a.n] = a.value;
  }
  std::vector<double> out;
  for (const auto& [n, v] : by_n) out.push_back(v);
  return out;
}

}  // namespace detail

struct RegimeRules {
  bool degenerate = false;
  bool brownian = false;
  bool not_tight = false;
};

/// Evaluates every rule whose aggregates are present. Throws DependencyError
/// when the exceedance series, which all three rules use, is absent.
inline RegimeRules evaluate_regime_rules(std::span<const Aggregate> aggregates, const RegimeThresholds& t) {
  t.validate();
  const auto exceed = detail::series_of(aggregates, stat::kExceed);
  if (exceed.empty()) {
    throw DependencyError("regime decision needs the exceed_eps aggregates of a degenerate_scan");
  }
  RegimeRules rules;
  const double exceed_last = exceed.back();

  if (exceed.size() >= 2) {
    bool non_increasing = true;
    for (std::size_t i = 1; i < exceed.size(); ++i) non_increasing &= exceed[i] <= exceed[i - 1];
    const bool falling = exceed_last < exceed.front() || exceed_last == 0.0;
    rules.degenerate = non_increasing && falling && exceed_last < t.exceed_low;
  }

  const auto max_ratio = detail::series_of(aggregates, stat::kMedianMaxRatio);
  const auto stability = detail::series_of(aggregates, stat::kKsMaxRatioPrev);
  if (max_ratio.size() >= 2 && !stability.empty()) {
    const double ks_last = stability.back();
    rules.not_tight = exceed_last >= t.exceed_high && max_ratio[max_ratio.size() - 1] >= t.max_ratio_high &&
                      max_ratio[max_ratio.size() - 2] >= t.max_ratio_high && !std::isnan(ks_last) &&
                      ks_last <= t.stability_ks;
  }

  if (!max_ratio.empty()) {
    bool ek_ok = true;
    bool ek_present = true;
    for (auto name : {stat::kKsG1, stat::kKsG2, stat::kKsG3, stat::kKsG4}) {
      const auto ks = detail::series_of(aggregates, name);
      if (ks.empty()) {
        ek_present = false;
        break;
      }
      ek_ok &= ks.back() <= t.ek_ks_cutoff;
    }
    rules.brownian = ek_present && ek_ok && exceed_last >= t.exceed_high && max_ratio.back() < t.max_ratio_low;
  }
  return rules;
}

/// degenerate: exceedance non-increasing along n, falling overall and below
///   exceed_low at the largest n;
/// not_tight: exceedance at least exceed_high, median max ratio at least
///   max_ratio_high at the two largest n, and their two-sample KS at most
///   stability_ks;
/// brownian: exceedance at least exceed_high, median max ratio below
///   max_ratio_low, and all four EK functional KS distances at most
///   ek_ks_cutoff at the largest n;
/// inconclusive otherwise.
inline RegimeDecision decide_regime(std::span<const Aggregate> aggregates, const RegimeThresholds& thresholds) {
  const auto rules = evaluate_regime_rules(aggregates, thresholds);
  const int fired = int(rules.degenerate) + int(rules.brownian) + int(rules.not_tight);
  if (fired > 1) throw ConsistencyError("regime rules are not mutually exclusive");
  if (rules.degenerate) return RegimeDecision::Degenerate;
  if (rules.brownian) return RegimeDecision::Brownian;
  if (rules.not_tight) return RegimeDecision::NotTight;
  return RegimeDecision::Inconclusive;
}

}  // namespace selfnorm
