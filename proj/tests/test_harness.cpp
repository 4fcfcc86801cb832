#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "selfnorm/selfnorm.hpp"

using namespace selfnorm;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.family = FamilySpec::cauchy();
  c.p = 1.0;
  c.n_grid = {50, 200};
  c.reps = 64;
  c.master_seed = 17;
  c.epsilon = 0.5;
  return c;
}

RegimeThresholds shipped_thresholds() { return load_thresholds(SELFNORM_DEFAULT_THRESHOLDS); }

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

void add(std::vector<Aggregate>& out, std::string_view stat, std::vector<double> values,
         std::vector<std::size_t> ns = {100, 1000, 10000}) {
  for (std::size_t i = 0; i < values.size(); ++i) out.push_back({ns[i], std::string(stat), values[i], 0.01, 1000});
}

std::vector<Aggregate> degenerate_like() {
  std::vector<Aggregate> a;
  add(a, stat::kExceed, {0.52, 0.39, 0.31});
  add(a, stat::kMedianMaxRatio, {0.30, 0.20, 0.15});
  add(a, stat::kKsMaxRatioPrev, {std::nan(""), 0.20, 0.15});
  return a;
}

std::vector<Aggregate> brownian_like() {
  std::vector<Aggregate> a;
  add(a, stat::kExceed, {0.61, 0.60, 0.62});
  add(a, stat::kMedianMaxRatio, {0.25, 0.10, 0.04});
  add(a, stat::kKsMaxRatioPrev, {std::nan(""), 0.9, 0.9});
  for (auto name : {stat::kKsG1, stat::kKsG2, stat::kKsG3, stat::kKsG4}) add(a, name, {0.05, 0.03, 0.02});
  return a;
}

std::vector<Aggregate> not_tight_like() {
  std::vector<Aggregate> a;
  add(a, stat::kExceed, {0.76, 0.75, 0.77});
  add(a, stat::kMedianMaxRatio, {0.80, 0.79, 0.80});
  add(a, stat::kKsMaxRatioPrev, {std::nan(""), 0.04, 0.035});
  for (auto name : {stat::kKsG1, stat::kKsG2, stat::kKsG3, stat::kKsG4}) add(a, name, {0.3, 0.4, 0.5});
  return a;
}

}  // namespace

TEST(Config, RejectsInvalidValues) {
  auto c = small_config();
  c.reps = 0;
  EXPECT_THROW(run_experiment(c), ConfigError);
  c = small_config();
  c.n_grid.clear();
  EXPECT_THROW(run_experiment(c), ConfigError);
  c = small_config();
  c.n_grid = {100, 100};
  EXPECT_THROW(run_experiment(c), ConfigError);
  c = small_config();
  c.p = 2.5;
  EXPECT_THROW(run_experiment(c), ConfigError);
  c = small_config();
  c.family = FamilySpec::sym_stable(2.3);
  EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Config, JsonOverridesKeepAbsentKeys) {
  auto c = small_config();
  apply_config_json(nlohmann::json::parse(R"({"reps": 7, "family": {"kind": "SymPareto", "alpha": 1.4}})"), c);
  EXPECT_EQ(c.reps, 7u);
  EXPECT_EQ(c.family.kind, FamilyKind::SymPareto);
  EXPECT_DOUBLE_EQ(c.family.alpha, 1.4);
  EXPECT_EQ(c.n_grid, (std::vector<std::size_t>{50, 200}));
  EXPECT_EQ(c.master_seed, 17u);
  EXPECT_THROW(apply_config_json(nlohmann::json::parse(R"({"reps": "many"})"), c), ConfigError);
  EXPECT_THROW(apply_config_json(nlohmann::json::parse(R"({"experiment": "nope"})"), c), ConfigError);
}

TEST(Config, ShippedThresholdsLoad) {
  const auto t = shipped_thresholds();
  EXPECT_TRUE(t.is_set());
  EXPECT_LT(t.exceed_low, t.exceed_high);
  EXPECT_LT(t.max_ratio_low, t.max_ratio_high);
}

TEST(Report, ByteIdenticalAcrossRunsAndWorkers) {
  auto c = small_config();
  const auto a = render_report(run_experiment(c), ReportFormat::Json);
  const auto b = render_report(run_experiment(c), ReportFormat::Json);
  c.workers = 3;
  const auto d = render_report(run_experiment(c), ReportFormat::Json);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, d);
  c.master_seed = 18;
  EXPECT_NE(a, render_report(run_experiment(c), ReportFormat::Json));
}

TEST(Report, CsvHasOneRowPerAggregate) {
  const auto report = run_experiment(small_config());
  const auto csv = report_to_csv(report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
  // mean_sq_selfnorm, exceed_eps, mean_sum_sq_ratio, median_abs_selfnorm per n
  EXPECT_EQ(report.aggregates.size(), 2u * 4u);
  EXPECT_EQ(count_lines(csv), 1 + report.aggregates.size());
}

TEST(Report, EmptyAggregatesGiveHeaderOnly) {
  ExperimentReport empty;
  empty.config = small_config();
  EXPECT_EQ(report_to_csv(empty), std::string(kCsvHeader) + "\n");
}

TEST(Report, JsonRoundTrip) {
  auto c = small_config();
  c.experiment = ExperimentKind::TightnessScan;
  c.delta_grid = {0.5, 0.1};
  const auto report = run_experiment(c);
  const auto back = report_from_json(report_to_json(report));
  EXPECT_EQ(back.run_id, report.run_id);
  EXPECT_EQ(back.aggregates, report.aggregates);
  EXPECT_EQ(back.draws, report.draws);
  EXPECT_EQ(config_echo(back.config), config_echo(report.config));
  EXPECT_EQ(render_report(back, ReportFormat::Json), render_report(report, ReportFormat::Json));
}

TEST(Report, UnwritablePathIsAnIoError) {
  const auto report = run_experiment(small_config());
  EXPECT_THROW(write_report(report, ReportFormat::Csv, "/nonexistent-dir/sub/out.csv"), IoError);
}

TEST(Report, DrawCountConservation) {
  for (auto kind : {ExperimentKind::DegenerateScan, ExperimentKind::TightnessScan, ExperimentKind::FddCovariance}) {
    auto c = small_config();
    c.experiment = kind;
    c.n_grid = {10, 37, 120};
    c.reps = 9;
    EXPECT_EQ(run_experiment(c).draws, (10u + 37u + 120u) * 9u);
  }
}

TEST(Sweep, SingleCellEqualsPlainRun) {
  auto c = small_config();
  c.family = FamilySpec::sym_stable(1.3);
  c.p = 1.7;
  const std::vector<double> alphas{1.3}, ps{1.7};
  const auto result = sweep(c, alphas, ps);
  ASSERT_EQ(result.cells.size(), 1u);
  EXPECT_EQ(render_report(result.cells[0].reports[0], ReportFormat::Json),
            render_report(run_experiment(c), ReportFormat::Json));
}

TEST(Sweep, CellsUseDistinctSeeds) {
  auto c = small_config();
  c.family = FamilySpec::sym_stable(1.0);
  const std::vector<double> alphas{0.9, 1.4}, ps{1.0, 2.0};
  const auto result = sweep(c, alphas, ps);
  ASSERT_EQ(result.cells.size(), 4u);
  std::set<std::uint64_t> seeds;
  for (const auto& cell : result.cells) seeds.insert(cell.reports[0].config.master_seed);
  EXPECT_EQ(seeds.size(), 4u);
  EXPECT_EQ(result.cell(1, 0).alpha, 1.4);
  EXPECT_EQ(result.cell(1, 0).p, 1.0);
  EXPECT_THROW(sweep(c, std::vector<double>{}, ps), ConfigError);
}

TEST(Sweep, OutputLayouts) {
  auto c = small_config();
  c.family = FamilySpec::sym_stable(1.0);
  const std::vector<double> alphas{1.0}, ps{1.0, 2.0};
  const auto result = sweep(c, alphas, ps);
  const auto csv = render_sweep(result, ReportFormat::Csv);
  EXPECT_EQ(count_lines(csv), 1 + 2 * 2 * 4u);
  const auto j = nlohmann::json::parse(render_sweep(result, ReportFormat::Json));
  EXPECT_EQ(j.at("cells").size(), 2u);
  EXPECT_EQ(count_lines(regime_matrix_csv(result)), 3u);
}

TEST(Regime, ReferenceShapes) {
  const auto t = shipped_thresholds();
  EXPECT_EQ(decide_regime(degenerate_like(), t), RegimeDecision::Degenerate);
  EXPECT_EQ(decide_regime(brownian_like(), t), RegimeDecision::Brownian);
  EXPECT_EQ(decide_regime(not_tight_like(), t), RegimeDecision::NotTight);
}

TEST(Regime, MissingExceedanceIsADependencyError) {
  auto a = brownian_like();
  std::erase_if(a, [](const Aggregate& x) { return x.statistic == stat::kExceed; });
  EXPECT_THROW(decide_regime(a, shipped_thresholds()), DependencyError);
}

TEST(Regime, UnsetThresholdsAreRejected) {
  EXPECT_ANY_THROW(decide_regime(brownian_like(), RegimeThresholds{}));
}

TEST(Regime, MissingEkFunctionalsBlockBrownian) {
  auto a = brownian_like();
  std::erase_if(a, [](const Aggregate& x) { return x.statistic == stat::kKsG3; });
  EXPECT_EQ(decide_regime(a, shipped_thresholds()), RegimeDecision::Inconclusive);
}

// Tightening a threshold can only keep a label or drop it to inconclusive.
TEST(Regime, TighteningThresholdsNeverSwitchesLabels) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto base = shipped_thresholds();
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Aggregate> a;
    add(a, stat::kExceed, {unif(rng), unif(rng), unif(rng)});
    add(a, stat::kMedianMaxRatio, {unif(rng), unif(rng), unif(rng)});
    add(a, stat::kKsMaxRatioPrev, {std::nan(""), 0.2 * unif(rng), 0.2 * unif(rng)});
    for (auto name : {stat::kKsG1, stat::kKsG2, stat::kKsG3, stat::kKsG4}) {
      add(a, name, {0.1 * unif(rng), 0.1 * unif(rng), 0.1 * unif(rng)});
    }
    const auto loose = decide_regime(a, base);
    auto tight = base;
    const double s = 0.5 * unif(rng);
    tight.exceed_low -= s * 0.1;
    tight.exceed_high += s * 0.1;
    tight.max_ratio_low -= s * 0.1;
    tight.max_ratio_high += s * 0.1;
    tight.stability_ks *= 1 - s;
    tight.ek_ks_cutoff *= 1 - s;
    const auto strict = decide_regime(a, tight);
    EXPECT_TRUE(strict == loose || strict == RegimeDecision::Inconclusive);
  }
}

TEST(Experiments, EkWithoutOracleNamesTheBuildCommand) {
  auto c = small_config();
  c.experiment = ExperimentKind::EkFunctionals;
  c.oracle_dir = (std::filesystem::temp_directory_path() / "selfnorm_no_oracle_here").string();
  try {
    run_experiment(c);
    FAIL() << "expected DependencyError";
  } catch (const DependencyError& e) {
    EXPECT_NE(std::string(e.what()).find("oracle-build"), std::string::npos);
  }
}

TEST(Experiments, ChfCompareRejectsInvalidIndices) {
  auto c = small_config();
  c.experiment = ExperimentKind::ChfCompare;
  c.p = 1.0;
  EXPECT_THROW(run_experiment(c), ConfigError);
  c.family = FamilySpec::gaussian();
  c.p = 2.0;
  EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Experiments, FddCovarianceOnGaussianData) {
  auto c = small_config();
  c.family = FamilySpec::gaussian();
  c.p = 2.0;
  c.experiment = ExperimentKind::FddCovariance;
  c.t_grid = {0.5, 1.0};
  c.n_grid = {400};
  c.reps = 2000;
  const auto report = run_experiment(c);
  const auto* cov = report.find(400, "cov_0.5_1");
  ASSERT_NE(cov, nullptr);
  EXPECT_NEAR(cov->value, 0.5, 4 * cov->std_error);
  ASSERT_NE(report.find(400, stat::kCovMaxErr), nullptr);
  ASSERT_NE(report.find(400, "ks_y_1"), nullptr);
}

// The linear interpolation between grid points changes Y by at most one
// increment, max|X_i| / V, which vanishes in the Brownian regime.
TEST(Experiments, InterpolationGapIsNegligiblePerReplication) {
  for (std::size_t r = 0; r < 50; ++r) {
    const auto batch = sample_family(FamilySpec::gaussian(), SeededStream(23, r), 20000);
    const ProcessPath path(batch, 2.0);
    const double gap = max_interpolation_gap(path, 8);
    EXPECT_LE(gap, max_ratio(batch, 2.0) * (1 + 1e-12));
    EXPECT_LT(gap, 0.05);
  }
}

TEST(Experiments, SumSqRatioShrinksForCauchy) {
  auto c = small_config();
  c.n_grid = {100, 1000, 10000};
  c.reps = 1000;
  const auto report = run_experiment(c);
  for (std::size_t i = 1; i < c.n_grid.size(); ++i) {
    const auto* prev = report.find(c.n_grid[i - 1], stat::kMeanSumSqRatio);
    const auto* cur = report.find(c.n_grid[i], stat::kMeanSumSqRatio);
    ASSERT_TRUE(prev && cur);
    EXPECT_LE(cur->value, prev->value + 2 * std::hypot(cur->std_error, prev->std_error));
  }
}

TEST(Experiments, SelfNormalizedSquareDecreasesForCauchyWithPEqualAlpha) {
  auto c = small_config();
  c.n_grid = {100, 1000, 10000};
  c.reps = 2000;
  const auto series = run_experiment(c).series(stat::kMeanSqSelfnorm);
  ASSERT_EQ(series.size(), 3u);
  EXPECT_GT(series[0], series[1]);
  EXPECT_GT(series[1], series[2]);
}
