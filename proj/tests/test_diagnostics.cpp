#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "selfnorm/diagnostics.hpp"
#include "selfnorm/sampler.hpp"

using namespace selfnorm;

namespace {

SampleBatch batch_of(std::vector<double> v) { return SampleBatch::from_values(std::move(v)); }

std::vector<double> heavy_values(std::mt19937_64& rng, std::size_t n) {
  std::student_t_distribution<double> t(0.7);
  std::vector<double> v(n);
  for (auto& x : v) x = t(rng);
  return v;
}

}  // namespace

TEST(MaxRatio, Examples) {
  EXPECT_DOUBLE_EQ(max_ratio(batch_of({3, 4}), 2.0), 0.8);
  EXPECT_DOUBLE_EQ(max_ratio(batch_of({0, -7, 0}), 1.3), 1.0);
  EXPECT_DOUBLE_EQ(max_ratio(batch_of({1, 1, 1, 1}), 1.0), 0.25);
  EXPECT_THROW(max_ratio(batch_of({0, 0}), 2.0), DomainError);
}

TEST(MaxRatio, PowerIdentity) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto values = heavy_values(rng, 40);
    for (double p : {0.6, 1.0, 1.9}) {
      const auto norm = p_norm(std::span<const double>(values), p);
      const double lhs = std::pow(max_ratio(std::span<const double>(values), p), p) * norm.power_sum;
      EXPECT_NEAR(lhs, std::pow(norm.max_abs, p), 1e-12 * std::pow(norm.max_abs, p));
    }
  }
}

TEST(DarlingRatio, Examples) {
  EXPECT_DOUBLE_EQ(darling_ratio(batch_of({3, 4})), 0.64);
  EXPECT_DOUBLE_EQ(darling_ratio(batch_of({2, -2, 2, -2, 2})), 0.2);
  EXPECT_THROW(darling_ratio(batch_of({0.0})), DomainError);
}

TEST(DarlingRatio, BoundedBelowByOneOverN) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto values = heavy_values(rng, 30);
    const double d = darling_ratio(std::span<const double>(values));
    EXPECT_GE(d, 1.0 / 30 * (1 - 1e-12));
    EXPECT_LE(d, 1.0);
  }
}

// Limit of max X^2 / sum X^2 for Cauchy data through the LePage series: with
// Gamma_k the arrival times of a unit Poisson process, the ratio converges to
// Gamma_1^-2 / sum_k Gamma_k^-2.
TEST(DarlingRatio, CauchyMeanMatchesLePageOracle) {
  std::mt19937_64 rng(20240601);
  std::exponential_distribution<double> expo(1.0);
  constexpr int oracle_reps = 20000;
  constexpr int terms = 200;
  double oracle = 0;
  for (int r = 0; r < oracle_reps; ++r) {
    double gamma = 0, sum = 0, first = 0;
    for (int k = 0; k < terms; ++k) {
      gamma += expo(rng);
      const double term = 1.0 / (gamma * gamma);
      if (k == 0) first = term;
      sum += term;
    }
    // remaining terms: sum_{k > K} Gamma_k^-2 ~ int_{Gamma_K}^inf x^-2 dx
    sum += 1.0 / gamma;
    oracle += first / sum;
  }
  oracle /= oracle_reps;

  double mean = 0;
  constexpr int reps = 1000;
  for (int r = 0; r < reps; ++r) mean += darling_ratio(sample_sym_stable(1.0, SeededStream(31, r), 100000));
  mean /= reps;
  EXPECT_NEAR(mean, oracle, 0.05);
}

TEST(SumSqRatio, EqualsOneAtAlphaTwo) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto values = heavy_values(rng, 25);
    EXPECT_NEAR(sum_sq_ratio(std::span<const double>(values), 2.0), 1.0, 1e-12);
    EXPECT_LE(sum_sq_ratio(std::span<const double>(values), 1.2), 1.0 + 1e-12);
  }
}

TEST(Modulus, LinearPath) {
  const ProcessPath line(batch_of(std::vector<double>(100, 1.0)), 1.0);  // Y(t) = t
  EXPECT_NEAR(modulus_of_continuity(line, 0.1), 0.1, 1e-12);
  EXPECT_NEAR(modulus_of_continuity(line, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(modulus_of_continuity(line, 0.1, 4), 0.1, 1e-12);
}

TEST(Modulus, FullWindowIsTheRange) {
  std::mt19937_64 rng(4);
  const auto values = heavy_values(rng, 200);
  const ProcessPath path(batch_of(values), 2.0);
  double lo = 0, hi = 0;
  for (std::size_t k = 0; k <= 200; ++k) {
    lo = std::min(lo, path.node(k));
    hi = std::max(hi, path.node(k));
  }
  EXPECT_DOUBLE_EQ(modulus_of_continuity(path, 1.0), hi - lo);
}

TEST(Modulus, OrderingAndMonotonicity) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto values = heavy_values(rng, 150);
    const ProcessPath path(batch_of(values), 1.5);
    const double ratio = max_ratio(batch_of(values), 1.5);
    const std::vector<double> deltas{1.0 / 150, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
    const auto omega = modulus_profile(path, deltas, 1);
    for (std::size_t i = 1; i < omega.size(); ++i) EXPECT_GE(omega[i], omega[i - 1]);
    EXPECT_GE(omega[0], ratio * (1 - 1e-12));
    EXPECT_LE(omega[0], 2 * ratio * (1 + 1e-12));
    // the finer grid contains the nodes; when delta * n is an integer the
    // window range is convex between nodes, so the nodes already attain the sup
    const auto refined = modulus_profile(path, deltas, 3);
    for (std::size_t i = 0; i < omega.size(); ++i) {
      EXPECT_GE(refined[i], omega[i] * (1 - 1e-12));
      const double cells = deltas[i] * 150;
      if (std::abs(cells - std::round(cells)) < 1e-9) EXPECT_NEAR(refined[i], omega[i], 1e-12) << deltas[i];
    }
  }
}

TEST(Modulus, RejectsBadDelta) {
  const ProcessPath path(batch_of({1, 2}), 2.0);
  EXPECT_THROW(modulus_of_continuity(path, 0.0), DomainError);
  EXPECT_THROW(modulus_of_continuity(path, 1.5), DomainError);
}

TEST(DanTransform, Examples) {
  EXPECT_EQ(dan_transform(batch_of({-3, 5}), 2.0).values, (std::vector<double>{-3, 5}));
  EXPECT_EQ(dan_transform(batch_of({-4}), 1.0).values, (std::vector<double>{-2}));
  EXPECT_EQ(dan_transform(batch_of({0, 9}), 1.0).values, (std::vector<double>{0, 3}));
  EXPECT_THROW(dan_transform(batch_of({1}), 0.0), DomainError);
}

TEST(DanTransform, NormCorrespondence) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto batch = batch_of(heavy_values(rng, 30));
    for (double alpha : {0.4, 1.0, 1.6}) {
      const double lhs = p_norm(dan_transform(batch, alpha), 2.0).value;
      const double rhs = std::pow(p_norm(batch, alpha).value, alpha / 2);
      EXPECT_NEAR(lhs, rhs, 1e-12 * rhs);
    }
  }
}

TEST(DanCriterion, Sentinels) {
  const auto ones = batch_of({1, 1, 1});
  const std::vector<double> two{2.0};
  const std::vector<double> half{0.5};
  EXPECT_EQ(dan_criterion_curve(ones, two)[0], 0.0);
  EXPECT_EQ(dan_criterion_curve(ones, half)[0], std::numeric_limits<double>::infinity());
  EXPECT_THROW(dan_criterion_curve(ones, std::vector<double>{}), DomainError);
}

TEST(DanCriterion, GaussianCurveDecreases) {
  const auto batch = sample_family(FamilySpec::gaussian(), SeededStream(7, 0), 1000000);
  const std::vector<double> grid{2.0, 4.0, 8.0};
  const auto curve = dan_criterion_curve(batch, grid);
  EXPECT_GT(curve[0], curve[1]);
  EXPECT_GT(curve[1], curve[2]);
  EXPECT_LT(curve[2], 0.1);
}

TEST(NormChain, Examples) {
  const auto a = norm_chain(batch_of({3, 4}), 1.0, 2.0);
  EXPECT_DOUBLE_EQ(a.v_alpha, 7);
  EXPECT_DOUBLE_EQ(a.v_one, 7);
  EXPECT_DOUBLE_EQ(a.v_beta, 5);
  EXPECT_DOUBLE_EQ(a.v_two, 5);

  const auto b = norm_chain(batch_of({-2.5}), 0.3, 1.7);
  for (double v : {b.v_alpha, b.v_one, b.v_beta, b.v_two}) EXPECT_DOUBLE_EQ(v, 2.5);

  const auto c = norm_chain(batch_of({1, 1}), 0.5, 1.5);
  EXPECT_NEAR(c.v_alpha, 4.0, 1e-12);
  EXPECT_NEAR(c.v_one, 2.0, 1e-12);
  EXPECT_NEAR(c.v_beta, std::pow(2.0, 2.0 / 3.0), 1e-12);
  EXPECT_NEAR(c.v_two, std::sqrt(2.0), 1e-12);
}

TEST(NormChain, HoldsOnRandomBatches) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> alpha_dist(1e-3, 1.0), beta_dist(1.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto batch = batch_of(heavy_values(rng, 50));
    EXPECT_NO_THROW(norm_chain(batch, alpha_dist(rng), beta_dist(rng)));
  }
}

TEST(NormChain, RejectsInadmissibleIndices) {
  EXPECT_THROW(norm_chain(batch_of({1, 2}), 1.5, 2.0), DomainError);
  EXPECT_THROW(norm_chain(batch_of({1, 2}), 0.5, 0.9), DomainError);
}

TEST(Diagnose, FillsEveryField) {
  const auto batch = sample_sym_stable(1.2, SeededStream(9, 0), 500);
  const std::vector<double> deltas{0.5, 0.1};
  const auto report = diagnose(batch, 1.2, 1.2, deltas);
  EXPECT_DOUBLE_EQ(report.max_ratio, max_ratio(batch, 1.2));
  EXPECT_DOUBLE_EQ(report.darling_ratio, darling_ratio(batch));
  EXPECT_DOUBLE_EQ(report.sum_sq_ratio, sum_sq_ratio(batch, 1.2));
  ASSERT_EQ(report.omega.size(), 2u);
  EXPECT_GE(report.omega.at(0.5), report.omega.at(0.1));
}
