#pragma once

// Reference laws for the Brownian regime, goodness-of-fit statistics and the
// limiting joint characteristic function of (S_n / n^(1/alpha), V^p / n^(p/alpha)).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "selfnorm/errors.hpp"
#include "selfnorm/parallel.hpp"
#include "selfnorm/philox.hpp"
#include "selfnorm/sampler.hpp"

namespace selfnorm {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// P(sup_{t<=1} W(t) < x) = 2 Phi(x) - 1 for x > 0 (reflection principle).
inline double g1_cdf(double x) {
  if (!(x > 0.0)) return 0.0;
  return std::max(0.0, 2.0 * normal_cdf(x) - 1.0);
}

/// P(sup_{t<=1} |W(t)| < x) via the alternating series
///   (4/pi) sum_{k>=0} (-1)^k / (2k+1) exp(-(2k+1)^2 pi^2 / (8 x^2)),
/// truncated after `terms` terms.
inline double g2_cdf(double x, std::size_t terms = 1000) {
  if (terms == 0) throw DomainError("g2 series needs at least one term");
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  constexpr double kPi = std::numbers::pi;
  const double scale = kPi * kPi / (8.0 * x * x);
  double sum = 0.0;
  for (std::size_t k = 0; k < terms; ++k) {
    const double odd = 2.0 * static_cast<double>(k) + 1.0;
    const double term = std::exp(-odd * odd * scale) / odd;
    if (term == 0.0) break;
    sum += (k % 2 == 0) ? term : -term;
  }
  return std::clamp(4.0 / kPi * sum, 0.0, 1.0);
}

enum class LawKind { G1, G2, G3Oracle, G4Oracle, StdNormal, ScaledNormal, Custom };
enum class Provenance { ClosedForm, Series, OracleTable };

inline std::string_view to_string(LawKind kind) {
  switch (kind) {
    case LawKind::G1: return "G1";
    case LawKind::G2: return "G2";
    case LawKind::G3Oracle: return "G3";
    case LawKind::G4Oracle: return "G4";
    case LawKind::StdNormal: return "StdNormal";
    case LawKind::ScaledNormal: return "ScaledNormal";
    case LawKind::Custom: return "Custom";
  }
  return "?";
}

/// Empirical law of a non-negative Brownian functional, stored as sorted
/// samples. The CDF interpolates linearly through (0, 0) and (x_k, k/m).
struct OracleTable {
  LawKind kind = LawKind::G3Oracle;
  std::uint64_t paths = 0;
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  std::string build_stamp;
  std::vector<double> sorted;

  double cdf(double x) const {
    if (!(x > 0.0) || sorted.empty()) return 0.0;
    const auto m = static_cast<double>(sorted.size());
    const auto upper = std::upper_bound(sorted.begin(), sorted.end(), x);
    if (upper == sorted.end()) return 1.0;
    const auto k = static_cast<std::size_t>(upper - sorted.begin());  // x < sorted[k]
    const double x_hi = sorted[k];
    const double x_lo = k == 0 ? 0.0 : sorted[k - 1];
    const double c_lo = static_cast<double>(k) / m;
    const double c_hi = static_cast<double>(k + 1) / m;
    if (x_hi == x_lo) return c_hi;
    return c_lo + (c_hi - c_lo) * (x - x_lo) / (x_hi - x_lo);
  }

  double mean() const {
    return std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  }

  /// Standard error of mean().
  double mean_stderr() const {
    const double mu = mean();
    double ss = 0.0;
    for (double v : sorted) ss += (v - mu) * (v - mu);
    const auto m = static_cast<double>(sorted.size());
    return std::sqrt(ss / (m - 1.0) / m);
  }
};

/// An evaluable CDF with its provenance.
class ReferenceLaw {
 public:
  using Cdf = std::function<double(double)>;

  ReferenceLaw(LawKind kind, Provenance provenance, Cdf cdf)
      : kind_(kind), provenance_(provenance), cdf_(std::move(cdf)) {}

  static ReferenceLaw g1() { return {LawKind::G1, Provenance::ClosedForm, g1_cdf}; }
  static ReferenceLaw g2(std::size_t terms = 1000) {
    if (terms == 0) throw DomainError("g2 series needs at least one term");
    return {LawKind::G2, Provenance::Series, [terms](double x) { return g2_cdf(x, terms); }};
  }
  static ReferenceLaw std_normal() { return {LawKind::StdNormal, Provenance::ClosedForm, normal_cdf}; }
  static ReferenceLaw scaled_normal(double sigma) {
    if (!(sigma > 0.0)) throw DomainError("normal scale must be positive");
    return {LawKind::ScaledNormal, Provenance::ClosedForm,
            [sigma](double x) { return normal_cdf(x / sigma); }};
  }
  static ReferenceLaw custom(Cdf cdf) { return {LawKind::Custom, Provenance::ClosedForm, std::move(cdf)}; }
  static ReferenceLaw from_table(OracleTable table) {
    auto shared = std::make_shared<const OracleTable>(std::move(table));
    ReferenceLaw law(shared->kind, Provenance::OracleTable,
                     [shared](double x) { return shared->cdf(x); });
    law.table_ = shared;
    return law;
  }

  double operator()(double x) const { return cdf_(x); }
  double cdf(double x) const { return cdf_(x); }
  LawKind kind() const { return kind_; }
  Provenance provenance() const { return provenance_; }
  /// Present only for oracle-table laws.
  const OracleTable* table() const { return table_.get(); }

 private:
  LawKind kind_;
  Provenance provenance_;
  Cdf cdf_;
  std::shared_ptr<const OracleTable> table_;
};

/// Discretized functionals of standard Brownian paths on `steps` equal steps:
/// max_k W_k (with W_0 = 0), max_k |W_k|, and the right-endpoint Riemann sums
/// of W^2 and |W|.
struct BrownianFunctionalSamples {
  std::vector<double> sup;
  std::vector<double> sup_abs;
  std::vector<double> integral_sq;
  std::vector<double> integral_abs;
};

/// Path i draws from SeededStream(seed, i); output is independent of `workers`.
inline BrownianFunctionalSamples simulate_brownian_functionals(std::size_t paths, std::size_t steps,
                                                               std::uint64_t seed,
                                                               std::size_t workers = 1) {
  if (paths == 0 || steps == 0) throw DomainError("Brownian oracle needs paths, steps >= 1");
  BrownianFunctionalSamples out;
  out.sup.resize(paths);
  out.sup_abs.resize(paths);
  out.integral_sq.resize(paths);
  out.integral_abs.resize(paths);
  const double dt = 1.0 / static_cast<double>(steps);
  const double sd = std::sqrt(dt);
  parallel_for(paths, workers, [&](std::size_t i) {
    SeededStream stream(seed, i);
    std::vector<double> increments(steps);
    detail::fill_standard_normal(stream, increments);
    double w = 0.0, sup = 0.0, sup_abs = 0.0, sq = 0.0, ab = 0.0;
    for (double z : increments) {
      w += sd * z;
      sup = std::max(sup, w);
      sup_abs = std::max(sup_abs, std::abs(w));
      sq += w * w;
      ab += std::abs(w);
    }
    out.sup[i] = sup;
    out.sup_abs[i] = sup_abs;
    out.integral_sq[i] = sq * dt;
    out.integral_abs[i] = ab * dt;
  });
  return out;
}

inline OracleTable make_oracle_table(LawKind kind, std::vector<double> samples, std::size_t steps,
                                     std::uint64_t seed, std::string build_stamp = "selfnorm") {
  OracleTable table;
  table.kind = kind;
  table.paths = samples.size();
  table.steps = steps;
  table.seed = seed;
  table.build_stamp = std::move(build_stamp);
  std::sort(samples.begin(), samples.end());
  table.sorted = std::move(samples);
  return table;
}

/// Monte Carlo reference law of int W^2 (G3) or int |W| (G4). Paths use the
/// stream's master seed; the stream index selects a disjoint block of path
/// streams.
inline ReferenceLaw brownian_functional_oracle(LawKind kind, std::size_t paths, std::size_t steps,
                                               const SeededStream& stream, std::size_t workers = 1) {
  if (kind != LawKind::G3Oracle && kind != LawKind::G4Oracle) {
    throw DomainError("Brownian functional oracle covers G3 and G4 only");
  }
  const std::uint64_t seed = stream.stream_index() == 0
                                 ? stream.master_seed()
                                 : mix64(stream.master_seed() ^ mix64(stream.stream_index()));
  auto samples = simulate_brownian_functionals(paths, steps, seed, workers);
  auto& chosen = kind == LawKind::G3Oracle ? samples.integral_sq : samples.integral_abs;
  return ReferenceLaw::from_table(make_oracle_table(kind, std::move(chosen), steps, seed));
}

/// One-sample Kolmogorov-Smirnov distance sup_x |F_m(x) - F(x)|.
inline double ks_statistic(std::span<const double> sample, const ReferenceLaw& law) {
  if (sample.empty()) throw DomainError("KS statistic of an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = law(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

/// Two-sample Kolmogorov-Smirnov distance between empirical CDFs.
inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("KS statistic of an empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto nx = static_cast<double>(x.size());
  const auto ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

/// (1/m) sum_j exp(i (u a_j + w b_j)).
inline std::complex<double> empirical_chf(std::span<const double> a, std::span<const double> b, double u,
                                          double w) {
  if (a.empty() || a.size() != b.size()) {
    throw DomainError("empirical chf needs equally sized nonempty coordinates");
  }
  double re = 0.0, im = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double phase = u * a[j] + w * b[j];
    re += std::cos(phase);
    im += std::sin(phase);
  }
  const auto m = static_cast<double>(a.size());
  return {re / m, im / m};
}

/// Densities of the Levy measure: K(y) = r for y > 0 and s for y < 0.
struct TailConstants {
  double r = 0.0;
  double s = 0.0;

  static TailConstants symmetric(double r) { return {r, r}; }
};

/// Tail constants of a family with attraction index below 2, i.e. the limit of
/// |y|^(alpha+1) times the density.
inline TailConstants tail_constants(const FamilySpec& spec) {
  spec.validate();
  constexpr double kPi = std::numbers::pi;
  const double a = spec.alpha;
  if (spec.kind == FamilyKind::Gaussian || a >= 2.0) {
    throw DomainError("tail constants need an attraction index below 2");
  }
  const double scale_factor = std::pow(spec.scale, a);
  switch (spec.kind) {
    case FamilyKind::SymStable:
      return TailConstants::symmetric(std::tgamma(a + 1.0) * std::sin(kPi * a / 2.0) / kPi * scale_factor);
    case FamilyKind::SymPareto:
      return TailConstants::symmetric(a / 2.0 * scale_factor);
    case FamilyKind::StudentT: {
      const double density_const =
          std::exp(std::lgamma((a + 1.0) / 2.0) - std::lgamma(a / 2.0)) / std::sqrt(a * kPi);
      return TailConstants::symmetric(density_const * std::pow(a, (a + 1.0) / 2.0) * scale_factor);
    }
    case FamilyKind::Gaussian: break;
  }
  throw DomainError("tail constants need an attraction index below 2");
}

struct QuadSpec {
  /// Relative tolerance of each adaptive Gauss-Kronrod panel.
  double rel_tol = 1e-11;
  unsigned max_depth = 12;
  /// Accuracy floor for the truncated far tail.
  double tail_tol = 1e-11;
  /// Upper bound on the explicitly integrated range [1, Y].
  double max_range = 1e6;
};

namespace detail {

template <typename F>
double gk_integrate(F&& f, double a, double b, const QuadSpec& quad) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 15>::integrate(f, a, b, quad.max_depth, quad.rel_tol);
}

// exp(i theta) cos(phi) - 1 without cancellation for small arguments
inline std::complex<double> oscillation_minus_one(double theta, double phi) {
  const double half_theta = std::sin(theta / 2.0);
  const double half_phi = std::sin(phi / 2.0);
  const double cos_phi = std::cos(phi);
  return {-2.0 * half_phi * half_phi - 2.0 * half_theta * half_theta * cos_phi, std::sin(theta) * cos_phi};
}

// Two-term integration by parts of int_Y^inf exp(i(a y^p + b y)) y^(-alpha-1) dy.
// Valid when the phase derivative keeps its sign on [Y, inf).
inline std::complex<double> oscillatory_tail(double a, double b, double p, double alpha, double y) {
  const double g = std::pow(y, -alpha - 1.0);
  const double dg = -(alpha + 1.0) * g / y;
  const double d1 = p * a * std::pow(y, p - 1.0) + b;
  const double d2 = p * (p - 1.0) * a * std::pow(y, p - 2.0);
  const std::complex<double> phase = std::polar(1.0, a * std::pow(y, p) + b * y);
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> first = i * g / d1;
  const std::complex<double> second = -(dg * d1 - g * d2) / (d1 * d1 * d1);
  return phase * (first + second);
}

// Size of the next, omitted, integration-by-parts term.
inline double tail_remainder_scale(double a, double b, double p, double alpha, double y) {
  const double d1 = std::abs(p * a * std::pow(y, p - 1.0) + b);
  const double g = std::pow(y, -alpha - 1.0);
  const double curvature = std::abs((p - 1.0) * a * std::pow(y, p - 2.0)) * p / d1 + (alpha + 2.0) / y;
  return g * curvature * curvature / (d1 * d1 * d1) + g / (y * y * d1 * d1 * d1);
}

// Smallest y beyond which a y^p + b y has no stationary point.
inline double stationary_bound(double a, double b, double p) {
  if (a == 0.0 || b == 0.0 || p == 1.0) return 1.0;
  const double ratio = -b / (p * a);  // y^(p-1) at the stationary point
  if (ratio <= 0.0) return 1.0;
  return std::max(1.0, std::pow(ratio, 1.0 / (p - 1.0)));
}

}  // namespace detail

/// Log of the limiting joint chf of (S_n / n^(1/alpha), sum |X_i|^p / n^(p/alpha))
/// for one block of relative length t:
///   c(u, w) = int (exp(i u y t^(1/alpha) + i w |y|^p t^(p/alpha)) - 1) K(y) / |y|^(alpha+1) dy.
///
/// The integral is split at 1. On (0, 1] the substitution y = z^m removes the
/// endpoint singularity. The constant -1 is integrated exactly on [1, inf),
/// the oscillatory part numerically over phase-sized panels up to Y and by
/// integration by parts beyond.
inline std::complex<double> limit_chf_exponent(double u, double w, double alpha, double p,
                                               const TailConstants& tails, double t = 1.0,
                                               const QuadSpec& quad = {}) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("limit chf needs alpha in (0,2)");
  if (!(p > alpha)) throw DomainError("limit chf needs p > alpha; the integral diverges at 0");
  if (!(p <= 2.0)) throw DomainError("limit chf needs p <= 2");
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("limit chf needs t in (0,1]");
  if (tails.r != tails.s) throw DomainError("limit chf supports symmetric tails (r = s) only");
  if (!(tails.r > 0.0)) throw DomainError("limit chf needs r + s > 0");

  const double su = u * std::pow(t, 1.0 / alpha);
  const double sw = w * std::pow(t, p / alpha);
  if (su == 0.0 && sw == 0.0) return {0.0, 0.0};

  // (0, 1]
  const double power = 1.0 / std::min({p - alpha, 2.0 - alpha, 1.0});
  auto near = [&](double z) {
    if (z <= 0.0) return std::complex<double>(0.0, 0.0);
    const double log_z = std::log(z);
    const double y = std::pow(z, power);
    if (y < 1e-100) {
      // leading order i sw y^p - su^2 y^2 / 2, weights taken in log space
      auto weight = [&](double exponent) { return std::exp(std::log(power) + (power * exponent - 1.0) * log_z); };
      return std::complex<double>(-0.5 * su * su * weight(2.0 - alpha), sw * weight(p - alpha));
    }
    const auto value = detail::oscillation_minus_one(sw * std::pow(y, p), su * y);
    // dy = power z^(power-1) dz and y^(-alpha-1) = z^(-power (alpha+1))
    return value * (power * std::exp((power - 1.0 - power * (alpha + 1.0)) * log_z));
  };
  const std::complex<double> inner(
      detail::gk_integrate([&](double z) { return near(z).real(); }, 0.0, 1.0, quad),
      detail::gk_integrate([&](double z) { return near(z).imag(); }, 0.0, 1.0, quad));

  // [1, Y]: exp(i sw y^p) cos(su y) y^(-alpha-1)
  const double au = std::abs(su);
  double cutoff = 4.0 * std::max(detail::stationary_bound(sw, su, p), detail::stationary_bound(sw, -su, p));
  cutoff = std::max(cutoff, 8.0);
  auto remainder = [&](double y) {
    return 0.5 * (detail::tail_remainder_scale(sw, su, p, alpha, y) +
                  detail::tail_remainder_scale(sw, -su, p, alpha, y));
  };
  while (remainder(cutoff) > quad.tail_tol && cutoff < quad.max_range) cutoff *= 2.0;
  cutoff = std::min(cutoff, quad.max_range);

  auto far = [&](double y) {
    return std::polar(1.0, sw * std::pow(y, p)) * (std::cos(su * y) * std::pow(y, -alpha - 1.0));
  };
  std::complex<double> middle(0.0, 0.0);
  for (double a = 1.0; a < cutoff;) {
    const double frequency = std::abs(sw) * p * std::pow(a, p - 1.0) + au;
    const double length = std::min(a, frequency > 0.0 ? std::numbers::pi / frequency : a);
    const double b = std::min(cutoff, a + length);
    middle += std::complex<double>(
        detail::gk_integrate([&](double y) { return far(y).real(); }, a, b, quad),
        detail::gk_integrate([&](double y) { return far(y).imag(); }, a, b, quad));
    a = b;
  }

  const std::complex<double> tail =
      0.5 * (detail::oscillatory_tail(sw, su, p, alpha, cutoff) +
             detail::oscillatory_tail(sw, -su, p, alpha, cutoff));

  return 2.0 * tails.r * (inner + middle + tail - 1.0 / alpha);
}

/// exp(c(u, w)) for the single-block case t_1 = t_2 = t.
inline std::complex<double> limit_chf(double u, double w, double alpha, double p, const TailConstants& tails,
                                      double t = 1.0, const QuadSpec& quad = {}) {
  return std::exp(limit_chf_exponent(u, w, alpha, p, tails, t, quad));
}

/// Brownian covariance v_ij = min(t_i, t_j) on a strictly increasing grid in (0,1].
struct DispersionMatrix {
  std::vector<double> t_grid;
  Eigen::MatrixXd entries;

  /// Throws ConsistencyError if the matrix is not positive definite.
  Eigen::MatrixXd cholesky() const {
    Eigen::LLT<Eigen::MatrixXd> llt(entries);
    if (llt.info() != Eigen::Success) throw ConsistencyError("dispersion matrix is not positive definite");
    return llt.matrixL();
  }
};

inline DispersionMatrix dispersion_matrix(std::span<const double> t_grid) {
  if (t_grid.empty()) throw DomainError("dispersion matrix needs a nonempty grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0 && t_grid[i] <= 1.0)) throw DomainError("time grid must lie in (0,1]");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw DomainError("time grid must be strictly increasing");
  }
  DispersionMatrix m;
  m.t_grid.assign(t_grid.begin(), t_grid.end());
  const auto k = static_cast<Eigen::Index>(t_grid.size());
  m.entries.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) m.entries(i, j) = std::min(t_grid[i], t_grid[j]);
  }
  return m;
}

}  // namespace selfnorm
