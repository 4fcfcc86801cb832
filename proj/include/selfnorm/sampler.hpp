#pragma once

// Seeded i.i.d. samplers for symmetric members of DA(alpha).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selfnorm/errors.hpp"
#include "selfnorm/philox.hpp"

namespace selfnorm {

enum class FamilyKind { SymStable, SymPareto, Gaussian, StudentT };

inline std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::SymStable: return "SymStable";
    case FamilyKind::SymPareto: return "SymPareto";
    case FamilyKind::Gaussian: return "Gaussian";
    case FamilyKind::StudentT: return "StudentT";
  }
  return "?";
}

inline FamilyKind parse_family_kind(std::string_view name) {
  for (auto kind : {FamilyKind::SymStable, FamilyKind::SymPareto, FamilyKind::Gaussian,
                    FamilyKind::StudentT}) {
    if (name == to_string(kind)) return kind;
  }
  if (name == "Cauchy") return FamilyKind::SymStable;
  throw DomainError("unknown family '" + std::string(name) + "'");
}

/// A symmetric distribution together with its tail parameter.
///
/// `alpha` is the stability index for SymStable, the Pareto tail index for
/// SymPareto and the degrees of freedom for StudentT. The last two may exceed
/// 2, in which case the family sits in the normal domain of attraction.
struct FamilySpec {
  FamilyKind kind = FamilyKind::Gaussian;
  double alpha = 2.0;
  double scale = 1.0;

  static FamilySpec sym_stable(double alpha, double scale = 1.0) {
    return {FamilyKind::SymStable, alpha, scale};
  }
  static FamilySpec cauchy(double scale = 1.0) { return sym_stable(1.0, scale); }
  static FamilySpec sym_pareto(double alpha, double scale = 1.0) {
    return {FamilyKind::SymPareto, alpha, scale};
  }
  static FamilySpec gaussian(double scale = 1.0) { return {FamilyKind::Gaussian, 2.0, scale}; }
  static FamilySpec student_t(double dof, double scale = 1.0) {
    return {FamilyKind::StudentT, dof, scale};
  }

  void validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw DomainError("family scale must be a positive finite real");
    }
    switch (kind) {
      case FamilyKind::SymStable:
        if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("SymStable requires alpha in (0,2]");
        break;
      case FamilyKind::SymPareto:
      case FamilyKind::StudentT:
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
          throw DomainError(std::string(to_string(kind)) + " requires a finite alpha > 0");
        }
        break;
      case FamilyKind::Gaussian:
        if (alpha != 2.0) throw DomainError("Gaussian family has alpha fixed at 2");
        break;
    }
  }

  /// Index of the stable law the family is attracted to.
  double attraction_index() const { return std::min(alpha, 2.0); }

  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

/// X_1..X_n with the family and stream they were drawn from.
struct SampleBatch {
  std::vector<double> values;
  FamilySpec spec;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  std::size_t n() const { return values.size(); }
  std::span<const double> view() const { return values; }

  /// Wraps literal values, e.g. for hand-built test batches.
  static SampleBatch from_values(std::vector<double> values, FamilySpec spec = {}) {
    SampleBatch batch;
    batch.values = std::move(values);
    batch.spec = spec;
    return batch;
  }
};

/// Zero-skewness Chambers-Mallows-Stuck transform of an angle theta in
/// (-pi/2, pi/2) and a unit-exponential w. Unit scale; alpha = 2 gives
/// variance 2.
inline double cms_symmetric(double alpha, double theta, double w) {
  if (alpha == 1.0) return std::tan(theta);
  const double lead = std::sin(alpha * theta) / std::pow(std::cos(theta), 1.0 / alpha);
  return lead * std::pow(std::cos((1.0 - alpha) * theta) / w, (1.0 - alpha) / alpha);
}

/// Inverse CDF of |X| with P(|X| > x) = x^-alpha on x >= 1, signed.
inline double pareto_symmetric(double alpha, double u, bool positive) {
  const double magnitude = std::pow(1.0 - u, -1.0 / alpha);
  return positive ? magnitude : -magnitude;
}

namespace detail {

inline void require_positive_n(std::size_t n) {
  if (n == 0) throw DomainError("sample size must be at least 1");
}

inline SampleBatch make_batch(const FamilySpec& spec, const SeededStream& stream, std::size_t n) {
  SampleBatch batch;
  batch.spec = spec;
  batch.master_seed = stream.master_seed();
  batch.stream_index = stream.stream_index();
  batch.values.resize(n);
  return batch;
}

// Box-Muller; fills `out` two values at a time.
inline void fill_standard_normal(SeededStream& stream, std::span<double> out) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < out.size(); i += 2) {
    const double radius = std::sqrt(-2.0 * std::log(stream.uniform_open()));
    const double angle = kTwoPi * stream.uniform_open();
    out[i] = radius * std::cos(angle);
    if (i + 1 < out.size()) out[i + 1] = radius * std::sin(angle);
  }
}

}  // namespace detail

inline SampleBatch sample_sym_stable(double alpha, SeededStream stream, std::size_t n,
                                     double scale = 1.0) {
  const auto spec = FamilySpec::sym_stable(alpha, scale);
  spec.validate();
  detail::require_positive_n(n);
  auto batch = detail::make_batch(spec, stream, n);
  constexpr double kPi = std::numbers::pi;
  for (auto& x : batch.values) {
    const double theta = kPi * (stream.uniform_open() - 0.5);
    // alpha = 1 does not use the exponential variate
    const double w = alpha == 1.0 ? 1.0 : -std::log(stream.uniform_open());
    x = scale * cms_symmetric(alpha, theta, w);
  }
  return batch;
}

inline SampleBatch sample_sym_pareto(double alpha, SeededStream stream, std::size_t n,
                                     double scale = 1.0) {
  const auto spec = FamilySpec::sym_pareto(alpha, scale);
  spec.validate();
  detail::require_positive_n(n);
  auto batch = detail::make_batch(spec, stream, n);
  for (auto& x : batch.values) {
    // high 53 bits drive the magnitude, bit 0 the sign
    const std::uint64_t word = stream();
    const double u = static_cast<double>(word >> 11) * 0x1.0p-53;
    x = scale * pareto_symmetric(alpha, u, (word & 1u) != 0);
  }
  return batch;
}

inline SampleBatch sample_family(const FamilySpec& spec, SeededStream stream, std::size_t n) {
  spec.validate();
  detail::require_positive_n(n);
  switch (spec.kind) {
    case FamilyKind::SymStable: return sample_sym_stable(spec.alpha, stream, n, spec.scale);
    case FamilyKind::SymPareto: return sample_sym_pareto(spec.alpha, stream, n, spec.scale);
    case FamilyKind::Gaussian: {
      auto batch = detail::make_batch(spec, stream, n);
      detail::fill_standard_normal(stream, batch.values);
      for (auto& x : batch.values) x *= spec.scale;
      return batch;
    }
    case FamilyKind::StudentT: {
      auto batch = detail::make_batch(spec, stream, n);
      std::chi_squared_distribution<double> chi2(spec.alpha);
      double z[1];
      for (auto& x : batch.values) {
        detail::fill_standard_normal(stream, z);
        x = spec.scale * z[0] / std::sqrt(chi2(stream) / spec.alpha);
      }
      return batch;
    }
  }
  throw DomainError("unhandled family kind");
}

}  // namespace selfnorm
