#pragma once

// Partial sums, p-norms and the interpolated self-normalized process
//   Y_{n,p}(t) = S_[nt] / V_{n,p} + (nt - [nt]) X_{[nt]+1} / V_{n,p}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "selfnorm/errors.hpp"
#include "selfnorm/sampler.hpp"

namespace selfnorm {

/// Below this length prefix sums are accumulated naively.
inline constexpr std::size_t kCompensatedSumThreshold = 100000;

/// S_0 = 0, S_k = X_1 + ... + X_k.
struct PartialSumPath {
  std::vector<double> sums;

  std::size_t n() const { return sums.empty() ? 0 : sums.size() - 1; }
  double operator[](std::size_t k) const { return sums[k]; }
  double last() const { return sums.back(); }
};

inline PartialSumPath partial_sums(std::span<const double> x) {
  if (x.empty()) throw DomainError("partial sums of an empty batch");
  PartialSumPath path;
  path.sums.resize(x.size() + 1);
  path.sums[0] = 0.0;
  if (x.size() < kCompensatedSumThreshold) {
    double running = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) path.sums[i + 1] = running += x[i];
    return path;
  }
  // Neumaier
  double running = 0.0;
  double compensation = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double next = running + x[i];
    if (std::abs(running) >= std::abs(x[i])) {
      compensation += (running - next) + x[i];
    } else {
      compensation += (x[i] - next) + running;
    }
    running = next;
    path.sums[i + 1] = running + compensation;
  }
  return path;
}

inline PartialSumPath partial_sums(const SampleBatch& batch) { return partial_sums(batch.view()); }

inline void require_norm_index(double p) {
  if (!(p > 0.0 && p <= 2.0)) throw DomainError("norm index p must lie in (0,2]");
}

/// V_{n,p} = (sum |X_i|^p)^(1/p).
struct PNorm {
  double p = 2.0;
  double value = 0.0;
  /// V_{n,p}^p, i.e. sum |X_i|^p.
  double power_sum = 0.0;
  double max_abs = 0.0;

  bool degenerate() const { return value == 0.0; }
};

namespace detail {

// sum (|x_i| / scale)^p in index order
inline double scaled_power_sum(std::span<const double> x, double p, double scale) {
  double sum = 0.0;
  if (p == 2.0) {
    for (double v : x) {
      const double r = v / scale;
      sum += r * r;
    }
  } else if (p == 1.0) {
    for (double v : x) sum += std::abs(v) / scale;
  } else {
    for (double v : x) sum += std::pow(std::abs(v) / scale, p);
  }
  return sum;
}

}  // namespace detail

inline double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

/// Evaluated as M * (sum (|X_i|/M)^p)^(1/p) with M = max |X_i| so heavy-tailed
/// samples cannot overflow the power sum.
inline PNorm p_norm(std::span<const double> x, double p) {
  require_norm_index(p);
  if (x.empty()) throw DomainError("p-norm of an empty batch");
  PNorm norm;
  norm.p = p;
  norm.max_abs = max_abs(x);
  if (norm.max_abs == 0.0) return norm;
  const double scaled = detail::scaled_power_sum(x, p, norm.max_abs);
  norm.value = norm.max_abs * std::pow(scaled, 1.0 / p);
  norm.power_sum = std::pow(norm.max_abs, p) * scaled;
  return norm;
}

inline PNorm p_norm(const SampleBatch& batch, double p) { return p_norm(batch.view(), p); }

/// The continuous piecewise-linear process Y_{n,p} of one sample.
class ProcessPath {
 public:
  ProcessPath(SampleBatch batch, double p)
      : batch_(std::move(batch)), sums_(partial_sums(batch_)), norm_(p_norm(batch_, p)) {
    if (norm_.degenerate()) throw DomainError("self-normalized process of an all-zero batch");
  }

  const SampleBatch& batch() const { return batch_; }
  const PartialSumPath& sums() const { return sums_; }
  const PNorm& norm() const { return norm_; }
  double p() const { return norm_.p; }
  std::size_t n() const { return batch_.n(); }

  /// Y(k/n) = S_k / V.
  double node(std::size_t k) const { return sums_[k] / norm_.value; }

  /// At t = 1 the interpolation term vanishes and Y(1) = S_n / V.
  double at(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("process time must lie in [0,1]");
    const std::size_t n = this->n();
    const double scaled = static_cast<double>(n) * t;
    const double nearest = std::round(scaled);
    if (std::abs(scaled - nearest) <= 4.0 * std::numeric_limits<double>::epsilon() * scaled) {
      return node(static_cast<std::size_t>(nearest));
    }
    const auto k = static_cast<std::size_t>(std::floor(scaled));
    if (k >= n) return node(n);
    return sums_[k] / norm_.value + (scaled - static_cast<double>(k)) * batch_.values[k] / norm_.value;
  }

 private:
  SampleBatch batch_;
  PartialSumPath sums_;
  PNorm norm_;
};

inline double y_at(const ProcessPath& path, double t) { return path.at(t); }

inline std::vector<double> y_path(const ProcessPath& path, std::span<const double> grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back(path.at(t));
  return out;
}

/// Largest |Y(t) - S_[nt]/V| over the grid {j / (refinement * n)}.
inline double max_interpolation_gap(const ProcessPath& path, std::size_t refinement = 10) {
  const std::size_t n = path.n();
  const std::size_t points = refinement * n;
  double gap = 0.0;
  for (std::size_t j = 0; j <= points; ++j) {
    const std::size_t k = j / refinement;
    const double frac = static_cast<double>(j % refinement) / static_cast<double>(refinement);
    if (k >= n) break;
    gap = std::max(gap, std::abs(frac * path.batch().values[k]) / path.norm().value);
  }
  return gap;
}

/// Erdos-Kac statistics of the normalized partial sums S_k / V, k = 1..n.
struct EKFunctionals {
  double max_sn = 0.0;
  double max_abs_sn = 0.0;
  double mean_sq = 0.0;
  double mean_abs = 0.0;
};

/// Works on raw values with a precomputed normalizer; used by the harness.
inline EKFunctionals ek_functionals(std::span<const double> x, double normalizer) {
  if (x.empty()) throw DomainError("EK functionals of an empty batch");
  if (!(normalizer > 0.0)) throw DomainError("EK functionals need a positive normalizer");
  const bool compensated = x.size() >= kCompensatedSumThreshold;
  EKFunctionals ek;
  ek.max_sn = -std::numeric_limits<double>::infinity();
  double running = 0.0;
  double compensation = 0.0;
  double sum_sq = 0.0;
  double sum_abs = 0.0;
  for (double v : x) {
    double s;
    if (compensated) {
      const double next = running + v;
      compensation += std::abs(running) >= std::abs(v) ? (running - next) + v : (v - next) + running;
      running = next;
      s = (running + compensation) / normalizer;
    } else {
      running += v;
      s = running / normalizer;
    }
    ek.max_sn = std::max(ek.max_sn, s);
    ek.max_abs_sn = std::max(ek.max_abs_sn, std::abs(s));
    sum_sq += s * s;
    sum_abs += std::abs(s);
  }
  const auto n = static_cast<double>(x.size());
  ek.mean_sq = sum_sq / n;
  ek.mean_abs = sum_abs / n;
  return ek;
}

inline EKFunctionals ek_functionals(const SampleBatch& batch, double p) {
  const auto norm = p_norm(batch, p);
  if (norm.degenerate()) throw DomainError("EK functionals of an all-zero batch");
  return ek_functionals(batch.view(), norm.value);
}

}  // namespace selfnorm
