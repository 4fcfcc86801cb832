#pragma once

// Scalar statistics that decide tightness and degeneracy of Y_{n,p}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "selfnorm/errors.hpp"
#include "selfnorm/process.hpp"

namespace selfnorm {

/// max_i |X_i| / V_{n,p}.
inline double max_ratio(std::span<const double> x, double p) {
  const auto norm = p_norm(x, p);
  if (norm.degenerate()) throw DomainError("max ratio of an all-zero batch");
  return norm.max_abs / norm.value;
}

inline double max_ratio(const SampleBatch& batch, double p) { return max_ratio(batch.view(), p); }

/// max_i X_i^2 / sum X_i^2, always in [1/n, 1].
inline double darling_ratio(std::span<const double> x) {
  const auto norm = p_norm(x, 2.0);
  if (norm.degenerate()) throw DomainError("Darling ratio of an all-zero batch");
  const double r = norm.max_abs / norm.value;
  return r * r;
}

inline double darling_ratio(const SampleBatch& batch) { return darling_ratio(batch.view()); }

/// sum X_i^2 / V_{n,alpha}^2; at most 1 for alpha <= 2.
inline double sum_sq_ratio(std::span<const double> x, double alpha) {
  const auto v_alpha = p_norm(x, alpha);
  if (v_alpha.degenerate()) throw DomainError("sum-of-squares ratio of an all-zero batch");
  const double r = p_norm(x, 2.0).value / v_alpha.value;
  return r * r;
}

inline double sum_sq_ratio(const SampleBatch& batch, double alpha) {
  return sum_sq_ratio(batch.view(), alpha);
}

namespace detail {

// Y on the uniform grid j / (refinement * n), j = 0..refinement * n.
inline std::vector<double> refined_path(const ProcessPath& path, std::size_t refinement) {
  const std::size_t n = path.n();
  const double v = path.norm().value;
  std::vector<double> grid;
  grid.reserve(refinement * n + 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double base = path.sums()[k] / v;
    const double step = path.batch().values[k] / v;
    grid.push_back(base);
    for (std::size_t j = 1; j < refinement; ++j) {
      grid.push_back(base + step * static_cast<double>(j) / static_cast<double>(refinement));
    }
  }
  grid.push_back(path.node(n));
  return grid;
}

// max over windows of `width + 1` consecutive points of (max - min)
inline double max_window_range(std::span<const double> y, std::size_t width) {
  if (width + 1 >= y.size()) {
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    return *hi - *lo;
  }
  std::deque<std::size_t> maxima;
  std::deque<std::size_t> minima;
  double best = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    while (!maxima.empty() && y[maxima.back()] <= y[i]) maxima.pop_back();
    while (!minima.empty() && y[minima.back()] >= y[i]) minima.pop_back();
    maxima.push_back(i);
    minima.push_back(i);
    if (maxima.front() + width < i) maxima.pop_front();
    if (minima.front() + width < i) minima.pop_front();
    best = std::max(best, y[maxima.front()] - y[minima.front()]);
  }
  return best;
}

inline std::size_t window_width(double delta, std::size_t grid_intervals) {
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("modulus of continuity needs delta in (0,1]");
  const double scaled = delta * static_cast<double>(grid_intervals);
  return static_cast<std::size_t>(std::floor(scaled * (1.0 + 1e-12)));
}

}  // namespace detail

/// omega(delta) = sup_{|t-s| <= delta} |Y(t) - Y(s)| over the grid of mesh
/// 1 / (grid_refinement * n). The grid contains every node k/n.
inline double modulus_of_continuity(const ProcessPath& path, double delta,
                                    std::size_t grid_refinement = 1) {
  if (grid_refinement == 0) throw DomainError("grid refinement must be positive");
  const auto width = detail::window_width(delta, grid_refinement * path.n());
  const auto y = detail::refined_path(path, grid_refinement);
  return detail::max_window_range(y, width);
}

/// omega at several deltas sharing one grid evaluation.
inline std::vector<double> modulus_profile(const ProcessPath& path, std::span<const double> deltas,
                                           std::size_t grid_refinement = 1) {
  if (grid_refinement == 0) throw DomainError("grid refinement must be positive");
  const auto y = detail::refined_path(path, grid_refinement);
  std::vector<double> out;
  out.reserve(deltas.size());
  for (double delta : deltas) {
    out.push_back(detail::max_window_range(y, detail::window_width(delta, grid_refinement * path.n())));
  }
  return out;
}

/// sgn(X_i) |X_i|^(alpha/2): maps DA(alpha) into the normal domain of attraction.
inline SampleBatch dan_transform(const SampleBatch& batch, double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("DAN transform needs alpha in (0,2]");
  SampleBatch out = batch;
  if (alpha == 2.0) return out;
  const double exponent = alpha / 2.0;
  for (auto& x : out.values) x = std::copysign(std::pow(std::abs(x), exponent), x);
  return out;
}

/// Plug-in y^2 P(|X| > y) / E(X^2 1{|X| <= y}) along `y_grid`. A zero
/// denominator yields +infinity.
inline std::vector<double> dan_criterion_curve(const SampleBatch& batch, std::span<const double> y_grid) {
  if (y_grid.empty()) throw DomainError("DAN criterion needs a nonempty grid");
  if (batch.n() == 0) throw DomainError("DAN criterion of an empty batch");
  std::vector<double> magnitudes(batch.n());
  std::transform(batch.values.begin(), batch.values.end(), magnitudes.begin(),
                 [](double x) { return std::abs(x); });
  std::sort(magnitudes.begin(), magnitudes.end());
  std::vector<double> prefix_sq(magnitudes.size() + 1, 0.0);
  for (std::size_t i = 0; i < magnitudes.size(); ++i) {
    prefix_sq[i + 1] = prefix_sq[i] + magnitudes[i] * magnitudes[i];
  }
  const auto n = static_cast<double>(magnitudes.size());
  std::vector<double> curve;
  curve.reserve(y_grid.size());
  for (double y : y_grid) {
    if (!(y > 0.0)) throw DomainError("DAN criterion grid must be positive");
    const auto within = static_cast<std::size_t>(
        std::upper_bound(magnitudes.begin(), magnitudes.end(), y) - magnitudes.begin());
    const double tail = static_cast<double>(magnitudes.size() - within) / n;
    const double truncated = prefix_sq[within] / n;
    curve.push_back(truncated > 0.0 ? y * y * tail / truncated
                                    : std::numeric_limits<double>::infinity());
  }
  return curve;
}

/// (V_{n,alpha}, V_{n,1}, V_{n,beta}, V_{n,2}) for alpha <= 1 <= beta <= 2.
struct NormChain {
  double v_alpha = 0.0;
  double v_one = 0.0;
  double v_beta = 0.0;
  double v_two = 0.0;
};

inline constexpr double kNormChainSlack = 1e-10;

/// Throws ConsistencyError if the ordering fails beyond relative slack 1e-10.
inline NormChain norm_chain(const SampleBatch& batch, double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("norm chain needs alpha in (0,1]");
  if (!(beta >= 1.0 && beta <= 2.0)) throw DomainError("norm chain needs beta in [1,2]");
  const NormChain chain{p_norm(batch, alpha).value, p_norm(batch, 1.0).value,
                        p_norm(batch, beta).value, p_norm(batch, 2.0).value};
  const auto ordered = [](double larger, double smaller) {
    return larger >= smaller * (1.0 - kNormChainSlack);
  };
  if (!ordered(chain.v_alpha, chain.v_one) || !ordered(chain.v_one, chain.v_beta) ||
      !ordered(chain.v_beta, chain.v_two)) {
    throw ConsistencyError("p-norm ordering V_alpha >= V_1 >= V_beta >= V_2 violated");
  }
  return chain;
}

struct DiagnosticReport {
  double max_ratio = 0.0;
  double darling_ratio = 0.0;
  double sum_sq_ratio = 0.0;
  std::map<double, double> omega;
};

/// All diagnostics of one sample for the process Y_{n,p}; `alpha` is the
/// index used in the sum-of-squares ratio.
inline DiagnosticReport diagnose(const SampleBatch& batch, double p, double alpha,
                                 std::span<const double> delta_grid, std::size_t grid_refinement = 1) {
  DiagnosticReport report;
  report.max_ratio = max_ratio(batch, p);
  report.darling_ratio = darling_ratio(batch);
  report.sum_sq_ratio = sum_sq_ratio(batch, alpha);
  const ProcessPath path(batch, p);
  const auto omegas = modulus_profile(path, delta_grid, grid_refinement);
  for (std::size_t i = 0; i < delta_grid.size(); ++i) report.omega[delta_grid[i]] = omegas[i];
  return report;
}

}  // namespace selfnorm
