#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace maxstable {

// All empirical routines below need at least this many samples.
inline constexpr std::size_t kMinEmpiricalSamples = 100;

[[nodiscard]] double unit_frechet_cdf(double x) noexcept;       // exp(-1/x), x > 0
[[nodiscard]] double unit_frechet_quantile(double p);           // -1/log p

// Right-continuous empirical CDF #{s <= x} / n.
[[nodiscard]] double empirical_cdf(std::span<const double> samples, double x);

// One-sample Kolmogorov-Smirnov distance sup |F_n - F| evaluated at the
// jump points (both one-sided limits).
[[nodiscard]] double ks_distance(std::span<const double> samples,
                                 const std::function<double(double)>& reference);

// Two-sample Kolmogorov-Smirnov distance.
[[nodiscard]] double ks_two_sample(std::span<const double> a, std::span<const double> b);

// Asymptotic critical value sqrt(-log(alpha/2)/2) / sqrt(n_effective); for
// alpha = 0.01 the constant is 1.628. Two-sample: n_effective = n m / (n + m).
[[nodiscard]] double ks_critical_value(double alpha, double n_effective);

// Ten unit-Frechet quantiles at equally spaced levels 0.1, ..., 0.9
// (inclusive), used as the threshold grid for bivariate comparisons.
[[nodiscard]] std::vector<double> frechet_threshold_grid();

// sup over (x1, x2) in thresholds^2 of |F_a(x1, x2) - F_b(x1, x2)|, with
// F the bivariate empirical CDF of paired samples.
[[nodiscard]] double bivariate_ecdf_distance(std::span<const double> a1, std::span<const double> a2,
                                             std::span<const double> b1, std::span<const double> b2,
                                             std::span<const double> thresholds);

// sup over thresholds^2 of |F_a(x1, x2) - reference(x1, x2)|.
[[nodiscard]] double bivariate_ecdf_distance(
    std::span<const double> a1, std::span<const double> a2, std::span<const double> thresholds,
    const std::function<double(double, double)>& reference);

}  // namespace maxstable
