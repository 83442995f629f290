#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "maxstable/linalg.hpp"
#include "maxstable/rng.hpp"
#include "maxstable/spectral.hpp"

namespace maxstable {

/// Locations t_1..t_n and thresholds x_1..x_n of P(eta(t_j) <= x_j for all j).
struct FddQuery {
  FddQuery(std::vector<Vector> ts, std::vector<double> xs);

  std::vector<Vector> ts;
  std::vector<double> xs;

  [[nodiscard]] std::size_t size() const noexcept { return ts.size(); }
};

enum class ExponentMethod { mc, closed_marginal, closed_bivariate };

[[nodiscard]] std::string_view method_name(ExponentMethod m) noexcept;
[[nodiscard]] ExponentMethod parse_method(std::string_view text);

/// V with P(eta(t_j) <= x_j for all j) = exp(-V).
struct ExponentValue {
  double value = 0.0;
  double standard_error = 0.0;  // 0 for closed forms
  ExponentMethod method = ExponentMethod::mc;
};

// tilted_mixture draws the spectral vector from an equal-weight-in-1/x
// mixture of the exponentially tilted laws P_{t_k} and reweights by the
// mixture density (bounded estimator). plain averages
// max_j exp(<X,t_j> - kappa(t_j)) / x_j under P directly.
enum class ExponentEstimator { tilted_mixture, plain };

inline constexpr std::size_t kMinMcSamples = 1000;
inline constexpr std::size_t kMcChunk = 1u << 15;

// Monte Carlo estimate of E max_j exp(<X,t_j> - kappa(t_j)) / x_j. The
// sample is split into fixed chunks of kMcChunk draws, chunk c seeded with
// derive_seed(master, c), master drawn from rng; the result does not depend
// on `threads`.
[[nodiscard]] ExponentValue exponent_mc(const SpectralDistribution& dist,
                                        const ShapeFunction& kappa, const FddQuery& q,
                                        std::size_t mc_n, Rng& rng,
                                        ExponentEstimator estimator = ExponentEstimator::tilted_mixture,
                                        unsigned threads = 0);

// n = 1: exp(phi(t) - kappa(t)) / x.
[[nodiscard]] ExponentValue exponent_closed_marginal(const SpectralDistribution& dist,
                                                     const ShapeFunction& kappa,
                                                     const FddQuery& q);

// Standard normal CDF via erfc.
[[nodiscard]] double standard_normal_cdf(double z) noexcept;

// Husler-Reiss bivariate exponent for variogram value gamma_h at thresholds
// (x1, x2); lambda = sqrt(gamma_h) / 2.
[[nodiscard]] ExponentValue husler_reiss_V(double gamma_h, double x1, double x2);

// n = 2, gaussian spectral law: Husler-Reiss with
// gamma = <t1 - t2, sigma (t1 - t2)> and thresholds rescaled by
// exp(kappa(t) - phi(t)).
[[nodiscard]] ExponentValue exponent_closed_bivariate(const SpectralDistribution& dist,
                                                      const ShapeFunction& kappa,
                                                      const FddQuery& q);

inline constexpr std::size_t kDefaultMcSamples = 1'000'000;

[[nodiscard]] ExponentValue exponent(const SpectralDistribution& dist, const ShapeFunction& kappa,
                                     const FddQuery& q, ExponentMethod method, Rng* rng = nullptr,
                                     std::size_t mc_n = kDefaultMcSamples, unsigned threads = 0);

// exp(-V) for the chosen method; rng is required for mc.
[[nodiscard]] double fdd_cdf(const SpectralDistribution& dist, const ShapeFunction& kappa,
                             const FddQuery& q, ExponentMethod method, Rng* rng = nullptr,
                             std::size_t mc_n = kDefaultMcSamples, unsigned threads = 0);

}  // namespace maxstable
