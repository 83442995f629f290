#include "maxstable/fdd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "maxstable/errors.hpp"
#include "maxstable/parallel.hpp"

namespace maxstable {
namespace {

constexpr double kLambdaZero = 1e-8;

double log_sum_exp(std::span<const double> v) {
  const double hi = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

void require_dimension(const SpectralDistribution& dist, const ShapeFunction& kappa,
                       const FddQuery& q) {
  if (kappa.dimension() != dist.dimension()) {
    throw std::invalid_argument("kappa dimension does not match the distribution");
  }
  for (const Vector& t : q.ts) {
    if (static_cast<std::size_t>(t.size()) != dist.dimension()) {
      throw std::invalid_argument("fdd query: location dimension does not match the distribution");
    }
  }
}

// -log x_j - kappa(t_j) + phi(t_j): log of 1 / effective threshold.
std::vector<double> log_inverse_thresholds(const SpectralDistribution& dist,
                                           const ShapeFunction& kappa, const FddQuery& q) {
  std::vector<double> a(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) {
    require_in_domain(dist, q.ts[j], "fdd location " + std::to_string(j));
    a[j] = -std::log(q.xs[j]) - kappa(q.ts[j]) + cgf(dist, q.ts[j]);
    if (std::isnan(a[j])) throw NumericError("fdd: threshold rescaling is not a number");
  }
  return a;
}

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
};

}  // namespace

FddQuery::FddQuery(std::vector<Vector> ts_in, std::vector<double> xs_in)
    : ts(std::move(ts_in)), xs(std::move(xs_in)) {
  if (ts.empty()) throw std::invalid_argument("fdd query: needs at least one location");
  if (ts.size() != xs.size()) {
    throw std::invalid_argument("fdd query: " + std::to_string(ts.size()) + " locations but " +
                                std::to_string(xs.size()) + " thresholds");
  }
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (!(std::isfinite(xs[j]) && xs[j] > 0.0)) {
      throw std::invalid_argument("fdd query: threshold " + std::to_string(j) +
                                  " must be finite and > 0");
    }
    if (ts[j].size() != ts.front().size() || ts[j].size() == 0) {
      throw std::invalid_argument("fdd query: locations must share a nonzero dimension");
    }
    if (!ts[j].allFinite()) throw std::invalid_argument("fdd query: location is not finite");
    for (std::size_t k = 0; k < j; ++k) {
      if (ts[j] == ts[k]) {
        throw std::invalid_argument("fdd query: locations " + std::to_string(k) + " and " +
                                    std::to_string(j) + " coincide");
      }
    }
  }
}

std::string_view method_name(ExponentMethod m) noexcept {
  switch (m) {
    case ExponentMethod::mc: return "mc";
    case ExponentMethod::closed_marginal: return "closed_marginal";
    case ExponentMethod::closed_bivariate: return "closed_bivariate";
  }
  return "mc";
}

ExponentMethod parse_method(std::string_view text) {
  if (text == "mc") return ExponentMethod::mc;
  if (text == "closed_marginal") return ExponentMethod::closed_marginal;
  if (text == "closed_bivariate") return ExponentMethod::closed_bivariate;
  throw std::invalid_argument("method: unknown '" + std::string(text) +
                              "' (expected mc, closed_marginal or closed_bivariate)");
}

ExponentValue exponent_mc(const SpectralDistribution& dist, const ShapeFunction& kappa,
                          const FddQuery& q, std::size_t mc_n, Rng& rng,
                          ExponentEstimator estimator, unsigned threads) {
  if (mc_n < kMinMcSamples) {
    throw std::invalid_argument("mc_n must be >= " + std::to_string(kMinMcSamples));
  }
  require_dimension(dist, kappa, q);
  const std::size_t n = q.size();
  const std::size_t d = dist.dimension();
  const std::vector<double> a = log_inverse_thresholds(dist, kappa, q);
  std::vector<double> phi(n);
  for (std::size_t j = 0; j < n; ++j) phi[j] = cgf(dist, q.ts[j]);

  // Mixture component k has weight proportional to exp(a_k).
  const double log_total = log_sum_exp(a);
  std::vector<double> cumulative(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += std::exp(a[k] - log_total);
    cumulative[k] = acc;
  }
  std::vector<SpectralSampler> samplers;
  if (estimator == ExponentEstimator::tilted_mixture) {
    for (const Vector& t : q.ts) samplers.emplace_back(dist, t);
  } else {
    samplers.emplace_back(dist);
  }

  const std::uint64_t master = rng.next_u64();
  const std::size_t chunks = (mc_n + kMcChunk - 1) / kMcChunk;
  std::vector<Moments> moments(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    Rng chunk_rng(master, c);
    const std::size_t begin = c * kMcChunk;
    const std::size_t count = std::min(kMcChunk, mc_n - begin);
    std::vector<double> x(d);
    std::vector<double> terms(n);
    Moments m;
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t k = 0;
      if (estimator == ExponentEstimator::tilted_mixture) {
        const double u = chunk_rng.uniform();
        while (k + 1 < n && u > cumulative[k]) ++k;
      }
      samplers[k].draw(chunk_rng, x);
      const Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(d));
      for (std::size_t j = 0; j < n; ++j) terms[j] = xv.dot(q.ts[j]) - phi[j] + a[j];
      const double hi = *std::max_element(terms.begin(), terms.end());
      const double value = estimator == ExponentEstimator::tilted_mixture
                               ? std::exp(hi - log_sum_exp(terms) + log_total)
                               : std::exp(hi);
      m.sum += value;
      m.sum_sq += value * value;
    }
    moments[c] = m;
  });

  double sum = 0.0;
  double sum_sq = 0.0;
  for (const Moments& m : moments) {
    sum += m.sum;
    sum_sq += m.sum_sq;
  }
  const double nn = static_cast<double>(mc_n);
  const double mean = sum / nn;
  const double var = std::max(0.0, (sum_sq / nn - mean * mean) * nn / (nn - 1.0));
  if (!std::isfinite(mean)) throw NumericError("exponent estimate is not finite");
  return ExponentValue{mean, std::sqrt(var / nn), ExponentMethod::mc};
}

ExponentValue exponent_closed_marginal(const SpectralDistribution& dist,
                                       const ShapeFunction& kappa, const FddQuery& q) {
  if (q.size() != 1) throw std::invalid_argument("closed_marginal requires exactly one location");
  require_dimension(dist, kappa, q);
  const double v = std::exp(log_inverse_thresholds(dist, kappa, q).front());
  if (!std::isfinite(v)) throw NumericError("closed_marginal exponent is not finite");
  return ExponentValue{v, 0.0, ExponentMethod::closed_marginal};
}

double standard_normal_cdf(double z) noexcept {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

ExponentValue husler_reiss_V(double gamma_h, double x1, double x2) {
  if (!(gamma_h >= 0.0)) throw std::invalid_argument("Husler-Reiss: gamma must be >= 0");
  if (!(x1 > 0.0 && x2 > 0.0 && std::isfinite(x1) && std::isfinite(x2))) {
    throw std::invalid_argument("Husler-Reiss: thresholds must be finite and > 0");
  }
  ExponentValue out{0.0, 0.0, ExponentMethod::closed_bivariate};
  if (std::isinf(gamma_h)) {
    out.value = 1.0 / x1 + 1.0 / x2;
    return out;
  }
  const double lambda = std::sqrt(gamma_h) / 2.0;
  if (lambda < kLambdaZero) {
    out.value = std::max(1.0 / x1, 1.0 / x2);
    return out;
  }
  const double r = std::log(x2 / x1) / (2.0 * lambda);
  out.value = standard_normal_cdf(lambda + r) / x1 + standard_normal_cdf(lambda - r) / x2;
  return out;
}

ExponentValue exponent_closed_bivariate(const SpectralDistribution& dist,
                                        const ShapeFunction& kappa, const FddQuery& q) {
  if (q.size() != 2) throw std::invalid_argument("closed_bivariate requires exactly two locations");
  const auto* g = std::get_if<GaussianParams>(&dist.params());
  if (g == nullptr) {
    throw std::invalid_argument("closed_bivariate requires a gaussian spectral distribution");
  }
  require_dimension(dist, kappa, q);
  const std::vector<double> a = log_inverse_thresholds(dist, kappa, q);
  const Vector h = q.ts[0] - q.ts[1];
  const double gamma_h = std::max(0.0, h.dot(g->covariance * h));
  ExponentValue out = husler_reiss_V(gamma_h, std::exp(-a[0]), std::exp(-a[1]));
  if (!std::isfinite(out.value)) throw NumericError("closed_bivariate exponent is not finite");
  return out;
}

ExponentValue exponent(const SpectralDistribution& dist, const ShapeFunction& kappa,
                       const FddQuery& q, ExponentMethod method, Rng* rng, std::size_t mc_n,
                       unsigned threads) {
  switch (method) {
    case ExponentMethod::closed_marginal: return exponent_closed_marginal(dist, kappa, q);
    case ExponentMethod::closed_bivariate: return exponent_closed_bivariate(dist, kappa, q);
    case ExponentMethod::mc: break;
  }
  if (rng == nullptr) throw std::invalid_argument("method mc requires a random generator");
  return exponent_mc(dist, kappa, q, mc_n, *rng, ExponentEstimator::tilted_mixture, threads);
}

double fdd_cdf(const SpectralDistribution& dist, const ShapeFunction& kappa, const FddQuery& q,
               ExponentMethod method, Rng* rng, std::size_t mc_n, unsigned threads) {
  return std::exp(-exponent(dist, kappa, q, method, rng, mc_n, threads).value);
}

}  // namespace maxstable
