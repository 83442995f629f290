#include "maxstable/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace maxstable {
namespace {

void require_samples(std::size_t n, const char* what) {
  if (n < kMinEmpiricalSamples) {
    throw std::invalid_argument(std::string(what) + ": need at least " +
                                std::to_string(kMinEmpiricalSamples) + " samples, got " +
                                std::to_string(n));
  }
}

std::vector<double> sorted(std::span<const double> s) {
  std::vector<double> out(s.begin(), s.end());
  for (double v : out) {
    if (std::isnan(v)) throw std::invalid_argument("empirical: sample is NaN");
  }
  std::sort(out.begin(), out.end());
  return out;
}

void require_thresholds(std::span<const double> th) {
  if (th.empty()) throw std::invalid_argument("thresholds: empty");
  if (!std::is_sorted(th.begin(), th.end())) {
    throw std::invalid_argument("thresholds: must be sorted increasingly");
  }
}

// cdf[i][k] = #{a1 <= th[i], a2 <= th[k]} / n
std::vector<double> bivariate_grid(std::span<const double> a1, std::span<const double> a2,
                                   std::span<const double> th) {
  if (a1.size() != a2.size()) throw std::invalid_argument("bivariate ECDF: paired sizes differ");
  require_samples(a1.size(), "bivariate ECDF");
  const std::size_t m = th.size();
  // Bin m collects samples above the largest threshold.
  std::vector<double> counts((m + 1) * (m + 1), 0.0);
  for (std::size_t i = 0; i < a1.size(); ++i) {
    const auto b1 = static_cast<std::size_t>(std::lower_bound(th.begin(), th.end(), a1[i]) - th.begin());
    const auto b2 = static_cast<std::size_t>(std::lower_bound(th.begin(), th.end(), a2[i]) - th.begin());
    counts[b1 * (m + 1) + b2] += 1.0;
  }
  std::vector<double> cum(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      double c = counts[i * (m + 1) + k];
      if (i) c += cum[(i - 1) * m + k];
      if (k) c += cum[i * m + k - 1];
      if (i && k) c -= cum[(i - 1) * m + k - 1];
      cum[i * m + k] = c;
    }
  }
  std::vector<double> cdf(m * m);
  const double n = static_cast<double>(a1.size());
  for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = cum[i] / n;
  return cdf;
}

}  // namespace

double unit_frechet_cdf(double x) noexcept { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

double unit_frechet_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("Frechet quantile: p must lie in (0, 1)");
  return -1.0 / std::log(p);
}

double empirical_cdf(std::span<const double> samples, double x) {
  require_samples(samples.size(), "empirical CDF");
  const auto count = std::count_if(samples.begin(), samples.end(), [x](double s) { return s <= x; });
  return static_cast<double>(count) / static_cast<double>(samples.size());
}

double ks_distance(std::span<const double> samples,
                   const std::function<double(double)>& reference) {
  require_samples(samples.size(), "KS distance");
  const std::vector<double> s = sorted(samples);
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = reference(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  require_samples(a.size(), "KS two-sample");
  require_samples(b.size(), "KS two-sample");
  const std::vector<double> x = sorted(a);
  const std::vector<double> y = sorted(b);
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t k = 0;
  double d = 0.0;
  while (i < x.size() && k < y.size()) {
    const double v = std::min(x[i], y[k]);
    while (i < x.size() && x[i] == v) ++i;
    while (k < y.size() && y[k] == v) ++k;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(k) / m));
  }
  return d;
}

double ks_critical_value(double alpha, double n_effective) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("KS alpha must lie in (0, 1)");
  if (!(n_effective > 0.0)) throw std::invalid_argument("KS sample size must be > 0");
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(n_effective);
}

std::vector<double> frechet_threshold_grid() {
  std::vector<double> out;
  for (int k = 0; k < 10; ++k) out.push_back(unit_frechet_quantile(0.1 + 0.8 * k / 9.0));
  return out;
}

double bivariate_ecdf_distance(std::span<const double> a1, std::span<const double> a2,
                               std::span<const double> b1, std::span<const double> b2,
                               std::span<const double> thresholds) {
  require_thresholds(thresholds);
  const std::vector<double> fa = bivariate_grid(a1, a2, thresholds);
  const std::vector<double> fb = bivariate_grid(b1, b2, thresholds);
  double d = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) d = std::max(d, std::abs(fa[i] - fb[i]));
  return d;
}

double bivariate_ecdf_distance(std::span<const double> a1, std::span<const double> a2,
                               std::span<const double> thresholds,
                               const std::function<double(double, double)>& reference) {
  require_thresholds(thresholds);
  const std::vector<double> fa = bivariate_grid(a1, a2, thresholds);
  const std::size_t m = thresholds.size();
  double d = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      d = std::max(d, std::abs(fa[i * m + k] - reference(thresholds[i], thresholds[k])));
    }
  }
  return d;
}

}  // namespace maxstable
