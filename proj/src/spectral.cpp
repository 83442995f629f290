#include "maxstable/spectral.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "maxstable/errors.hpp"

namespace maxstable {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool same_bits(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

void require_dimension(const SpectralDistribution& dist, const Vector& t, std::string_view what) {
  if (static_cast<std::size_t>(t.size()) != dist.dimension()) {
    throw std::invalid_argument(std::string(what) + ": point has dimension " +
                                std::to_string(t.size()) + ", distribution has " +
                                std::to_string(dist.dimension()));
  }
}

void require_positive(const Vector& v, std::string_view field) {
  if (v.size() == 0) throw std::invalid_argument(std::string(field) + ": empty parameter vector");
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (!(std::isfinite(v[j]) && v[j] > 0.0)) {
      throw std::invalid_argument(std::string(field) + "[" + std::to_string(j) +
                                  "] must be finite and > 0");
    }
  }
}

// log((e^s - 1) / s), the CGF of U[0,1] at s.
double log_uniform_mgf(double s) {
  if (s > 0.0) return s + std::log(-std::expm1(-s) / s);
  return std::log(std::expm1(s) / s);
}

// d/ds log((e^s - 1) / s)
double log_uniform_mgf_derivative(double s) {
  if (std::abs(s) < 1e-3) return 0.5 + s / 12.0 - s * s * s / 720.0;
  return -1.0 / std::expm1(-s) - 1.0 / s;
}

double uniform_coordinate_cgf(double a, double b, double t) {
  const double s = (b - a) * t;
  // removable singularity at t = 0
  if (std::abs(t) < 1e-8) return a * t + 0.5 * s + s * s / 24.0;
  return a * t + log_uniform_mgf(s);
}

// Inverse CDF of U[a, a + w] tilted by exp(t x), at level v in (0,1).
double tilted_uniform_quantile(double a, double w, double t, double v) {
  const double s = w * t;
  if (std::abs(s) < 1e-12) return a + w * v;
  if (s > 1.0) return a + w + std::log(v + (1.0 - v) * std::exp(-s)) / t;
  return a + std::log1p(v * std::expm1(s)) / t;
}

}  // namespace

std::string_view family_name(Family f) noexcept {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::exponential: return "exp";
    case Family::uniform: return "uniform";
    case Family::gamma: return "gamma";
  }
  return "unknown";
}

// ----------------------------------------------------------------------------

SpectralDistribution::SpectralDistribution(SpectralParams params) : params_(std::move(params)) {
  dimension_ = std::visit(
      overloaded{[](const GaussianParams& p) { return static_cast<std::size_t>(p.mean.size()); },
                 [](const ExponentialParams& p) { return static_cast<std::size_t>(p.rates.size()); },
                 [](const UniformParams& p) { return static_cast<std::size_t>(p.lower.size()); },
                 [](const GammaParams& p) { return static_cast<std::size_t>(p.shapes.size()); }},
      params_);
}

SpectralDistribution SpectralDistribution::gaussian(Vector mean, Matrix covariance) {
  if (mean.size() == 0) throw std::invalid_argument("mu: empty mean vector");
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw std::invalid_argument("sigma: covariance must be " + std::to_string(mean.size()) + "x" +
                                std::to_string(mean.size()));
  }
  if (!mean.allFinite()) throw std::invalid_argument("mu: entries must be finite");
  PsdFactor f = psd_factor(covariance, "sigma");
  Matrix sym = require_symmetric(covariance, "sigma");
  SpectralDistribution out(GaussianParams{std::move(mean), std::move(sym)});
  out.factor_ = std::move(f.factor);
  out.clamped_ = std::move(f.clamped);
  return out;
}

SpectralDistribution SpectralDistribution::exponential(Vector rates, bool centered) {
  require_positive(rates, "lambda");
  return SpectralDistribution(ExponentialParams{std::move(rates), centered});
}

SpectralDistribution SpectralDistribution::uniform(Vector lower, Vector upper) {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw std::invalid_argument("a/b: interval bounds must be non-empty and of equal length");
  }
  for (Eigen::Index j = 0; j < lower.size(); ++j) {
    if (!(std::isfinite(lower[j]) && std::isfinite(upper[j]) && lower[j] < upper[j])) {
      throw std::invalid_argument("a/b: coordinate " + std::to_string(j) +
                                  " needs finite a < b");
    }
  }
  return SpectralDistribution(UniformParams{std::move(lower), std::move(upper)});
}

SpectralDistribution SpectralDistribution::gamma(Vector shapes, Vector rates) {
  require_positive(shapes, "k");
  require_positive(rates, "theta");
  if (shapes.size() != rates.size()) {
    throw std::invalid_argument("k/theta: shape and rate vectors differ in length");
  }
  return SpectralDistribution(GammaParams{std::move(shapes), std::move(rates)});
}

const Matrix& SpectralDistribution::gaussian_factor() const {
  if (family() != Family::gaussian) throw std::logic_error("gaussian_factor: not a gaussian law");
  return factor_;
}

const Matrix& SpectralDistribution::gaussian_clamped_covariance() const {
  if (family() != Family::gaussian) {
    throw std::logic_error("gaussian_clamped_covariance: not a gaussian law");
  }
  return clamped_;
}

bool operator==(const SpectralDistribution& a, const SpectralDistribution& b) {
  if (a.params_.index() != b.params_.index()) return false;
  return std::visit(
      overloaded{
          [&](const GaussianParams& p) {
            const auto& q = std::get<GaussianParams>(b.params_);
            return same_bits(p.mean, q.mean) && same_bits(p.covariance, q.covariance);
          },
          [&](const ExponentialParams& p) {
            const auto& q = std::get<ExponentialParams>(b.params_);
            return same_bits(p.rates, q.rates) && p.centered == q.centered;
          },
          [&](const UniformParams& p) {
            const auto& q = std::get<UniformParams>(b.params_);
            return same_bits(p.lower, q.lower) && same_bits(p.upper, q.upper);
          },
          [&](const GammaParams& p) {
            const auto& q = std::get<GammaParams>(b.params_);
            return same_bits(p.shapes, q.shapes) && same_bits(p.rates, q.rates);
          }},
      a.params_);
}

// ----------------------------------------------------------------------------

Vector mean(const SpectralDistribution& dist) {
  return std::visit(
      overloaded{[](const GaussianParams& p) -> Vector { return p.mean; },
                 [](const ExponentialParams& p) -> Vector {
                   if (p.centered) return Vector::Zero(p.rates.size());
                   return p.rates.cwiseInverse();
                 },
                 [](const UniformParams& p) -> Vector { return 0.5 * (p.lower + p.upper); },
                 [](const GammaParams& p) -> Vector { return p.shapes.cwiseQuotient(p.rates); }},
      dist.params());
}

Vector domain_upper_bound(const SpectralDistribution& dist) {
  const auto d = static_cast<Eigen::Index>(dist.dimension());
  return std::visit(overloaded{[&](const ExponentialParams& p) -> Vector { return p.rates; },
                               [&](const GammaParams& p) -> Vector { return p.rates; },
                               [&](const auto&) -> Vector { return Vector::Constant(d, kInf); }},
                    dist.params());
}

std::optional<std::size_t> domain_violation(const SpectralDistribution& dist, const Vector& t,
                                            double margin) {
  require_dimension(dist, t, "domain check");
  const Vector bound = domain_upper_bound(dist);
  for (Eigen::Index j = 0; j < t.size(); ++j) {
    if (!std::isfinite(t[j]) || !(t[j] + margin < bound[j])) return static_cast<std::size_t>(j);
  }
  return std::nullopt;
}

void require_in_domain(const SpectralDistribution& dist, const Vector& t, std::string_view context,
                       double margin) {
  if (auto j = domain_violation(dist, t, margin)) {
    const Vector bound = domain_upper_bound(dist);
    std::string msg = std::string(context) + ": coordinate " + std::to_string(*j) + " (t=" +
                      format_double(t[static_cast<Eigen::Index>(*j)]) +
                      ") is outside the CGF domain t < " +
                      format_double(bound[static_cast<Eigen::Index>(*j)]);
    if (margin > 0.0) msg += " by at least " + format_double(margin);
    throw DomainError(msg, *j);
  }
}

// ----------------------------------------------------------------------------

double cgf(const SpectralDistribution& dist, const Vector& t) {
  require_in_domain(dist, t, "cgf");
  return std::visit(
      overloaded{
          [&](const GaussianParams& p) {
            return p.mean.dot(t) + 0.5 * t.dot(p.covariance * t);
          },
          [&](const ExponentialParams& p) {
            double sum = 0.0;
            for (Eigen::Index j = 0; j < t.size(); ++j) {
              sum -= std::log1p(-t[j] / p.rates[j]);
              if (p.centered) sum -= t[j] / p.rates[j];
            }
            return sum;
          },
          [&](const UniformParams& p) {
            double sum = 0.0;
            for (Eigen::Index j = 0; j < t.size(); ++j) {
              sum += uniform_coordinate_cgf(p.lower[j], p.upper[j], t[j]);
            }
            return sum;
          },
          [&](const GammaParams& p) {
            double sum = 0.0;
            for (Eigen::Index j = 0; j < t.size(); ++j) {
              sum -= p.shapes[j] * std::log1p(-t[j] / p.rates[j]);
            }
            return sum;
          }},
      dist.params());
}

SimplexWeights::SimplexWeights(std::vector<double> u) : u_(std::move(u)) {
  if (u_.empty()) throw std::invalid_argument("u: simplex weights must be non-empty");
  double total = 0.0;
  for (std::size_t i = 0; i < u_.size(); ++i) {
    if (!(std::isfinite(u_[i]) && u_[i] >= 0.0)) {
      throw std::invalid_argument("u[" + std::to_string(i) + "] must be finite and >= 0");
    }
    total += u_[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("u: weights sum to zero");
  for (double& x : u_) x /= total;
}

Vector convex_combination(std::span<const Vector> ts, const SimplexWeights& u) {
  if (ts.empty() || ts.size() != u.size()) {
    throw std::invalid_argument("convex combination: need one weight per point");
  }
  Vector out = Vector::Zero(ts.front().size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i].size() != out.size()) {
      throw std::invalid_argument("convex combination: points differ in dimension");
    }
    out += u[i] * ts[i];
  }
  return out;
}

double cgf_multi(const SpectralDistribution& dist, std::span<const Vector> ts,
                 const SimplexWeights& u) {
  const Vector centre = convex_combination(ts, u);
  double value = cgf(dist, centre);
  for (std::size_t i = 0; i < ts.size(); ++i) value -= u[i] * cgf(dist, ts[i]);
  return value;
}

double fd_step(double tj) noexcept {
  static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  return base * std::max(1.0, std::abs(tj));
}

namespace {

void require_gradient_interior(const SpectralDistribution& dist, const Vector& t,
                               std::string_view context) {
  require_dimension(dist, t, context);
  double margin = 0.0;
  for (Eigen::Index j = 0; j < t.size(); ++j) margin = std::max(margin, fd_step(t[j]));
  require_in_domain(dist, t, context, margin);
}

}  // namespace

Vector cgf_gradient(const SpectralDistribution& dist, const Vector& t) {
  require_gradient_interior(dist, t, "cgf_gradient");
  return std::visit(
      overloaded{[&](const GaussianParams& p) -> Vector { return p.covariance * t + p.mean; },
                 [&](const ExponentialParams& p) -> Vector {
                   Vector g(t.size());
                   for (Eigen::Index j = 0; j < t.size(); ++j) {
                     g[j] = 1.0 / (p.rates[j] - t[j]);
                     if (p.centered) g[j] -= 1.0 / p.rates[j];
                   }
                   return g;
                 },
                 [&](const UniformParams& p) -> Vector {
                   Vector g(t.size());
                   for (Eigen::Index j = 0; j < t.size(); ++j) {
                     const double w = p.upper[j] - p.lower[j];
                     g[j] = p.lower[j] + w * log_uniform_mgf_derivative(w * t[j]);
                   }
                   return g;
                 },
                 [&](const GammaParams& p) -> Vector {
                   Vector g(t.size());
                   for (Eigen::Index j = 0; j < t.size(); ++j) {
                     g[j] = p.shapes[j] / (p.rates[j] - t[j]);
                   }
                   return g;
                 }},
      dist.params());
}

Vector cgf_gradient_fd(const SpectralDistribution& dist, const Vector& t) {
  require_gradient_interior(dist, t, "cgf_gradient_fd");
  Vector g(t.size());
  for (Eigen::Index j = 0; j < t.size(); ++j) {
    const double h = fd_step(t[j]);
    Vector up = t;
    Vector down = t;
    up[j] += h;
    down[j] -= h;
    g[j] = (cgf(dist, up) - cgf(dist, down)) / (up[j] - down[j]);
  }
  return g;
}

// ----------------------------------------------------------------------------

SpectralSampler::SpectralSampler(const SpectralDistribution& dist)
    : SpectralSampler(dist, Vector::Zero(static_cast<Eigen::Index>(dist.dimension()))) {}

SpectralSampler::SpectralSampler(const SpectralDistribution& dist, const Vector& tilt)
    : family_(dist.family()), dim_(dist.dimension()) {
  require_in_domain(dist, tilt, "tilted sampler");
  const auto d = static_cast<Eigen::Index>(dim_);
  shift_ = Vector::Zero(d);
  std::visit(overloaded{[&](const GaussianParams& p) {
                          factor_ = dist.gaussian_factor();
                          location_ = p.mean + dist.gaussian_clamped_covariance() * tilt;
                        },
                        [&](const ExponentialParams& p) {
                          rate_ = p.rates - tilt;
                          if (p.centered) shift_ = p.rates.cwiseInverse();
                        },
                        [&](const UniformParams& p) {
                          location_ = p.lower;
                          width_ = p.upper - p.lower;
                          tilt_ = tilt;
                        },
                        [&](const GammaParams& p) {
                          shape_ = p.shapes;
                          rate_ = p.rates - tilt;
                        }},
             dist.params());
}

void SpectralSampler::draw(Rng& rng, std::span<double> out) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  switch (family_) {
    case Family::gaussian: {
      // z drawn first so that the draw order does not depend on the factor.
      double z_small[8];
      std::vector<double> z_large;
      double* z = z_small;
      if (dim_ > 8) {
        z_large.resize(dim_);
        z = z_large.data();
      }
      for (Eigen::Index k = 0; k < d; ++k) z[k] = rng.normal();
      for (Eigen::Index j = 0; j < d; ++j) {
        double acc = location_[j];
        for (Eigen::Index k = 0; k < d; ++k) acc += factor_(j, k) * z[k];
        out[static_cast<std::size_t>(j)] = acc;
      }
      return;
    }
    case Family::exponential:
      for (Eigen::Index j = 0; j < d; ++j) {
        out[static_cast<std::size_t>(j)] = rng.exponential() / rate_[j] - shift_[j];
      }
      return;
    case Family::uniform:
      for (Eigen::Index j = 0; j < d; ++j) {
        out[static_cast<std::size_t>(j)] =
            tilted_uniform_quantile(location_[j], width_[j], tilt_[j], rng.uniform());
      }
      return;
    case Family::gamma:
      for (Eigen::Index j = 0; j < d; ++j) {
        out[static_cast<std::size_t>(j)] = rng.gamma(shape_[j]) / rate_[j];
      }
      return;
  }
}

namespace {

Matrix draw_rows(const SpectralSampler& sampler, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("sample: n must be >= 1");
  // row-major scratch, copied once
  std::vector<double> buffer(n * sampler.dimension());
  for (std::size_t i = 0; i < n; ++i) {
    sampler.draw(rng, std::span<double>(buffer).subspan(i * sampler.dimension(),
                                                        sampler.dimension()));
  }
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(sampler.dimension()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < sampler.dimension(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          buffer[i * sampler.dimension() + j];
    }
  }
  return out;
}

}  // namespace

Matrix sample(const SpectralDistribution& dist, std::size_t n, Rng& rng) {
  return draw_rows(SpectralSampler(dist), n, rng);
}

Matrix sample_tilted(const SpectralDistribution& dist, const Vector& tilt, std::size_t n,
                     Rng& rng) {
  return draw_rows(SpectralSampler(dist, tilt), n, rng);
}

// ----------------------------------------------------------------------------

ShapeFunction ShapeFunction::cgf_of(const SpectralDistribution& dist) {
  return ShapeFunction(CgfShape{dist});
}

ShapeFunction ShapeFunction::quadratic(Vector mu, Matrix sigma, double c0) {
  if (mu.size() == 0 || sigma.rows() != mu.size() || sigma.cols() != mu.size()) {
    throw std::invalid_argument("kappa: quadratic needs mu of length d and a d x d sigma");
  }
  if (!mu.allFinite() || !std::isfinite(c0)) {
    throw std::invalid_argument("kappa: quadratic parameters must be finite");
  }
  (void)psd_factor(sigma, "kappa sigma");
  Matrix sym = require_symmetric(sigma, "kappa sigma");
  return ShapeFunction(QuadraticShape{std::move(mu), std::move(sym), c0});
}

double ShapeFunction::operator()(const Vector& t) const {
  return std::visit(overloaded{[&](const CgfShape& s) { return cgf(s.dist, t); },
                               [&](const QuadraticShape& q) {
                                 if (t.size() != q.mu.size()) {
                                   throw std::invalid_argument("kappa: dimension mismatch");
                                 }
                                 return q.mu.dot(t) + 0.5 * t.dot(q.sigma * t) + q.c0;
                               }},
                    kind_);
}

std::size_t ShapeFunction::dimension() const noexcept {
  return std::visit(
      overloaded{[](const CgfShape& s) { return s.dist.dimension(); },
                 [](const QuadraticShape& q) { return static_cast<std::size_t>(q.mu.size()); }},
      kind_);
}

}  // namespace maxstable
