#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "maxstable/linalg.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

// ============================================================================
// Spectral laws
// ============================================================================

enum class Family { gaussian, exponential, uniform, gamma };

[[nodiscard]] std::string_view family_name(Family f) noexcept;

struct GaussianParams {
  Vector mean;
  Matrix covariance;
};

// Independent coordinates X_j ~ Exp(rate_j); centered subtracts 1/rate_j.
struct ExponentialParams {
  Vector rates;
  bool centered = false;
};

// Independent coordinates X_j ~ U[lower_j, upper_j].
struct UniformParams {
  Vector lower;
  Vector upper;
};

// Independent coordinates X_j ~ Gamma(shape_j, rate_j).
struct GammaParams {
  Vector shapes;
  Vector rates;
};

using SpectralParams = std::variant<GaussianParams, ExponentialParams, UniformParams, GammaParams>;

/// The law of the spectral vector X.
///
/// The registry is closed: every family has a sampler, an exponentially
/// tilted sampler, a closed-form CGF and a closed-form gradient. Instances
/// are immutable and validated on construction (std::invalid_argument for
/// bad parameters, NumericError for a covariance that is not PSD).
class SpectralDistribution {
 public:
  [[nodiscard]] static SpectralDistribution gaussian(Vector mean, Matrix covariance);
  [[nodiscard]] static SpectralDistribution exponential(Vector rates, bool centered = false);
  [[nodiscard]] static SpectralDistribution uniform(Vector lower, Vector upper);
  [[nodiscard]] static SpectralDistribution gamma(Vector shapes, Vector rates);

  [[nodiscard]] Family family() const noexcept { return static_cast<Family>(params_.index()); }
  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] const SpectralParams& params() const noexcept { return params_; }

  // Square-root factor of the (clamped) covariance; gaussian only.
  [[nodiscard]] const Matrix& gaussian_factor() const;
  [[nodiscard]] const Matrix& gaussian_clamped_covariance() const;

  // Bit-exact parameter equality.
  friend bool operator==(const SpectralDistribution& a, const SpectralDistribution& b);

 private:
  explicit SpectralDistribution(SpectralParams params);

  SpectralParams params_;
  std::size_t dimension_ = 0;
  Matrix factor_;
  Matrix clamped_;
};

// E X.
[[nodiscard]] Vector mean(const SpectralDistribution& dist);

// Upper bound of the CGF domain per coordinate (+inf when unbounded). The
// domain is the open set {t : t_j < bound_j for all j}.
[[nodiscard]] Vector domain_upper_bound(const SpectralDistribution& dist);

// First coordinate j with t_j + margin >= bound_j (or t_j not finite).
[[nodiscard]] std::optional<std::size_t> domain_violation(const SpectralDistribution& dist,
                                                          const Vector& t,
                                                          double margin = 0.0);

// Throws DomainError naming `context` and the offending coordinate.
void require_in_domain(const SpectralDistribution& dist, const Vector& t,
                       std::string_view context, double margin = 0.0);

// ============================================================================
// Cumulant generating function
// ============================================================================

// phi(t) = log E exp<X, t>, closed form; phi(0) == 0 exactly.
[[nodiscard]] double cgf(const SpectralDistribution& dist, const Vector& t);

/// Simplex weights u_1..u_n: nonnegative, renormalized to sum to one.
class SimplexWeights {
 public:
  explicit SimplexWeights(std::vector<double> u);

  [[nodiscard]] std::size_t size() const noexcept { return u_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return u_[i]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return u_; }

 private:
  std::vector<double> u_;
};

// sum_i u_i t_i
[[nodiscard]] Vector convex_combination(std::span<const Vector> ts, const SimplexWeights& u);

// phi(sum u_i t_i) - sum u_i phi(t_i): the CGF of the centered vector
// (<X,t_i> - phi(t_i))_i at u. Nonpositive by convexity.
[[nodiscard]] double cgf_multi(const SpectralDistribution& dist, std::span<const Vector> ts,
                               const SimplexWeights& u);

// Central-difference step for coordinate j: cbrt(eps) * max(1, |t_j|).
[[nodiscard]] double fd_step(double tj) noexcept;

// Closed-form gradient of phi. Rejects t within fd_step of the boundary.
[[nodiscard]] Vector cgf_gradient(const SpectralDistribution& dist, const Vector& t);

// Central finite differences of cgf(); independent of the closed forms.
[[nodiscard]] Vector cgf_gradient_fd(const SpectralDistribution& dist, const Vector& t);

// ============================================================================
// Sampling
// ============================================================================

/// Draws X, or X under the exponentially tilted law
/// P_t(dx) = exp(<x,t> - phi(t)) P(dx) when constructed with a tilt.
class SpectralSampler {
 public:
  explicit SpectralSampler(const SpectralDistribution& dist);
  SpectralSampler(const SpectralDistribution& dist, const Vector& tilt);

  [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }

  // Writes one draw into out (size == dimension()).
  void draw(Rng& rng, std::span<double> out) const;

 private:
  Family family_;
  std::size_t dim_;
  Vector location_;  // gaussian mean, uniform lower
  Matrix factor_;
  Vector rate_;      // exponential / gamma (tilted) rates
  Vector shift_;     // subtracted after the draw (centered exponential)
  Vector shape_;     // gamma shapes
  Vector width_;     // uniform b - a
  Vector tilt_;      // uniform tilt
};

// n x d matrix of independent draws; deterministic given the generator.
[[nodiscard]] Matrix sample(const SpectralDistribution& dist, std::size_t n, Rng& rng);
[[nodiscard]] Matrix sample_tilted(const SpectralDistribution& dist, const Vector& tilt,
                                   std::size_t n, Rng& rng);

// ============================================================================
// Shape function kappa
// ============================================================================

struct CgfShape {
  SpectralDistribution dist;
};

struct QuadraticShape {
  Vector mu;
  Matrix sigma;
  double c0 = 0.0;
};

/// Normalizer kappa(t) in U_i exp(<X_i,t> - kappa(t)).
class ShapeFunction {
 public:
  [[nodiscard]] static ShapeFunction cgf_of(const SpectralDistribution& dist);
  // <mu,t> + 1/2 <t, sigma t> + c0
  [[nodiscard]] static ShapeFunction quadratic(Vector mu, Matrix sigma, double c0 = 0.0);

  [[nodiscard]] double operator()(const Vector& t) const;
  [[nodiscard]] bool is_cgf() const noexcept { return std::holds_alternative<CgfShape>(kind_); }
  [[nodiscard]] std::size_t dimension() const noexcept;
  [[nodiscard]] const std::variant<CgfShape, QuadraticShape>& kind() const noexcept { return kind_; }

 private:
  explicit ShapeFunction(std::variant<CgfShape, QuadraticShape> kind) : kind_(std::move(kind)) {}
  std::variant<CgfShape, QuadraticShape> kind_;
};

// ============================================================================
// Text format: family:key=v1,v2;key=...
// ============================================================================

// gaussian:mu=0,0;sigma=1,0.5,0.5,1   exp:lambda=1;centered=false
// uniform:a=0;b=1                     gamma:k=2;theta=1
// Throws std::invalid_argument naming the offending field.
[[nodiscard]] SpectralDistribution parse_distribution(std::string_view text);

// Canonical spec string; parse_distribution(to_spec_string(d)) == d
// bit-for-bit (shortest round-trip number formatting).
[[nodiscard]] std::string to_spec_string(const SpectralDistribution& dist);

// "cgf" or "quadratic:mu=...;sigma=...;c0=...".
[[nodiscard]] ShapeFunction parse_shape_function(std::string_view text,
                                                 const SpectralDistribution& dist);
[[nodiscard]] std::string to_spec_string(const ShapeFunction& kappa);

// Shortest decimal string that parses back to exactly `x`.
[[nodiscard]] std::string format_double(double x);
// Strict full-string parse; throws std::invalid_argument mentioning `field`.
[[nodiscard]] double parse_double(std::string_view text, std::string_view field);
// Row-major d x d matrix from d*d comma-separated values.
[[nodiscard]] Matrix parse_square_matrix(std::string_view text, std::string_view field);
// Comma-separated list of doubles.
[[nodiscard]] std::vector<double> parse_double_list(std::string_view text, std::string_view field);

}  // namespace maxstable
