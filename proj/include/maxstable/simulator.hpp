#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "maxstable/grid.hpp"
#include "maxstable/linalg.hpp"
#include "maxstable/pointproc.hpp"
#include "maxstable/rng.hpp"
#include "maxstable/spectral.hpp"

namespace maxstable {

inline constexpr std::size_t kDefaultPoints = 10'000;

// ============================================================================
// Variogram
// ============================================================================

struct FractionalVariogram {
  double scale = 1.0;  // gamma(h) = (|h| / scale)^alpha
  double alpha = 1.0;  // in (0, 2]
};

struct QuadraticVariogram {
  Matrix sigma;  // gamma(h) = <h, sigma h>
};

class Variogram {
 public:
  [[nodiscard]] static Variogram fractional(double scale, double alpha);
  [[nodiscard]] static Variogram quadratic(Matrix sigma);

  [[nodiscard]] double operator()(const Vector& h) const;
  [[nodiscard]] const std::variant<FractionalVariogram, QuadraticVariogram>& kind() const noexcept {
    return kind_;
  }

 private:
  explicit Variogram(std::variant<FractionalVariogram, QuadraticVariogram> kind)
      : kind_(std::move(kind)) {}
  std::variant<FractionalVariogram, QuadraticVariogram> kind_;
};

// fractional:scale=1;alpha=1.5   quadratic:sigma=1,0,0,1
[[nodiscard]] Variogram parse_variogram(std::string_view text);
[[nodiscard]] std::string to_spec_string(const Variogram& v);

// ============================================================================
// Constructions
// ============================================================================

// U_i exp(<X_i,t> - kappa(t))
struct GeneralConstruction {
  SpectralDistribution dist;
  ShapeFunction kappa;
};

// U_i exp(<N_i,t> - <t,sigma t>/2), N ~ N(0, sigma)
struct SmithConstruction {
  Matrix sigma;
};

// U_i exp(Z_i(t) - gamma(t)/2)
struct BrownResnickConstruction {
  Variogram variogram;
};

// c max_i V_i exp(-<t - T_i, sigma (t - T_i)>/2), c = det(sigma)^{1/2} / (2 pi)^{d/2}
struct MovingMaximaConstruction {
  Matrix sigma;
  std::optional<Box> window_core;  // defaults to the grid's bounding box
};

using Construction = std::variant<GeneralConstruction, SmithConstruction,
                                  BrownResnickConstruction, MovingMaximaConstruction>;

// "general", "smith", "brown-resnick", "moving-maxima"
[[nodiscard]] std::string_view construction_name(const Construction& c) noexcept;
[[nodiscard]] std::string construction_parameters(const Construction& c);

// ============================================================================
// Fields
// ============================================================================

/// Effect of doubling the cascade length on a set of fields.
struct TruncationDiagnostic {
  std::size_t pairs = 0;    // (grid point, replicate) pairs compared
  std::size_t changed = 0;  // pairs whose value changed under doubling
  double max_relative_change = 0.0;

  [[nodiscard]] double change_fraction() const noexcept {
    return pairs == 0 ? 0.0 : static_cast<double>(changed) / static_cast<double>(pairs);
  }
  // change fraction below 1%
  [[nodiscard]] bool converged() const noexcept { return change_fraction() < 0.01; }

  TruncationDiagnostic& operator+=(const TruncationDiagnostic& other);
};

struct Provenance {
  std::string construction;
  std::string parameters;
  std::size_t n_points = 0;  // cascade length, or storms used for moving maxima
  SeedRecord seed;
  TruncationDiagnostic truncation;
  // moving maxima only
  double buffer_radius = 0.0;
  double edge_error_bound = 0.0;
};

struct Field {
  Grid grid;
  std::vector<double> values;  // Frechet scale, strictly positive
  Provenance provenance;
};

// ----------------------------------------------------------------------------
// Spectral constructions. Each field also simulates the cascade continued to
// 2 * n_points (same points, same X_i order) and records the change as its
// truncation diagnostic. Spectral terms are max-reduced in log space as
// log U_i + <X_i,t> - kappa(t); the winning term is exponentiated once.
// ----------------------------------------------------------------------------

[[nodiscard]] Field simulate_general(const SpectralDistribution& dist, const ShapeFunction& kappa,
                                     const Grid& grid, std::size_t n_points, Rng& rng);

// As above with a caller-supplied cascade (at least 2 * n_points long) and
// spectral stream.
[[nodiscard]] Field simulate_general(const SpectralDistribution& dist, const ShapeFunction& kappa,
                                     const Grid& grid, const FrechetCascade& cascade,
                                     std::size_t n_points, Rng& spectral_rng);

[[nodiscard]] Field simulate_smith(const Matrix& sigma, const Grid& grid, std::size_t n_points,
                                   Rng& rng);

// Z is drawn on the grid with Z(0) = 0 pinned and covariance
// (gamma(s) + gamma(t) - gamma(s - t)) / 2.
[[nodiscard]] Field simulate_brown_resnick(const Variogram& v, const Grid& grid,
                                           std::size_t n_points, Rng& rng);

// ----------------------------------------------------------------------------
// Moving maxima
// ----------------------------------------------------------------------------

struct MovingMaximaBuffer {
  double radius = 0.0;
  double edge_error_bound = 0.0;  // c exp(-lambda_min r^2 / 2) |W| 1e3
  Box window;
};

// Buffer radius r such that a storm outside the buffered window contributes
// less than 1e-8 at any grid point, with the strongest storm taken as
// |W| * 1e3. Throws NumericError for singular sigma or when no r exists.
[[nodiscard]] MovingMaximaBuffer moving_maxima_buffer(const Matrix& sigma, const Box& core);

// Storms are generated in decreasing strength on the buffered window and
// stop once c V_i drops below the current minimum of the field over the
// grid, so the result is exact on the grid up to the edge bound.
[[nodiscard]] Field simulate_moving_maxima(const Matrix& sigma, const Grid& grid,
                                           const std::optional<Box>& window_core, Rng& rng);

// Exact maximum over a fixed storm list; no buffer, no stopping rule.
[[nodiscard]] Field moving_maxima_from_storms(const Matrix& sigma, const Grid& grid,
                                              const StormSet& storms);

// ----------------------------------------------------------------------------
// Dispatch, replicates, diagnostics, output
// ----------------------------------------------------------------------------

[[nodiscard]] Field simulate(const Construction& c, const Grid& grid, std::size_t n_points,
                             Rng& rng);

struct ReplicateSet {
  Grid grid;
  Matrix values;  // replicates x grid size
  TruncationDiagnostic truncation;
  std::string construction;
  std::uint64_t seed = 0;
};

// Replicate r is simulated with Rng(seed, r); output is independent of the
// number of threads.
[[nodiscard]] ReplicateSet simulate_replicates(const Construction& c, const Grid& grid,
                                               std::size_t n_points, std::uint64_t seed,
                                               std::size_t replicates, unsigned threads = 0);

// Paired n_points / 2 n_points runs over `replicates` fields seeded from
// rng's seed record.
[[nodiscard]] TruncationDiagnostic truncation_check(const Construction& c, const Grid& grid,
                                                    std::size_t n_points, Rng& rng,
                                                    std::size_t replicates,
                                                    unsigned threads = 0);

// "# construction=<kind> seed=<u64> n_points=<n> converged=<bool>" followed
// by "replicate=<r>" and `extra_header` (if any), then each comment line
// prefixed with "# ", then one "t_1,...,t_d,value" row per grid point with
// 17 significant digits.
void write_field_csv(std::ostream& out, const Field& field, std::string_view extra_header = {},
                     const std::vector<std::string>& comment_lines = {});

}  // namespace maxstable
