#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "maxstable/grid.hpp"
#include "maxstable/linalg.hpp"
#include "maxstable/pointproc.hpp"
#include "maxstable/rng.hpp"
#include "maxstable/simulator.hpp"
#include "maxstable/spectral.hpp"

namespace maxstable {

// Separates round-off from genuine violations of the criterion.
inline constexpr double kTolDefect = 1e-6;

/// Tuple t_1..t_n, simplex weights u and shift h.
struct CriterionConfig {
  CriterionConfig(std::vector<Vector> ts, SimplexWeights u, Vector h);

  std::vector<Vector> ts;
  SimplexWeights u;
  Vector h;

  [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(h.size()); }
};

// First evaluation point (t_i, t_i + h, sum u_i t_i, h + sum u_i t_i)
// outside the CGF domain, as a human-readable label.
[[nodiscard]] std::optional<std::string> config_domain_violation(const SpectralDistribution& dist,
                                                                 const CriterionConfig& cfg);

// [phi(sum u_i t_i) - sum u_i phi(t_i)] - [phi(h + sum u_i t_i) - sum u_i phi(t_i + h)].
// Zero for h = 0 exactly. Throws DomainError when cfg leaves the domain.
[[nodiscard]] double defect(const SpectralDistribution& dist, const CriterionConfig& cfg);

// <grad phi((1-delta) t1 + delta t2) - (1-delta) grad phi(t1) - delta grad phi(t2), h_dir>
[[nodiscard]] double gradient_affinity_defect(const SpectralDistribution& dist, const Vector& t1,
                                              const Vector& t2, double delta, const Vector& h_dir);

enum class Verdict { stationary_consistent, violated };

[[nodiscard]] std::string_view verdict_name(Verdict v) noexcept;

struct DefectReport {
  std::string distribution;
  std::vector<double> defects;  // random configs first, then the coarse grid
  std::size_t random_configs = 0;
  std::size_t grid_configs = 0;
  double max_abs_defect = 0.0;
  std::size_t argmax = 0;       // lowest index among ties
  std::optional<CriterionConfig> argmax_config;
  Verdict verdict = Verdict::stationary_consistent;  // violated iff max > kTolDefect
};

// Coarse grid: 5 equispaced values per coordinate of t_i and h over the box,
// u_i in {0, 1/4, ..., 1} summing to one. Enumerated only when it has at
// most this many candidate configs.
inline constexpr std::size_t kMaxCoarseGrid = 100'000;

// Box used when none is given: [-1, 1] per axis, upper end pulled in to
// half the CGF domain bound where that is smaller.
[[nodiscard]] Box default_search_box(const SpectralDistribution& dist);

// Evaluates the defect on `budget` random feasible configs (t_i and h
// uniform in the box, u uniform on the simplex) plus the coarse grid.
// Configs leaving the CGF domain are skipped. Throws DomainError if the box
// is not inside the domain or no feasible config is found.
[[nodiscard]] DefectReport search_violation(const SpectralDistribution& dist, std::size_t n,
                                            std::size_t budget, const Box& box, Rng& rng,
                                            unsigned threads = 0);

struct QuadraticFit {
  Vector mu;
  Matrix sigma;
  double max_residual = 0.0;
};

// Least-squares fit of phi by <mu,t> + <t, sigma t>/2 over the points.
// Throws std::invalid_argument for too few points or a rank-deficient
// design, DomainError for points outside the domain.
[[nodiscard]] QuadraticFit quadratic_fit_check(const SpectralDistribution& dist,
                                               const std::vector<Vector>& points);

struct VerifyOptions {
  std::size_t n_points = kDefaultPoints;
  std::size_t budget = 1000;
  // Shift comparison (t1, t2) vs (t1 + h, t2 + h); defaults from the grid.
  std::optional<Vector> t1;
  std::optional<Vector> t2;
  std::optional<Vector> h;
  double alpha = 0.01;
  double shift_tolerance = 0.02;
  unsigned threads = 0;
};

struct MarginalCheck {
  Vector t;
  double ks = 0.0;
  double critical = 0.0;
  bool pass = false;
};

struct CharacterizationReport {
  std::string distribution;
  std::size_t replicates = 0;
  std::size_t n_points = 0;
  std::uint64_t seed = 0;
  std::vector<MarginalCheck> marginals;
  bool marginals_pass = false;
  TruncationDiagnostic truncation;
  DefectReport defect;
  Vector t1;
  Vector t2;
  Vector h;
  double shift_distance = 0.0;
  bool shift_pass = false;
  // "Gaussian-consistent", "non-stationary in dimension 2" or "inconclusive"
  // (some marginal fails).
  std::string verdict;
};

// Simulates `replicates` fields with kappa = cgf-of(dist), replicate r
// seeded with Rng(rng.seed(), r); the defect search uses rng.fork().
// Default pair for a grid sorted along the first axis: the first two grid
// points, shifted by their difference.
[[nodiscard]] CharacterizationReport verify_characterization(const SpectralDistribution& dist,
                                                             const Grid& grid,
                                                             std::size_t replicates, Rng& rng,
                                                             const VerifyOptions& options = {});

[[nodiscard]] nlohmann::json to_json(const CriterionConfig& cfg);
[[nodiscard]] nlohmann::json to_json(const DefectReport& report, bool include_values = false);
[[nodiscard]] nlohmann::json to_json(const QuadraticFit& fit);
[[nodiscard]] nlohmann::json to_json(const CharacterizationReport& report);

}  // namespace maxstable
