#include "maxstable/stationarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/QR>

#include "maxstable/empirical.hpp"
#include "maxstable/errors.hpp"
#include "maxstable/parallel.hpp"

namespace maxstable {
namespace {

constexpr std::size_t kGridSteps = 5;     // values per free scalar
constexpr std::size_t kWeightSteps = 4;   // u_i in multiples of 1/4
constexpr std::size_t kAttemptFactor = 100;

nlohmann::json to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) out.push_back(v[j]);
  return out;
}

// Integer compositions of `total` into `parts` nonnegative parts.
void compositions(std::size_t total, std::size_t parts, std::vector<std::size_t>& current,
                  std::vector<std::vector<std::size_t>>& out) {
  if (current.size() + 1 == parts) {
    current.push_back(total);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (std::size_t k = 0; k <= total; ++k) {
    current.push_back(k);
    compositions(total - k, parts, current, out);
    current.pop_back();
  }
}

double grid_value(const Box& box, std::size_t axis, std::size_t step) {
  const auto j = static_cast<Eigen::Index>(axis);
  const double lo = box.lower()[j];
  const double hi = box.upper()[j];
  return step + 1 == kGridSteps ? hi
                                : lo + (hi - lo) * static_cast<double>(step) /
                                           static_cast<double>(kGridSteps - 1);
}

std::vector<CriterionConfig> coarse_grid(const SpectralDistribution& dist, std::size_t n,
                                         const Box& box) {
  const std::size_t d = box.dimension();
  const std::size_t scalars = n * d + d;
  std::vector<std::vector<std::size_t>> weights;
  std::vector<std::size_t> current;
  compositions(kWeightSteps, n, current, weights);
  double total = static_cast<double>(weights.size());
  for (std::size_t i = 0; i < scalars; ++i) total *= static_cast<double>(kGridSteps);
  std::vector<CriterionConfig> out;
  if (total > static_cast<double>(kMaxCoarseGrid)) return out;

  std::vector<std::size_t> digits(scalars, 0);
  for (;;) {
    std::vector<Vector> ts(n, Vector(static_cast<Eigen::Index>(d)));
    Vector h(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        ts[i][static_cast<Eigen::Index>(j)] = grid_value(box, j, digits[i * d + j]);
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      h[static_cast<Eigen::Index>(j)] = grid_value(box, j, digits[n * d + j]);
    }
    for (const auto& w : weights) {
      std::vector<double> u(n);
      for (std::size_t i = 0; i < n; ++i) {
        u[i] = static_cast<double>(w[i]) / static_cast<double>(kWeightSteps);
      }
      CriterionConfig cfg(ts, SimplexWeights(std::move(u)), h);
      if (!config_domain_violation(dist, cfg)) out.push_back(std::move(cfg));
    }
    std::size_t pos = 0;
    while (pos < scalars && ++digits[pos] == kGridSteps) digits[pos++] = 0;
    if (pos == scalars) break;
  }
  return out;
}

Box clipped_to_domain(const SpectralDistribution& dist, const Grid& grid) {
  const Box raw = grid.bounding_box();
  const Vector bound = domain_upper_bound(dist);
  Vector upper = raw.upper();
  for (Eigen::Index j = 0; j < upper.size(); ++j) {
    if (upper[j] >= bound[j]) {
      double top = raw.lower()[j];
      for (const Vector& t : grid.locations()) top = std::max(top, t[j]);
      upper[j] = top + (bound[j] - top) / 2.0;
    }
  }
  return Box(raw.lower(), upper);
}

}  // namespace

CriterionConfig::CriterionConfig(std::vector<Vector> ts_in, SimplexWeights u_in, Vector h_in)
    : ts(std::move(ts_in)), u(std::move(u_in)), h(std::move(h_in)) {
  if (ts.empty()) throw std::invalid_argument("criterion config: needs at least one t_i");
  if (ts.size() != u.size()) {
    throw std::invalid_argument("criterion config: " + std::to_string(ts.size()) +
                                " points but " + std::to_string(u.size()) + " weights");
  }
  if (h.size() == 0) throw std::invalid_argument("criterion config: empty shift");
  for (const Vector& t : ts) {
    if (t.size() != h.size()) {
      throw std::invalid_argument("criterion config: point and shift dimensions differ");
    }
  }
}

std::optional<std::string> config_domain_violation(const SpectralDistribution& dist,
                                                   const CriterionConfig& cfg) {
  if (cfg.dimension() != dist.dimension()) {
    throw std::invalid_argument("criterion config: dimension does not match the distribution");
  }
  for (std::size_t i = 0; i < cfg.ts.size(); ++i) {
    if (domain_violation(dist, cfg.ts[i])) return "t_" + std::to_string(i + 1);
    if (domain_violation(dist, cfg.ts[i] + cfg.h)) return "t_" + std::to_string(i + 1) + " + h";
  }
  const Vector s = convex_combination(cfg.ts, cfg.u);
  if (domain_violation(dist, s)) return std::string("sum u_i t_i");
  if (domain_violation(dist, s + cfg.h)) return std::string("h + sum u_i t_i");
  return std::nullopt;
}

double defect(const SpectralDistribution& dist, const CriterionConfig& cfg) {
  if (cfg.dimension() != dist.dimension()) {
    throw std::invalid_argument("criterion config: dimension does not match the distribution");
  }
  std::vector<Vector> shifted(cfg.ts.size());
  for (std::size_t i = 0; i < cfg.ts.size(); ++i) {
    require_in_domain(dist, cfg.ts[i], "t_" + std::to_string(i + 1));
    shifted[i] = cfg.ts[i] + cfg.h;
    require_in_domain(dist, shifted[i], "t_" + std::to_string(i + 1) + " + h");
  }
  const Vector s = convex_combination(cfg.ts, cfg.u);
  require_in_domain(dist, s, "sum u_i t_i");
  require_in_domain(dist, Vector(s + cfg.h), "h + sum u_i t_i");
  return cgf_multi(dist, cfg.ts, cfg.u) - cgf_multi(dist, shifted, cfg.u);
}

double gradient_affinity_defect(const SpectralDistribution& dist, const Vector& t1,
                                const Vector& t2, double delta, const Vector& h_dir) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("gradient affinity: delta must lie in [0, 1]");
  }
  if (h_dir.size() != t1.size() || t2.size() != t1.size()) {
    throw std::invalid_argument("gradient affinity: dimension mismatch");
  }
  if (std::abs(h_dir.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("gradient affinity: h_dir must be a unit vector");
  }
  const Vector mid = (1.0 - delta) * t1 + delta * t2;
  const Vector g = cgf_gradient(dist, mid) - (1.0 - delta) * cgf_gradient(dist, t1) -
                   delta * cgf_gradient(dist, t2);
  return g.dot(h_dir);
}

std::string_view verdict_name(Verdict v) noexcept {
  return v == Verdict::violated ? "violated" : "stationary-consistent";
}

Box default_search_box(const SpectralDistribution& dist) {
  const auto d = static_cast<Eigen::Index>(dist.dimension());
  const Vector bound = domain_upper_bound(dist);
  Vector lower = Vector::Constant(d, -1.0);
  Vector upper = Vector::Constant(d, 1.0);
  for (Eigen::Index j = 0; j < d; ++j) upper[j] = std::min(upper[j], bound[j] / 2.0);
  return Box(lower, upper);
}

DefectReport search_violation(const SpectralDistribution& dist, std::size_t n,
                              std::size_t budget, const Box& box, Rng& rng, unsigned threads) {
  if (n == 0) throw std::invalid_argument("search: tuple size n must be >= 1");
  if (budget == 0) throw std::invalid_argument("search: budget must be >= 1");
  if (box.dimension() != dist.dimension()) {
    throw std::invalid_argument("search: box dimension does not match the distribution");
  }
  if (auto j = domain_violation(dist, box.upper())) {
    throw DomainError("search box upper end " + format_double(box.upper()[static_cast<Eigen::Index>(*j)]) +
                          " lies outside the CGF domain (coordinate " + std::to_string(*j) + ")",
                      *j);
  }

  const std::size_t d = dist.dimension();
  std::vector<CriterionConfig> configs;
  configs.reserve(budget);
  const Vector width = box.upper() - box.lower();
  auto uniform_point = [&] {
    Vector t(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < t.size(); ++j) t[j] = box.lower()[j] + width[j] * rng.uniform();
    return t;
  };
  for (std::size_t attempt = 0; attempt < kAttemptFactor * budget && configs.size() < budget;
       ++attempt) {
    std::vector<Vector> ts(n);
    for (auto& t : ts) t = uniform_point();
    Vector h = uniform_point();
    std::vector<double> u(n);
    for (auto& w : u) w = rng.exponential();
    CriterionConfig cfg(std::move(ts), SimplexWeights(std::move(u)), std::move(h));
    if (!config_domain_violation(dist, cfg)) configs.push_back(std::move(cfg));
  }

  DefectReport report;
  report.distribution = to_spec_string(dist);
  report.random_configs = configs.size();
  std::vector<CriterionConfig> grid = coarse_grid(dist, n, box);
  report.grid_configs = grid.size();
  for (auto& cfg : grid) configs.push_back(std::move(cfg));
  if (configs.empty()) throw DomainError("search: no feasible config inside the box", 0);

  report.defects.assign(configs.size(), 0.0);
  parallel_for(configs.size(), threads,
               [&](std::size_t i) { report.defects[i] = defect(dist, configs[i]); });
  for (std::size_t i = 0; i < report.defects.size(); ++i) {
    if (std::abs(report.defects[i]) > report.max_abs_defect) {
      report.max_abs_defect = std::abs(report.defects[i]);
      report.argmax = i;
    }
  }
  report.argmax_config = configs[report.argmax];
  report.verdict =
      report.max_abs_defect > kTolDefect ? Verdict::violated : Verdict::stationary_consistent;
  return report;
}

QuadraticFit quadratic_fit_check(const SpectralDistribution& dist,
                                 const std::vector<Vector>& points) {
  const std::size_t d = dist.dimension();
  const std::size_t needed = (d * d + 3 * d + 2) / 2;
  if (points.size() < needed) {
    throw std::invalid_argument("quadratic fit: need at least " + std::to_string(needed) +
                                " points, got " + std::to_string(points.size()));
  }
  const std::size_t cols = d + d * (d + 1) / 2;
  Matrix design(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(cols));
  Vector target(static_cast<Eigen::Index>(points.size()));
  for (std::size_t r = 0; r < points.size(); ++r) {
    const Vector& t = points[r];
    if (static_cast<std::size_t>(t.size()) != d) {
      throw std::invalid_argument("quadratic fit: point dimension does not match");
    }
    require_in_domain(dist, t, "quadratic fit point " + std::to_string(r));
    const auto row = static_cast<Eigen::Index>(r);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < t.size(); ++j) design(row, c++) = t[j];
    for (Eigen::Index j = 0; j < t.size(); ++j) {
      for (Eigen::Index k = j; k < t.size(); ++k) {
        design(row, c++) = j == k ? 0.5 * t[j] * t[j] : t[j] * t[k];
      }
    }
    target[row] = cgf(dist, t);
  }
  const Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < static_cast<Eigen::Index>(cols)) {
    throw std::invalid_argument("quadratic fit: design is rank-deficient (points not in general position)");
  }
  const Vector coef = qr.solve(target);

  QuadraticFit fit;
  const auto dd = static_cast<Eigen::Index>(d);
  fit.mu = coef.head(dd);
  fit.sigma = Matrix::Zero(dd, dd);
  Eigen::Index c = dd;
  for (Eigen::Index j = 0; j < dd; ++j) {
    for (Eigen::Index k = j; k < dd; ++k) {
      fit.sigma(j, k) = coef[c];
      fit.sigma(k, j) = coef[c];
      ++c;
    }
  }
  fit.max_residual = (design * coef - target).cwiseAbs().maxCoeff();
  return fit;
}

CharacterizationReport verify_characterization(const SpectralDistribution& dist,
                                               const Grid& grid, std::size_t replicates,
                                               Rng& rng, const VerifyOptions& options) {
  if (grid.dimension() != dist.dimension()) {
    throw std::invalid_argument("verify: grid dimension does not match the distribution");
  }
  if (replicates < kMinEmpiricalSamples) {
    throw std::invalid_argument("verify: replicates must be >= " +
                                std::to_string(kMinEmpiricalSamples));
  }
  require_grid_in_domain(dist, grid);

  CharacterizationReport report;
  report.distribution = to_spec_string(dist);
  report.replicates = replicates;
  report.n_points = options.n_points;
  report.seed = rng.seed();

  if (!(options.t1 && options.t2 && options.h) && grid.size() < 2) {
    throw std::invalid_argument("verify: the shift pair needs a grid with at least two points");
  }
  report.t1 = options.t1.value_or(grid[0]);
  report.t2 = options.t2.value_or(grid[1]);
  report.h = options.h.value_or(Vector(grid[1] - grid[0]));
  const std::vector<Vector> pair_points{report.t1, report.t2, Vector(report.t1 + report.h),
                                        Vector(report.t2 + report.h)};
  std::vector<Vector> locations = grid.locations();
  for (const Vector& p : pair_points) {
    if (static_cast<std::size_t>(p.size()) != dist.dimension()) {
      throw std::invalid_argument("verify: shift pair dimension does not match the distribution");
    }
    require_in_domain(dist, p, "verify shift pair");
    if (!Grid(locations).find(p)) locations.push_back(p);
  }
  const Grid sim_grid(std::move(locations));

  const GeneralConstruction construction{dist, ShapeFunction::cgf_of(dist)};
  Rng search_rng = rng.fork();
  const ReplicateSet reps = simulate_replicates(construction, sim_grid, options.n_points,
                                                rng.seed(), replicates, options.threads);
  report.truncation = reps.truncation;

  auto column = [&](std::size_t j) {
    std::vector<double> out(replicates);
    for (std::size_t r = 0; r < replicates; ++r) {
      out[r] = reps.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
    }
    return out;
  };

  report.marginals_pass = true;
  const double critical = ks_critical_value(options.alpha, static_cast<double>(replicates));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    MarginalCheck m;
    m.t = grid[j];
    m.ks = ks_distance(column(j), unit_frechet_cdf);
    m.critical = critical;
    m.pass = m.ks < critical;
    report.marginals_pass = report.marginals_pass && m.pass;
    report.marginals.push_back(std::move(m));
  }

  report.defect = search_violation(dist, 2, options.budget, clipped_to_domain(dist, grid),
                                   search_rng, options.threads);

  std::vector<std::vector<double>> cols;
  for (const Vector& p : pair_points) cols.push_back(column(*sim_grid.find(p)));
  const std::vector<double> thresholds = frechet_threshold_grid();
  report.shift_distance = bivariate_ecdf_distance(cols[0], cols[1], cols[2], cols[3], thresholds);
  report.shift_pass = report.shift_distance < options.shift_tolerance;

  if (!report.marginals_pass) {
    report.verdict = "inconclusive";
  } else if (report.defect.verdict == Verdict::violated) {
    report.verdict = "non-stationary in dimension 2";
  } else {
    report.verdict = "Gaussian-consistent";
  }
  return report;
}

nlohmann::json to_json(const CriterionConfig& cfg) {
  nlohmann::json ts = nlohmann::json::array();
  for (const Vector& t : cfg.ts) ts.push_back(to_json(t));
  nlohmann::json u(std::vector<double>(cfg.u.values().begin(), cfg.u.values().end()));
  return {{"ts", ts}, {"u", u}, {"h", to_json(cfg.h)}};
}

nlohmann::json to_json(const DefectReport& report, bool include_values) {
  nlohmann::json out{{"distribution", report.distribution},
                     {"verdict", verdict_name(report.verdict)},
                     {"max_abs_defect", report.max_abs_defect},
                     {"tol_defect", kTolDefect},
                     {"argmax", report.argmax},
                     {"random_configs", report.random_configs},
                     {"grid_configs", report.grid_configs}};
  if (report.argmax_config) out["argmax_config"] = to_json(*report.argmax_config);
  if (include_values) out["defects"] = report.defects;
  return out;
}

nlohmann::json to_json(const QuadraticFit& fit) {
  nlohmann::json sigma = nlohmann::json::array();
  for (Eigen::Index i = 0; i < fit.sigma.rows(); ++i) sigma.push_back(to_json(Vector(fit.sigma.row(i).transpose())));
  return {{"mu", to_json(fit.mu)}, {"sigma", sigma}, {"max_residual", fit.max_residual}};
}

nlohmann::json to_json(const CharacterizationReport& report) {
  nlohmann::json marginals = nlohmann::json::array();
  for (const MarginalCheck& m : report.marginals) {
    marginals.push_back({{"t", to_json(m.t)}, {"ks", m.ks}, {"critical", m.critical}, {"pass", m.pass}});
  }
  return {{"distribution", report.distribution},
          {"replicates", report.replicates},
          {"n_points", report.n_points},
          {"seed", report.seed},
          {"verdict", report.verdict},
          {"marginals", marginals},
          {"marginals_pass", report.marginals_pass},
          {"truncation",
           {{"pairs", report.truncation.pairs},
            {"changed", report.truncation.changed},
            {"change_fraction", report.truncation.change_fraction()},
            {"max_relative_change", report.truncation.max_relative_change},
            {"converged", report.truncation.converged()}}},
          {"defect", to_json(report.defect)},
          {"shift",
           {{"t1", to_json(report.t1)},
            {"t2", to_json(report.t2)},
            {"h", to_json(report.h)},
            {"distance", report.shift_distance},
            {"pass", report.shift_pass}}}};
}

}  // namespace maxstable
