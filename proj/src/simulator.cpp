#include "maxstable/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "maxstable/errors.hpp"
#include "maxstable/parallel.hpp"
#include "spec_text.hpp"

namespace maxstable {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxStorms = 50'000'000;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Row-major copy of the grid for the inner loops.
std::vector<double> flatten(const Grid& grid) {
  std::vector<double> out(grid.size() * grid.dimension());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.dimension(); ++j) {
      out[i * grid.dimension() + j] = grid[i][static_cast<Eigen::Index>(j)];
    }
  }
  return out;
}

// Per grid point: best log U_i + s_i(t) so far, and the term that attains it.
struct RunningMax {
  explicit RunningMax(std::size_t m) : best_log(m, kNegInf), best_spectral(m, 0.0), best_index(m, 0) {}

  std::vector<double> best_log;
  std::vector<double> best_spectral;
  std::vector<std::size_t> best_index;
};

std::vector<double> realize(const RunningMax& rm, const FrechetCascade& cascade) {
  std::vector<double> values(rm.best_log.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    double v = cascade.points[rm.best_index[j]] * std::exp(rm.best_spectral[j]);
    if (!(std::isfinite(v) && v > 0.0)) v = std::exp(rm.best_log[j]);
    if (!(std::isfinite(v) && v > 0.0)) {
      throw NumericError("field value at grid point " + std::to_string(j) +
                         " is outside the representable range (log value " +
                         format_double(rm.best_log[j]) + ")");
    }
    values[j] = v;
  }
  return values;
}

struct CascadeRun {
  std::vector<double> values;
  TruncationDiagnostic truncation;
};

// Max-reduces log U_i + s_i(t_j) over the first n_points cascade points,
// then continues to 2 * n_points to measure the truncation effect.
// fill(s) writes the log spectral function of the next point into s.
template <class Fill>
CascadeRun run_cascade(const FrechetCascade& cascade, std::size_t n_points, std::size_t m,
                       Fill&& fill) {
  if (n_points == 0) throw std::invalid_argument("n_points must be >= 1");
  if (cascade.size() < 2 * n_points) {
    throw std::invalid_argument("cascade must hold at least 2 * n_points points");
  }
  RunningMax rm(m);
  std::vector<double> s(m);
  CascadeRun out;
  std::vector<std::size_t> index_at_n;
  for (std::size_t i = 0; i < 2 * n_points; ++i) {
    fill(s);
    const double log_u = cascade.log_point(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double v = log_u + s[j];
      if (std::isnan(v)) throw NumericError("spectral function is not a number");
      if (v > rm.best_log[j]) {
        rm.best_log[j] = v;
        rm.best_spectral[j] = s[j];
        rm.best_index[j] = i;
      }
    }
    if (i + 1 == n_points) {
      out.values = realize(rm, cascade);
      index_at_n = rm.best_index;
    }
  }
  const std::vector<double> doubled = realize(rm, cascade);
  out.truncation.pairs = m;
  for (std::size_t j = 0; j < m; ++j) {
    if (rm.best_index[j] != index_at_n[j]) {
      ++out.truncation.changed;
      out.truncation.max_relative_change =
          std::max(out.truncation.max_relative_change,
                   std::abs(doubled[j] - out.values[j]) / out.values[j]);
    }
  }
  return out;
}

std::string matrix_text(const Matrix& m) { return detail::format_row_major(m); }

void require_grid_dimension(const Grid& grid, std::size_t d, std::string_view what) {
  if (grid.dimension() != d) {
    throw std::invalid_argument(std::string(what) + ": dimension " + std::to_string(d) +
                                " does not match grid dimension " +
                                std::to_string(grid.dimension()));
  }
}

}  // namespace

// ----------------------------------------------------------------------------

Variogram Variogram::fractional(double scale, double alpha) {
  if (!(std::isfinite(scale) && scale > 0.0)) {
    throw std::invalid_argument("variogram scale: must be finite and > 0");
  }
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw std::invalid_argument("variogram alpha: must lie in (0, 2]");
  }
  return Variogram(FractionalVariogram{scale, alpha});
}

Variogram Variogram::quadratic(Matrix sigma) {
  (void)psd_factor(sigma, "variogram sigma");
  return Variogram(QuadraticVariogram{require_symmetric(sigma, "variogram sigma")});
}

double Variogram::operator()(const Vector& h) const {
  return std::visit(overloaded{[&](const FractionalVariogram& f) {
                                 return std::pow(h.norm() / f.scale, f.alpha);
                               },
                               [&](const QuadraticVariogram& q) {
                                 if (h.size() != q.sigma.rows()) {
                                   throw std::invalid_argument("variogram: dimension mismatch");
                                 }
                                 return h.dot(q.sigma * h);
                               }},
                    kind_);
}

Variogram parse_variogram(std::string_view text) {
  detail::KeyValueSpec spec = detail::parse_key_value_spec(text, "variogram");
  auto take = [&](std::string_view key) -> std::optional<std::string> {
    auto it = spec.fields.find(key);
    if (it == spec.fields.end()) return std::nullopt;
    std::string v = it->second;
    spec.fields.erase(it);
    return v;
  };
  auto finish = [&] {
    if (!spec.fields.empty()) {
      throw std::invalid_argument("variogram: unknown field '" + spec.fields.begin()->first + "'");
    }
  };
  if (spec.head == "fractional") {
    const double scale = parse_double(take("scale").value_or("1"), "variogram scale");
    const auto alpha_text = take("alpha");
    if (!alpha_text) throw std::invalid_argument("variogram: missing required field 'alpha'");
    const double alpha = parse_double(*alpha_text, "variogram alpha");
    finish();
    return Variogram::fractional(scale, alpha);
  }
  if (spec.head == "quadratic") {
    const auto sigma_text = take("sigma");
    if (!sigma_text) throw std::invalid_argument("variogram: missing required field 'sigma'");
    const Matrix sigma =
        detail::square_matrix(parse_double_list(*sigma_text, "variogram sigma"), "variogram sigma");
    finish();
    return Variogram::quadratic(sigma);
  }
  throw std::invalid_argument("variogram: unknown kind '" + spec.head +
                              "' (expected fractional or quadratic)");
}

std::string to_spec_string(const Variogram& v) {
  return std::visit(overloaded{[](const FractionalVariogram& f) {
                                 return "fractional:scale=" + format_double(f.scale) +
                                        ";alpha=" + format_double(f.alpha);
                               },
                               [](const QuadraticVariogram& q) {
                                 return "quadratic:sigma=" + matrix_text(q.sigma);
                               }},
                    v.kind());
}

// ----------------------------------------------------------------------------

std::string_view construction_name(const Construction& c) noexcept {
  switch (c.index()) {
    case 0: return "general";
    case 1: return "smith";
    case 2: return "brown-resnick";
    default: return "moving-maxima";
  }
}

std::string construction_parameters(const Construction& c) {
  return std::visit(
      overloaded{[](const GeneralConstruction& g) {
                   return "dist=" + to_spec_string(g.dist) + " kappa=" + to_spec_string(g.kappa);
                 },
                 [](const SmithConstruction& s) { return "sigma=" + matrix_text(s.sigma); },
                 [](const BrownResnickConstruction& b) {
                   return "variogram=" + to_spec_string(b.variogram);
                 },
                 [](const MovingMaximaConstruction& m) {
                   std::string out = "sigma=" + matrix_text(m.sigma);
                   if (m.window_core) {
                     Vector lo = m.window_core->lower();
                     Vector hi = m.window_core->upper();
                     out += " window=";
                     for (Eigen::Index j = 0; j < lo.size(); ++j) {
                       if (j) out += ',';
                       out += format_double(lo[j]) + ',' + format_double(hi[j]);
                     }
                   }
                   return out;
                 }},
      c);
}

TruncationDiagnostic& TruncationDiagnostic::operator+=(const TruncationDiagnostic& other) {
  pairs += other.pairs;
  changed += other.changed;
  max_relative_change = std::max(max_relative_change, other.max_relative_change);
  return *this;
}

// ----------------------------------------------------------------------------

Field simulate_general(const SpectralDistribution& dist, const ShapeFunction& kappa,
                       const Grid& grid, std::size_t n_points, Rng& rng) {
  if (n_points == 0) throw std::invalid_argument("n_points must be >= 1");
  Rng cascade_rng = rng.fork();
  Rng spectral_rng = rng.fork();
  FrechetCascade cascade = frechet_cascade(2 * n_points, cascade_rng);
  return simulate_general(dist, kappa, grid, cascade, n_points, spectral_rng);
}

Field simulate_general(const SpectralDistribution& dist, const ShapeFunction& kappa,
                       const Grid& grid, const FrechetCascade& cascade, std::size_t n_points,
                       Rng& spectral_rng) {
  require_grid_dimension(grid, dist.dimension(), "spectral law");
  require_grid_dimension(grid, kappa.dimension(), "kappa");
  require_grid_in_domain(dist, grid);

  const std::size_t m = grid.size();
  const std::size_t d = grid.dimension();
  std::vector<double> kappa_values(m);
  for (std::size_t j = 0; j < m; ++j) {
    kappa_values[j] = kappa(grid[j]);
    if (!std::isfinite(kappa_values[j])) {
      throw NumericError("kappa is not finite at grid point " + std::to_string(j));
    }
  }
  const std::vector<double> locations = flatten(grid);
  const SpectralSampler sampler(dist);
  std::vector<double> x(d);

  CascadeRun run = run_cascade(cascade, n_points, m, [&](std::vector<double>& s) {
    sampler.draw(spectral_rng, x);
    for (std::size_t j = 0; j < m; ++j) {
      const double* t = &locations[j * d];
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += x[k] * t[k];
      s[j] = dot - kappa_values[j];
    }
  });

  Field field{grid, std::move(run.values), {}};
  field.provenance.construction = "general";
  field.provenance.parameters = "dist=" + to_spec_string(dist) + " kappa=" + to_spec_string(kappa);
  field.provenance.n_points = n_points;
  field.provenance.seed = {spectral_rng.seed(), spectral_rng.replicate()};
  field.provenance.truncation = run.truncation;
  return field;
}

Field simulate_smith(const Matrix& sigma, const Grid& grid, std::size_t n_points, Rng& rng) {
  const auto d = sigma.rows();
  const SpectralDistribution dist = SpectralDistribution::gaussian(Vector::Zero(d), sigma);
  const ShapeFunction kappa = ShapeFunction::quadratic(Vector::Zero(d), sigma, 0.0);
  Field field = simulate_general(dist, kappa, grid, n_points, rng);
  field.provenance.construction = "smith";
  field.provenance.parameters = "sigma=" + matrix_text(sigma);
  return field;
}

Field simulate_brown_resnick(const Variogram& v, const Grid& grid, std::size_t n_points,
                             Rng& rng) {
  if (n_points == 0) throw std::invalid_argument("n_points must be >= 1");
  const std::size_t m = grid.size();
  // Z(0) = 0 is pinned by appending the origin as the last location.
  std::vector<Vector> locations = grid.locations();
  locations.push_back(Vector::Zero(static_cast<Eigen::Index>(grid.dimension())));
  const auto total = static_cast<Eigen::Index>(locations.size());
  Matrix cov(total, total);
  std::vector<double> gamma_at(locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) gamma_at[i] = v(locations[i]);
  for (Eigen::Index a = 0; a < total; ++a) {
    for (Eigen::Index b = a; b < total; ++b) {
      const auto ua = static_cast<std::size_t>(a);
      const auto ub = static_cast<std::size_t>(b);
      const double c = 0.5 * (gamma_at[ua] + gamma_at[ub] - v(locations[ua] - locations[ub]));
      cov(a, b) = c;
      cov(b, a) = c;
    }
  }
  PsdFactor factor;
  try {
    factor = psd_factor(cov, "variogram covariance");
  } catch (const NumericError& e) {
    throw NumericError(std::string("invalid variogram on this grid: ") + e.what());
  }
  // drop the appended origin row
  const Matrix rows = factor.factor.topRows(static_cast<Eigen::Index>(m));

  Rng cascade_rng = rng.fork();
  Rng spectral_rng = rng.fork();
  const FrechetCascade cascade = frechet_cascade(2 * n_points, cascade_rng);
  std::vector<double> z(static_cast<std::size_t>(total));
  CascadeRun run = run_cascade(cascade, n_points, m, [&](std::vector<double>& s) {
    for (double& zk : z) zk = spectral_rng.normal();
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < total; ++k) {
        acc += rows(static_cast<Eigen::Index>(j), k) * z[static_cast<std::size_t>(k)];
      }
      s[j] = acc - 0.5 * gamma_at[j];
    }
  });

  Field field{grid, std::move(run.values), {}};
  field.provenance.construction = "brown-resnick";
  field.provenance.parameters = "variogram=" + to_spec_string(v);
  field.provenance.n_points = n_points;
  field.provenance.seed = {rng.seed(), rng.replicate()};
  field.provenance.truncation = run.truncation;
  return field;
}

// ----------------------------------------------------------------------------

namespace {

struct StormKernel {
  Matrix sigma;
  double log_prefactor = 0.0;  // log c
  double prefactor = 0.0;      // c = det^{1/2} / (2 pi)^{d/2}
  double min_eigenvalue = 0.0;
};

StormKernel storm_kernel(const Matrix& sigma) {
  const PsdFactor f = psd_factor(sigma, "sigma");
  if (!(f.min_eigenvalue > 1e-12 * std::max(f.max_eigenvalue, 0.0)) ||
      !(f.min_eigenvalue > 0.0)) {
    throw NumericError("sigma: moving maxima needs a nonsingular covariance (smallest eigenvalue " +
                       format_double(f.min_eigenvalue) + ")");
  }
  StormKernel k;
  k.sigma = require_symmetric(sigma, "sigma");
  const double d = static_cast<double>(sigma.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(k.sigma, Eigen::EigenvaluesOnly);
  const double log_det = eig.eigenvalues().array().log().sum();
  k.log_prefactor = 0.5 * log_det - 0.5 * d * std::log(2.0 * std::numbers::pi);
  k.prefactor = std::sqrt(k.sigma.determinant()) / std::pow(2.0 * std::numbers::pi, 0.5 * d);
  k.min_eigenvalue = f.min_eigenvalue;
  return k;
}

double half_quadratic(const Matrix& sigma, const Vector& t, const Vector& centre) {
  const Vector diff = t - centre;
  return 0.5 * diff.dot(sigma * diff);
}

MovingMaximaBuffer buffer_for(const StormKernel& kernel, const Box& core) {
  constexpr double kEdgeTarget = 1e-8;
  constexpr double kStrongestStormFactor = 1e3;
  double r = 0.0;
  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    const double volume = core.expanded(r).volume();
    const double ratio = kernel.prefactor * volume * kStrongestStormFactor / kEdgeTarget;
    const double next = ratio > 1.0 ? std::sqrt(2.0 * std::log(ratio) / kernel.min_eigenvalue) : 0.0;
    if (!std::isfinite(next)) break;
    if (std::abs(next - r) <= 1e-12 * (1.0 + r)) {
      r = next;
      converged = true;
      break;
    }
    r = next;
  }
  if (!converged) {
    throw NumericError("moving maxima: buffer radius for edge error 1e-8 is unachievable");
  }
  r *= 1.0 + 1e-9;
  MovingMaximaBuffer out{r, 0.0, core.expanded(r)};
  out.edge_error_bound = kernel.prefactor * std::exp(-0.5 * kernel.min_eigenvalue * r * r) *
                         out.window.volume() * kStrongestStormFactor;
  if (!(out.edge_error_bound <= kEdgeTarget)) {
    throw NumericError("moving maxima: buffer radius for edge error 1e-8 is unachievable");
  }
  return out;
}

}  // namespace

MovingMaximaBuffer moving_maxima_buffer(const Matrix& sigma, const Box& core) {
  if (static_cast<std::size_t>(sigma.rows()) != core.dimension()) {
    throw std::invalid_argument("moving maxima: window and sigma differ in dimension");
  }
  return buffer_for(storm_kernel(sigma), core);
}

Field simulate_moving_maxima(const Matrix& sigma, const Grid& grid,
                             const std::optional<Box>& window_core, Rng& rng) {
  const StormKernel kernel = storm_kernel(sigma);
  require_grid_dimension(grid, static_cast<std::size_t>(sigma.rows()), "sigma");
  const Box core = window_core ? *window_core : grid.bounding_box();
  if (core.dimension() != grid.dimension()) {
    throw std::invalid_argument("moving maxima: window and grid differ in dimension");
  }
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (!core.contains(grid[j])) {
      throw std::invalid_argument("moving maxima: grid point " + std::to_string(j) +
                                  " lies outside the core window");
    }
  }
  const MovingMaximaBuffer buffer = buffer_for(kernel, core);
  StormGenerator generator(buffer.window, rng);

  const std::size_t m = grid.size();
  std::vector<double> best_log(m, kNegInf);
  std::vector<double> best_strength(m, 0.0);
  std::vector<double> best_quadratic(m, 0.0);
  double min_log = kNegInf;
  std::size_t used = 0;
  for (;;) {
    const Storm storm = generator.next();
    const double log_v = std::log(storm.strength);
    // every later storm has c V_i below the current minimum
    if (kernel.log_prefactor + log_v < min_log) break;
    if (++used > kMaxStorms) {
      throw NumericError("moving maxima: storm budget exhausted before the stopping rule fired");
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double q = half_quadratic(kernel.sigma, grid[j], storm.center);
      const double v = kernel.log_prefactor + log_v - q;
      if (v > best_log[j]) {
        best_log[j] = v;
        best_strength[j] = storm.strength;
        best_quadratic[j] = q;
      }
    }
    min_log = *std::min_element(best_log.begin(), best_log.end());
  }

  std::vector<double> values(m);
  for (std::size_t j = 0; j < m; ++j) {
    values[j] = kernel.prefactor * best_strength[j] * std::exp(-best_quadratic[j]);
    if (!(std::isfinite(values[j]) && values[j] > 0.0)) values[j] = std::exp(best_log[j]);
    if (!(std::isfinite(values[j]) && values[j] > 0.0)) {
      throw NumericError("moving maxima: field value underflow at grid point " + std::to_string(j));
    }
  }
  Field field{grid, std::move(values), {}};
  field.provenance.construction = "moving-maxima";
  field.provenance.parameters = construction_parameters(MovingMaximaConstruction{sigma, core});
  field.provenance.n_points = used;
  field.provenance.seed = {rng.seed(), rng.replicate()};
  field.provenance.truncation.pairs = m;  // exact on the grid: nothing to double
  field.provenance.buffer_radius = buffer.radius;
  field.provenance.edge_error_bound = buffer.edge_error_bound;
  return field;
}

Field moving_maxima_from_storms(const Matrix& sigma, const Grid& grid, const StormSet& storms) {
  const StormKernel kernel = storm_kernel(sigma);
  require_grid_dimension(grid, static_cast<std::size_t>(sigma.rows()), "sigma");
  if (storms.storms.empty()) throw std::invalid_argument("moving maxima: empty storm set");
  std::vector<double> values(grid.size(), 0.0);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    for (const Storm& s : storms.storms) {
      const double v =
          kernel.prefactor * s.strength * std::exp(-half_quadratic(kernel.sigma, grid[j], s.center));
      values[j] = std::max(values[j], v);
    }
  }
  Field field{grid, std::move(values), {}};
  field.provenance.construction = "moving-maxima";
  field.provenance.parameters = "sigma=" + matrix_text(sigma);
  field.provenance.n_points = storms.size();
  field.provenance.seed = storms.seed;
  field.provenance.truncation.pairs = grid.size();
  return field;
}

// ----------------------------------------------------------------------------

Field simulate(const Construction& c, const Grid& grid, std::size_t n_points, Rng& rng) {
  return std::visit(
      overloaded{[&](const GeneralConstruction& g) {
                   return simulate_general(g.dist, g.kappa, grid, n_points, rng);
                 },
                 [&](const SmithConstruction& s) {
                   return simulate_smith(s.sigma, grid, n_points, rng);
                 },
                 [&](const BrownResnickConstruction& b) {
                   return simulate_brown_resnick(b.variogram, grid, n_points, rng);
                 },
                 [&](const MovingMaximaConstruction& m) {
                   return simulate_moving_maxima(m.sigma, grid, m.window_core, rng);
                 }},
      c);
}

ReplicateSet simulate_replicates(const Construction& c, const Grid& grid, std::size_t n_points,
                                 std::uint64_t seed, std::size_t replicates, unsigned threads) {
  if (replicates == 0) throw std::invalid_argument("replicates must be >= 1");
  ReplicateSet out{grid,
                   Matrix(static_cast<Eigen::Index>(replicates),
                          static_cast<Eigen::Index>(grid.size())),
                   {},
                   std::string(construction_name(c)),
                   seed};
  std::vector<TruncationDiagnostic> diagnostics(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    Rng rng(seed, r);
    const Field f = simulate(c, grid, n_points, rng);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = f.values[j];
    }
    diagnostics[r] = f.provenance.truncation;
  });
  for (const auto& d : diagnostics) out.truncation += d;
  return out;
}

TruncationDiagnostic truncation_check(const Construction& c, const Grid& grid,
                                      std::size_t n_points, Rng& rng, std::size_t replicates,
                                      unsigned threads) {
  return simulate_replicates(c, grid, n_points, rng.seed(), replicates, threads).truncation;
}

void write_field_csv(std::ostream& out, const Field& field, std::string_view extra_header,
                     const std::vector<std::string>& comment_lines) {
  const Provenance& p = field.provenance;
  out << "# construction=" << p.construction << " seed=" << p.seed.seed
      << " n_points=" << p.n_points << " converged=" << (p.truncation.converged() ? "true" : "false")
      << " replicate=" << p.seed.replicate;
  if (!extra_header.empty()) out << ' ' << extra_header;
  out << '\n';
  for (const std::string& line : comment_lines) out << "# " << line << '\n';
  char buf[40];
  for (std::size_t i = 0; i < field.grid.size(); ++i) {
    const Vector& t = field.grid[i];
    for (Eigen::Index j = 0; j < t.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", t[j]);
      out << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", field.values[i]);
    out << buf << '\n';
  }
}

}  // namespace maxstable
