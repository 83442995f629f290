#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "maxstable/empirical.hpp"
#include "maxstable/errors.hpp"
#include "maxstable/fdd.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/stationarity.hpp"

namespace maxstable::cli {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::size_t parse_count(std::string_view text, std::string_view key) {
  text = trim(text);
  std::size_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument(std::string(key) + ": expected a nonnegative integer, got '" +
                                std::string(text) + "'");
  }
  return v;
}

std::string flag_of(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

// --------------------------------------------------------------------------
// Output helpers

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw std::invalid_argument("out: cannot open '" + path + "' for writing");
      stream_ = file_.get();
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

std::vector<std::string> config_lines(const RunConfig& cfg) {
  std::vector<std::string> lines;
  std::istringstream in(to_config_text(cfg, false));
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

json config_json(const RunConfig& cfg) {
  json out = json::object();
  for (const std::string& line : config_lines(cfg)) {
    const std::size_t eq = line.find(" = ");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    if (key == "ts" || key == "xs") {
      out[key].push_back(value);
    } else {
      out[key] = value;
    }
  }
  return out;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) out.push_back(v[j]);
  return out;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// --------------------------------------------------------------------------
// Input parsing

Vector parse_point(std::string_view text, std::size_t d, std::string_view field) {
  const std::vector<double> v = parse_double_list(text, field);
  if (v.size() != d) {
    throw std::invalid_argument(std::string(field) + ": expected " + std::to_string(d) +
                                " coordinates, got " + std::to_string(v.size()));
  }
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(d));
}

// "lo,hi" per axis, axes separated by ';'.
Box parse_box(std::string_view text, std::size_t d, std::string_view field) {
  std::vector<std::string_view> axes;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(';', start);
    axes.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (axes.size() != d) {
    throw std::invalid_argument(std::string(field) + ": expected " + std::to_string(d) +
                                " axes 'lo,hi' separated by ';', got " + std::to_string(axes.size()));
  }
  Vector lo(static_cast<Eigen::Index>(d));
  Vector hi(static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    const Vector axis = parse_point(axes[j], 2, field);
    lo[static_cast<Eigen::Index>(j)] = axis[0];
    hi[static_cast<Eigen::Index>(j)] = axis[1];
  }
  try {
    return Box(lo, hi);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(field) + ": " + e.what());
  }
}

std::string require(const std::string& value, std::string_view key) {
  if (value.empty()) throw std::invalid_argument("--" + std::string(key) + " is required");
  return value;
}

void check_dim(const RunConfig& cfg, std::size_t d) {
  if (cfg.dim != 0 && cfg.dim != d) {
    throw std::invalid_argument("dim: " + std::to_string(cfg.dim) +
                                " does not match the model dimension " + std::to_string(d));
  }
}

std::string canonical_construction(const std::string& name) {
  if (name == "general") return "general";
  if (name == "smith") return "smith";
  if (name == "br" || name == "brown-resnick") return "br";
  if (name == "mmm" || name == "moving-maxima") return "mmm";
  throw std::invalid_argument("construction: unknown '" + name +
                              "' (expected general, smith, br or mmm)");
}

std::pair<Construction, std::size_t> build_construction(const RunConfig& cfg) {
  const std::string kind = canonical_construction(cfg.construction);
  if (kind == "general") {
    SpectralDistribution dist = parse_distribution(require(cfg.dist, "dist"));
    ShapeFunction kappa = parse_shape_function(cfg.kappa, dist);
    const std::size_t d = dist.dimension();
    return {GeneralConstruction{std::move(dist), std::move(kappa)}, d};
  }
  if (kind == "smith" || kind == "mmm") {
    Matrix sigma = parse_square_matrix(require(cfg.sigma, "sigma"), "sigma");
    const auto d = static_cast<std::size_t>(sigma.rows());
    if (kind == "smith") return {SmithConstruction{std::move(sigma)}, d};
    std::optional<Box> window;
    if (!cfg.window.empty()) window = parse_box(cfg.window, d, "window");
    return {MovingMaximaConstruction{std::move(sigma), std::move(window)}, d};
  }
  Variogram v = parse_variogram(require(cfg.variogram, "variogram"));
  std::size_t d = cfg.dim == 0 ? 1 : cfg.dim;
  if (const auto* q = std::get_if<QuadraticVariogram>(&v.kind())) {
    d = static_cast<std::size_t>(q->sigma.rows());
  }
  return {BrownResnickConstruction{std::move(v)}, d};
}

// --------------------------------------------------------------------------
// Subcommands

int cmd_simulate(RunConfig cfg, std::ostream& stdout_stream) {
  if (cfg.construction.empty()) cfg.construction = "general";
  if (cfg.kappa.empty() && canonical_construction(cfg.construction) == "general") cfg.kappa = "cgf";
  if (cfg.n_points == 0) cfg.n_points = kDefaultPoints;
  if (cfg.replicates == 0) cfg.replicates = 1;
  const auto [construction, d] = build_construction(cfg);
  check_dim(cfg, d);
  const Grid grid = parse_grid(require(cfg.grid, "grid"), d);
  if (const auto* g = std::get_if<GeneralConstruction>(&construction); g && g->kappa.is_cgf()) {
    require_grid_in_domain(g->dist, grid);
  }

  std::vector<std::optional<Field>> fields(cfg.replicates);
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
    Rng rng(cfg.seed, r);
    fields[r] = simulate(construction, grid, cfg.n_points, rng);
  });

  const std::vector<std::string> header = config_lines(cfg);
  Output out(cfg.out, stdout_stream);
  for (const auto& f : fields) write_field_csv(out.stream(), *f, {}, header);

  if (!cfg.plot_data.empty()) {
    Output plot(cfg.plot_data, stdout_stream);
    const Field& f = *fields.front();
    plot.stream() << "# plot-data construction=" << f.provenance.construction
                  << " seed=" << f.provenance.seed.seed
                  << " replicate=" << f.provenance.seed.replicate << '\n';
    for (const std::string& line : header) plot.stream() << "# " << line << '\n';
    if (d == 1) {
      plot.stream() << "t,value\n";
    } else {
      for (std::size_t j = 0; j < d; ++j) plot.stream() << "t_" << j + 1 << ',';
      plot.stream() << "value\n";
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (Eigen::Index j = 0; j < grid[i].size(); ++j) plot.stream() << fmt17(grid[i][j]) << ',';
      plot.stream() << fmt17(f.values[i]) << '\n';
    }
  }
  return kOk;
}

int cmd_defect(RunConfig cfg, std::ostream& stdout_stream) {
  if (cfg.n == 0) cfg.n = 2;
  if (cfg.budget == 0) cfg.budget = 1000;
  const SpectralDistribution dist = parse_distribution(require(cfg.dist, "dist"));
  const Box box = cfg.box.empty() ? default_search_box(dist)
                                  : parse_box(cfg.box, dist.dimension(), "box");
  Rng rng(cfg.seed);
  const DefectReport report = search_violation(dist, cfg.n, cfg.budget, box, rng, cfg.threads);
  json j = to_json(report);
  j["box"] = {{"lower", vector_json(box.lower())}, {"upper", vector_json(box.upper())}};
  j["config"] = config_json(cfg);
  Output out(cfg.out, stdout_stream);
  out.stream() << j.dump(2) << '\n';
  return report.verdict == Verdict::violated ? kViolation : kOk;
}

std::string default_verify_grid(std::size_t d) {
  // -0.5 e_1, 0, 0.5 e_1, ..., 0.5 e_d
  std::vector<Vector> pts;
  Vector e = Vector::Zero(static_cast<Eigen::Index>(d));
  e[0] = -0.5;
  pts.push_back(e);
  pts.push_back(Vector::Zero(static_cast<Eigen::Index>(d)));
  for (std::size_t j = 0; j < d; ++j) {
    Vector p = Vector::Zero(static_cast<Eigen::Index>(d));
    p[static_cast<Eigen::Index>(j)] = 0.5;
    pts.push_back(p);
  }
  std::string out;
  for (const Vector& p : pts) {
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      if (!out.empty()) out += ',';
      out += format_double(p[j]);
    }
  }
  return out;
}

int cmd_verify(RunConfig cfg, std::ostream& stdout_stream) {
  if (cfg.replicates == 0) cfg.replicates = kDefaultExperimentReplicates;
  if (cfg.n_points == 0) cfg.n_points = kDefaultPoints;
  if (cfg.budget == 0) cfg.budget = 1000;
  const SpectralDistribution dist = parse_distribution(require(cfg.dist, "dist"));
  if (cfg.grid.empty()) cfg.grid = default_verify_grid(dist.dimension());
  const Grid grid = parse_grid(cfg.grid, dist.dimension());
  VerifyOptions options;
  options.n_points = cfg.n_points;
  options.budget = cfg.budget;
  options.threads = cfg.threads;
  Rng rng(cfg.seed);
  const CharacterizationReport report =
      verify_characterization(dist, grid, cfg.replicates, rng, options);
  json j = to_json(report);
  j["config"] = config_json(cfg);
  Output out(cfg.out, stdout_stream);
  out.stream() << j.dump(2) << '\n';
  return report.verdict == "Gaussian-consistent" ? kOk : kViolation;
}

int cmd_fdd(RunConfig cfg, std::ostream& stdout_stream) {
  if (cfg.kappa.empty()) cfg.kappa = "cgf";
  if (cfg.method.empty()) cfg.method = "mc";
  if (cfg.mc_n == 0) cfg.mc_n = kDefaultMcSamples;
  const SpectralDistribution dist = parse_distribution(require(cfg.dist, "dist"));
  const ShapeFunction kappa = parse_shape_function(cfg.kappa, dist);
  const ExponentMethod method = parse_method(cfg.method);
  if (cfg.ts.empty()) throw std::invalid_argument("--ts is required (one per location)");
  if (cfg.xs.empty()) throw std::invalid_argument("--xs is required (one threshold list per query)");
  std::vector<Vector> ts;
  for (const std::string& t : cfg.ts) ts.push_back(parse_point(t, dist.dimension(), "ts"));

  Output out(cfg.out, stdout_stream);
  out.stream() << json{{"config", config_json(cfg)}}.dump() << '\n';
  for (std::size_t i = 0; i < cfg.xs.size(); ++i) {
    const FddQuery q(ts, parse_double_list(cfg.xs[i], "xs"));
    Rng rng(cfg.seed, i);
    const ExponentValue v = exponent(dist, kappa, q, method, &rng, cfg.mc_n, cfg.threads);
    json line{{"query", i}, {"xs", q.xs}, {"method", method_name(method)}, {"V", v.value},
              {"se", v.standard_error}, {"cdf", std::exp(-v.value)}, {"seed", cfg.seed},
              {"replicate", i}};
    json locations = json::array();
    for (const Vector& t : ts) locations.push_back(vector_json(t));
    line["ts"] = locations;
    out.stream() << line.dump() << '\n';
  }
  return kOk;
}

json truncation_json(const TruncationDiagnostic& t) {
  return {{"pairs", t.pairs},
          {"changed", t.changed},
          {"change_fraction", t.change_fraction()},
          {"max_relative_change", t.max_relative_change},
          {"converged", t.converged()}};
}

int cmd_compare_reps(RunConfig cfg, std::ostream& stdout_stream) {
  if (cfg.sigma.empty()) cfg.sigma = "1";
  if (cfg.replicates == 0) cfg.replicates = kDefaultExperimentReplicates;
  if (cfg.n_points == 0) cfg.n_points = kDefaultPoints;
  const Matrix sigma = parse_square_matrix(cfg.sigma, "sigma");
  const auto d = static_cast<std::size_t>(sigma.rows());
  check_dim(cfg, d);
  const Grid grid = parse_grid(require(cfg.grid, "grid"), d);
  std::optional<Box> window;
  if (!cfg.window.empty()) window = parse_box(cfg.window, d, "window");

  const ReplicateSet smith = simulate_replicates(SmithConstruction{sigma}, grid, cfg.n_points,
                                                 cfg.seed, cfg.replicates, cfg.threads);
  const std::uint64_t mmm_seed = derive_seed(cfg.seed, 1);
  const ReplicateSet mmm = simulate_replicates(MovingMaximaConstruction{sigma, window}, grid,
                                               cfg.n_points, mmm_seed, cfg.replicates, cfg.threads);

  auto column = [&](const ReplicateSet& s, std::size_t j) {
    std::vector<double> out(cfg.replicates);
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
      out[r] = s.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
    }
    return out;
  };
  const std::vector<double> thresholds = frechet_threshold_grid();
  const double tolerance = 0.02;
  json marginals = json::array();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    marginals.push_back({{"t", vector_json(grid[j])},
                         {"ks_two_sample", ks_two_sample(column(smith, j), column(mmm, j))}});
  }
  json pairs = json::array();
  double sup = 0.0;
  for (std::size_t a = 0; a < grid.size(); ++a) {
    for (std::size_t b = a + 1; b < grid.size(); ++b) {
      const double dist = bivariate_ecdf_distance(column(smith, a), column(smith, b),
                                                  column(mmm, a), column(mmm, b), thresholds);
      sup = std::max(sup, dist);
      pairs.push_back({{"i", a}, {"j", b}, {"sup_cdf_difference", dist}});
    }
  }
  if (grid.size() == 1) {
    sup = bivariate_ecdf_distance(column(smith, 0), column(smith, 0), column(mmm, 0),
                                  column(mmm, 0), thresholds);
  }
  const bool pass = sup < tolerance;
  json j{{"smith_seed", cfg.seed},
         {"moving_maxima_seed", mmm_seed},
         {"replicates", cfg.replicates},
         {"marginals", marginals},
         {"pairs", pairs},
         {"sup_cdf_difference", sup},
         {"tolerance", tolerance},
         {"verdict", pass ? "equivalent" : "different"},
         {"truncation", {{"smith", truncation_json(smith.truncation)},
                         {"moving_maxima", truncation_json(mmm.truncation)}}},
         {"config", config_json(cfg)}};
  Output out(cfg.out, stdout_stream);
  out.stream() << j.dump(2) << '\n';
  return pass ? kOk : kViolation;
}

// --------------------------------------------------------------------------
// Command line

struct Parsed {
  RunConfig cfg;
  std::string seed_text;
  std::string config_path;
};

void add_common(CLI::App* sub, Parsed& p) {
  sub->add_option("--seed", p.seed_text, "64-bit seed (decimal or 0x hex); default 0xC0FFEE");
  sub->add_option("--threads", p.cfg.threads, "worker threads (0 = hardware)");
  sub->add_option("--out", p.cfg.out, "output path (default stdout)");
  sub->add_option("--config", p.config_path, "flat key = value file mirroring the flags");
}

void add_model(CLI::App* sub, Parsed& p, bool with_construction) {
  if (with_construction) {
    sub->add_option("--construction", p.cfg.construction, "general | smith | br | mmm");
    sub->add_option("--sigma", p.cfg.sigma, "row-major covariance (smith, mmm)");
    sub->add_option("--variogram", p.cfg.variogram, "fractional:scale=..;alpha=.. | quadratic:sigma=..");
    sub->add_option("--window", p.cfg.window, "storm window core 'lo,hi' per axis, ';'-separated (mmm)");
    sub->add_option("--dim", p.cfg.dim, "index dimension when not implied by the model");
  }
  sub->add_option("--dist", p.cfg.dist, "spectral law, e.g. gaussian:mu=0;sigma=1");
}

std::unique_ptr<CLI::App> make_app(Parsed& p) {
  auto app = std::make_unique<CLI::App>("Max-stable random field toolkit", "maxstable-cli");
  app->require_subcommand(1);

  CLI::App* sim = app->add_subcommand("simulate", "simulate fields on a grid (CSV)");
  add_model(sim, p, true);
  sim->add_option("--kappa", p.cfg.kappa, "cgf | quadratic:mu=..;sigma=..;c0=..");
  sim->add_option("--grid", p.cfg.grid, "explicit points or start:step:count per axis");
  sim->add_option("--n-points", p.cfg.n_points, "cascade length");
  sim->add_option("--replicates", p.cfg.replicates, "number of fields");
  sim->add_option("--plot-data", p.cfg.plot_data, "write t,value pairs of replicate 0 here");
  add_common(sim, p);

  CLI::App* def = app->add_subcommand("defect", "search for violations of the stationarity criterion (JSON)");
  add_model(def, p, false);
  def->add_option("--n", p.cfg.n, "tuple size");
  def->add_option("--budget", p.cfg.budget, "random configs");
  def->add_option("--box", p.cfg.box, "search box 'lo,hi' per axis, ';'-separated");
  add_common(def, p);

  CLI::App* ver = app->add_subcommand("verify", "full characterization experiment (JSON)");
  add_model(ver, p, false);
  ver->add_option("--grid", p.cfg.grid, "grid points");
  ver->add_option("--replicates", p.cfg.replicates, "simulated fields");
  ver->add_option("--n-points", p.cfg.n_points, "cascade length");
  ver->add_option("--budget", p.cfg.budget, "random configs for the defect search");
  add_common(ver, p);

  CLI::App* fdd = app->add_subcommand("fdd", "finite-dimensional distribution values (JSON lines)");
  add_model(fdd, p, false);
  fdd->add_option("--kappa", p.cfg.kappa, "cgf | quadratic:...");
  fdd->add_option("--ts", p.cfg.ts, "one location per flag, coordinates comma-separated");
  fdd->add_option("--xs", p.cfg.xs, "thresholds, comma-separated; repeat for more queries");
  fdd->add_option("--method", p.cfg.method, "mc | closed_marginal | closed_bivariate");
  fdd->add_option("--mc-n", p.cfg.mc_n, "Monte Carlo sample size");
  add_common(fdd, p);

  CLI::App* cmp = app->add_subcommand("compare-reps", "spectral vs moving-maxima Smith fields (JSON)");
  cmp->add_option("--sigma", p.cfg.sigma, "row-major covariance");
  cmp->add_option("--window", p.cfg.window, "storm window core");
  cmp->add_option("--grid", p.cfg.grid, "grid points");
  cmp->add_option("--replicates", p.cfg.replicates, "fields per representation");
  cmp->add_option("--n-points", p.cfg.n_points, "cascade length (spectral form)");
  cmp->add_option("--dim", p.cfg.dim, "index dimension check");
  add_common(cmp, p);
  return app;
}

const std::vector<std::string> kSubcommands{"simulate", "defect", "verify", "fdd", "compare-reps"};

// Appends "--key value" for config-file entries the command line does not
// already set and the subcommand accepts.
std::vector<std::string> merge_config(std::vector<std::string> args,
                                      const std::vector<std::pair<std::string, std::string>>& entries,
                                      const CLI::App& app) {
  auto is_sub = [](const std::string& a) {
    return std::find(kSubcommands.begin(), kSubcommands.end(), a) != kSubcommands.end();
  };
  auto sub_pos = std::find_if(args.begin(), args.end(), is_sub);
  if (sub_pos == args.end()) {
    auto it = std::find_if(entries.begin(), entries.end(),
                           [](const auto& e) { return e.first == "subcommand"; });
    if (it == entries.end() || !is_sub(it->second)) return args;
    args.insert(args.begin(), it->second);
    sub_pos = args.begin();
  }
  const CLI::App* sub = app.get_subcommand(*sub_pos);
  std::vector<std::string> extra;
  for (const auto& [key, value] : entries) {
    if (key == "subcommand" || value.empty()) continue;
    const std::string flag = flag_of(key);
    if (sub->get_option_no_throw(flag) == nullptr) continue;
    if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
    extra.push_back(flag);
    extra.push_back(value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

std::string config_path_of(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") return args[i + 1];
  }
  for (const std::string& a : args) {
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  (void)parse_config_text(buf.str());  // validates keys and values
  return config_entries(buf.str());
}

int dispatch(const RunConfig& cfg, std::ostream& out) {
  if (cfg.subcommand == "simulate") return cmd_simulate(cfg, out);
  if (cfg.subcommand == "defect") return cmd_defect(cfg, out);
  if (cfg.subcommand == "verify") return cmd_verify(cfg, out);
  if (cfg.subcommand == "fdd") return cmd_fdd(cfg, out);
  return cmd_compare_reps(cfg, out);
}

// Ordered field table for the text format.
template <class Fn>
void for_each_scalar(RunConfig& cfg, Fn&& fn) {
  fn("subcommand", cfg.subcommand);
  fn("construction", cfg.construction);
  fn("dist", cfg.dist);
  fn("kappa", cfg.kappa);
  fn("sigma", cfg.sigma);
  fn("variogram", cfg.variogram);
  fn("window", cfg.window);
  fn("grid", cfg.grid);
  fn("dim", cfg.dim);
  fn("seed", cfg.seed);
  fn("n_points", cfg.n_points);
  fn("replicates", cfg.replicates);
  fn("threads", cfg.threads);
  fn("out", cfg.out);
  fn("plot_data", cfg.plot_data);
  fn("n", cfg.n);
  fn("budget", cfg.budget);
  fn("box", cfg.box);
  fn("method", cfg.method);
  fn("mc_n", cfg.mc_n);
}

bool is_io_key(std::string_view key) {
  return key == "out" || key == "plot_data" || key == "threads";
}

}  // namespace

std::uint64_t parse_seed(std::string_view text) {
  text = trim(text);
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    text.remove_prefix(2);
    base = 16;
  }
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v, base);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("seed: expected a 64-bit unsigned integer, got '" +
                                std::string(text) + "'");
  }
  return v;
}

std::string to_config_text(const RunConfig& cfg_in, bool include_io) {
  RunConfig cfg = cfg_in;
  std::string out;
  auto line = [&](std::string_view key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  for_each_scalar(cfg, [&](std::string_view key, auto& value) {
    if (!include_io && is_io_key(key)) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(value)>, std::string>) {
      line(key, value);
    } else {
      line(key, std::to_string(value));
    }
  });
  for (const std::string& t : cfg.ts) line("ts", t);
  for (const std::string& x : cfg.xs) line("xs", x);
  return out;
}

std::vector<std::pair<std::string, std::string>> config_entries(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      line = trim(line.substr(1));
      if (line.find(" = ") == std::string_view::npos) continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    out.emplace_back(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
  }
  return out;
}

RunConfig parse_config_text(std::string_view text) {
  RunConfig cfg;
  for (const auto& [key, value] : config_entries(text)) {
    if (key == "ts") {
      cfg.ts.push_back(value);
      continue;
    }
    if (key == "xs") {
      cfg.xs.push_back(value);
      continue;
    }
    bool known = false;
    for_each_scalar(cfg, [&](std::string_view k, auto& field) {
      if (k != key) return;
      known = true;
      using T = std::decay_t<decltype(field)>;
      if constexpr (std::is_same_v<T, std::string>) {
        field = value;
      } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        field = parse_seed(value);
      } else {
        field = static_cast<T>(parse_count(value, key));
      }
    });
    if (!known) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return cfg;
}

int run_cli(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err,
            const std::optional<std::string>& env_seed) {
  Parsed p;
  std::unique_ptr<CLI::App> app = make_app(p);
  try {
    std::vector<std::string> args = args_in;
    const std::string config_path = config_path_of(args);
    if (!config_path.empty()) args = merge_config(std::move(args), read_config_file(config_path), *app);
    std::reverse(args.begin(), args.end());
    try {
      app->parse(args);
    } catch (const CLI::CallForHelp& e) {
      return app->exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
      return app->exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kUsage;
    }
    p.cfg.subcommand = app->get_subcommands().front()->get_name();
    if (!p.seed_text.empty()) {
      p.cfg.seed = parse_seed(p.seed_text);
    } else if (env_seed && !trim(*env_seed).empty()) {
      p.cfg.seed = parse_seed(*env_seed);
    }
    return dispatch(p.cfg, out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  }
}

}  // namespace maxstable::cli
