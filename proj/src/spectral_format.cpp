#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <system_error>

#include "maxstable/spectral.hpp"
#include "spec_text.hpp"

namespace maxstable {
namespace {

using detail::split;
using detail::trim;
using ParsedSpec = detail::KeyValueSpec;

ParsedSpec split_spec(std::string_view text) { return detail::parse_key_value_spec(text, "dist"); }

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string join(const Vector& v) {
  std::string out;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (j) out += ',';
    out += format_double(v[j]);
  }
  return out;
}

std::string join_row_major(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i || j) out += ',';
      out += format_double(m(i, j));
    }
  }
  return out;
}

Matrix square_from_row_major(const std::vector<double>& v, std::string_view field) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (d == 0 || static_cast<std::size_t>(d * d) != v.size()) {
    throw std::invalid_argument(std::string(field) + ": expected d*d row-major entries, got " +
                                std::to_string(v.size()));
  }
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = v[static_cast<std::size_t>(i * d + j)];
  }
  return m;
}

// Broadcasts a length-1 vector to length d.
Vector broadcast(const std::vector<double>& v, std::size_t d, std::string_view field) {
  if (v.size() == d) return to_vector(v);
  if (v.size() == 1) return Vector::Constant(static_cast<Eigen::Index>(d), v.front());
  throw std::invalid_argument(std::string(field) + ": expected 1 or " + std::to_string(d) +
                              " entries, got " + std::to_string(v.size()));
}

class FieldReader {
 public:
  explicit FieldReader(ParsedSpec spec) : spec_(std::move(spec)) {}

  std::optional<std::vector<double>> list(std::string_view key) {
    auto it = spec_.fields.find(key);
    if (it == spec_.fields.end()) return std::nullopt;
    auto values = parse_double_list(it->second, key);
    spec_.fields.erase(it);
    return values;
  }

  std::vector<double> required(std::string_view key) {
    auto v = list(key);
    if (!v) {
      throw std::invalid_argument(spec_.head + ": missing required field '" + std::string(key) +
                                  "'");
    }
    return *v;
  }

  std::optional<bool> flag(std::string_view key) {
    auto it = spec_.fields.find(key);
    if (it == spec_.fields.end()) return std::nullopt;
    bool value = false;
    if (it->second == "true" || it->second == "1") {
      value = true;
    } else if (it->second != "false" && it->second != "0") {
      throw std::invalid_argument(std::string(key) + ": expected true/false, got '" + it->second +
                                  "'");
    }
    spec_.fields.erase(it);
    return value;
  }

  void finish() const {
    if (!spec_.fields.empty()) {
      throw std::invalid_argument(spec_.head + ": unknown field '" +
                                  spec_.fields.begin()->first + "'");
    }
  }

 private:
  ParsedSpec spec_;
};

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view field) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument(std::string(field) + ": cannot parse number '" +
                                std::string(text) + "'");
  }
  return value;
}

std::vector<double> parse_double_list(std::string_view text, std::string_view field) {
  std::vector<double> out;
  for (std::string_view item : split(text, ',')) out.push_back(parse_double(item, field));
  return out;
}

Matrix parse_square_matrix(std::string_view text, std::string_view field) {
  return square_from_row_major(parse_double_list(text, field), field);
}

SpectralDistribution parse_distribution(std::string_view text) {
  ParsedSpec spec = split_spec(text);
  const std::string family = spec.head;
  FieldReader reader(std::move(spec));

  if (family == "gaussian" || family == "normal") {
    const Matrix sigma = square_from_row_major(reader.required("sigma"), "sigma");
    const auto d = static_cast<std::size_t>(sigma.rows());
    Vector mu = Vector::Zero(sigma.rows());
    if (auto m = reader.list("mu")) mu = broadcast(*m, d, "mu");
    reader.finish();
    return SpectralDistribution::gaussian(std::move(mu), sigma);
  }
  if (family == "exp" || family == "exponential") {
    const Vector lambda = to_vector(reader.required("lambda"));
    const bool centered = reader.flag("centered").value_or(false);
    reader.finish();
    return SpectralDistribution::exponential(lambda, centered);
  }
  if (family == "uniform") {
    auto a = reader.required("a");
    auto b = reader.required("b");
    const std::size_t d = std::max(a.size(), b.size());
    reader.finish();
    return SpectralDistribution::uniform(broadcast(a, d, "a"), broadcast(b, d, "b"));
  }
  if (family == "gamma") {
    auto k = reader.required("k");
    auto theta = reader.required("theta");
    const std::size_t d = std::max(k.size(), theta.size());
    reader.finish();
    return SpectralDistribution::gamma(broadcast(k, d, "k"), broadcast(theta, d, "theta"));
  }
  throw std::invalid_argument("dist: unknown family '" + family +
                              "' (expected gaussian, exp, uniform or gamma)");
}

std::string to_spec_string(const SpectralDistribution& dist) {
  std::string out(family_name(dist.family()));
  out += ':';
  if (const auto* g = std::get_if<GaussianParams>(&dist.params())) {
    out += "mu=" + join(g->mean) + ";sigma=" + join_row_major(g->covariance);
  } else if (const auto* e = std::get_if<ExponentialParams>(&dist.params())) {
    out += "lambda=" + join(e->rates) + ";centered=" + (e->centered ? "true" : "false");
  } else if (const auto* u = std::get_if<UniformParams>(&dist.params())) {
    out += "a=" + join(u->lower) + ";b=" + join(u->upper);
  } else if (const auto* gm = std::get_if<GammaParams>(&dist.params())) {
    out += "k=" + join(gm->shapes) + ";theta=" + join(gm->rates);
  }
  return out;
}

ShapeFunction parse_shape_function(std::string_view text, const SpectralDistribution& dist) {
  text = trim(text);
  if (text.empty() || text == "cgf") return ShapeFunction::cgf_of(dist);
  ParsedSpec spec = split_spec(text);
  if (spec.head != "quadratic") {
    throw std::invalid_argument("kappa: expected 'cgf' or 'quadratic:...', got '" +
                                std::string(text) + "'");
  }
  FieldReader reader(std::move(spec));
  const std::size_t d = dist.dimension();
  Matrix sigma = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  if (auto s = reader.list("sigma")) sigma = square_from_row_major(*s, "kappa sigma");
  Vector mu = Vector::Zero(static_cast<Eigen::Index>(d));
  if (auto m = reader.list("mu")) mu = broadcast(*m, d, "kappa mu");
  double c0 = 0.0;
  if (auto c = reader.list("c0")) {
    if (c->size() != 1) throw std::invalid_argument("kappa c0: expected a scalar");
    c0 = c->front();
  }
  reader.finish();
  if (static_cast<std::size_t>(sigma.rows()) != d) {
    throw std::invalid_argument("kappa sigma: dimension does not match the distribution");
  }
  return ShapeFunction::quadratic(std::move(mu), std::move(sigma), c0);
}

std::string to_spec_string(const ShapeFunction& kappa) {
  if (kappa.is_cgf()) return "cgf";
  const auto& q = std::get<QuadraticShape>(kappa.kind());
  return "quadratic:mu=" + join(q.mu) + ";sigma=" + join_row_major(q.sigma) +
         ";c0=" + format_double(q.c0);
}

namespace detail {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

KeyValueSpec parse_key_value_spec(std::string_view text, std::string_view what) {
  text = trim(text);
  KeyValueSpec out;
  const std::size_t colon = text.find(':');
  out.head = std::string(trim(text.substr(0, colon)));
  if (out.head.empty()) throw std::invalid_argument(std::string(what) + ": missing family name");
  if (colon == std::string_view::npos) return out;
  for (std::string_view item : split(text.substr(colon + 1), ';')) {
    item = trim(item);
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument(std::string(what) + ": field '" + std::string(item) +
                                  "' is not key=value");
    }
    std::string key(trim(item.substr(0, eq)));
    if (!out.fields.emplace(key, std::string(trim(item.substr(eq + 1)))).second) {
      throw std::invalid_argument(std::string(what) + ": field '" + key + "' given twice");
    }
  }
  return out;
}

Matrix square_matrix(const std::vector<double>& row_major, std::string_view field) {
  return square_from_row_major(row_major, field);
}

std::string format_row_major(const Matrix& m) { return join_row_major(m); }

}  // namespace detail
}  // namespace maxstable
