#include "maxstable/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "maxstable/pointproc.hpp"
#include "maxstable/spectral.hpp"

namespace maxstable {
namespace {

constexpr double kDuplicateTolerance = 1e-12;

bool same_point(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff() <= kDuplicateTolerance;
}

}  // namespace

Grid::Grid(std::vector<Vector> locations) : locations_(std::move(locations)) {
  if (locations_.empty()) throw std::invalid_argument("grid: no locations");
  dimension_ = static_cast<std::size_t>(locations_.front().size());
  if (dimension_ == 0) throw std::invalid_argument("grid: zero-dimensional location");
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    if (static_cast<std::size_t>(locations_[i].size()) != dimension_) {
      throw std::invalid_argument("grid: location " + std::to_string(i) + " has dimension " +
                                  std::to_string(locations_[i].size()));
    }
    if (!locations_[i].allFinite()) {
      throw std::invalid_argument("grid: location " + std::to_string(i) + " is not finite");
    }
  }
  // sweep along the first axis; only near neighbours can collide
  std::vector<std::size_t> order(locations_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return locations_[a][0] < locations_[b][0]; });
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const Vector& p = locations_[order[a]];
      const Vector& q = locations_[order[b]];
      if (q[0] - p[0] > kDuplicateTolerance) break;
      if (same_point(p, q)) {
        throw std::invalid_argument("grid: duplicate locations " + std::to_string(order[a]) +
                                    " and " + std::to_string(order[b]));
      }
    }
  }
}

std::optional<std::size_t> Grid::find(const Vector& t) const {
  if (static_cast<std::size_t>(t.size()) != dimension_) return std::nullopt;
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    if (same_point(locations_[i], t)) return i;
  }
  return std::nullopt;
}

Box Grid::bounding_box(double pad) const {
  Vector lo = locations_.front();
  Vector hi = locations_.front();
  for (const Vector& t : locations_) {
    lo = lo.cwiseMin(t);
    hi = hi.cwiseMax(t);
  }
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    if (!(hi[j] > lo[j])) {
      lo[j] -= pad;
      hi[j] += pad;
    }
  }
  return Box(lo, hi);
}

Grid parse_grid(std::string_view text, std::size_t dimension) {
  if (dimension == 0) throw std::invalid_argument("grid: dimension must be >= 1");
  const auto d = static_cast<Eigen::Index>(dimension);
  std::string s(text);
  if (s.find(':') != std::string::npos) {
    std::vector<std::vector<double>> axes;
    std::size_t start = 0;
    for (;;) {
      const std::size_t pos = s.find(';', start);
      const std::string axis = s.substr(start, pos - start);
      const std::size_t c1 = axis.find(':');
      const std::size_t c2 = axis.find(':', c1 == std::string::npos ? c1 : c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos) {
        throw std::invalid_argument("grid: range '" + axis + "' is not start:step:count");
      }
      const double first = parse_double(std::string_view(axis).substr(0, c1), "grid start");
      const double step = parse_double(std::string_view(axis).substr(c1 + 1, c2 - c1 - 1), "grid step");
      const double count_d = parse_double(std::string_view(axis).substr(c2 + 1), "grid count");
      if (!(count_d >= 1.0) || count_d != std::floor(count_d) || count_d > 1e8) {
        throw std::invalid_argument("grid count: must be a positive integer in '" + axis + "'");
      }
      const auto count = static_cast<std::size_t>(count_d);
      std::vector<double> values(count);
      for (std::size_t k = 0; k < count; ++k) values[k] = first + static_cast<double>(k) * step;
      axes.push_back(std::move(values));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (axes.size() != dimension) {
      throw std::invalid_argument("grid: " + std::to_string(axes.size()) +
                                  " range axes given for dimension " + std::to_string(dimension));
    }
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.size();
    std::vector<Vector> points;
    points.reserve(total);
    std::vector<std::size_t> idx(dimension, 0);
    for (std::size_t p = 0; p < total; ++p) {
      Vector t(d);
      for (std::size_t j = 0; j < dimension; ++j) t[static_cast<Eigen::Index>(j)] = axes[j][idx[j]];
      points.push_back(std::move(t));
      for (std::size_t j = dimension; j-- > 0;) {
        if (++idx[j] < axes[j].size()) break;
        idx[j] = 0;
      }
    }
    return Grid(std::move(points));
  }

  std::replace(s.begin(), s.end(), ';', ',');
  const std::vector<double> flat = parse_double_list(s, "grid");
  if (flat.size() % dimension != 0) {
    throw std::invalid_argument("grid: " + std::to_string(flat.size()) +
                                " coordinates do not form points of dimension " +
                                std::to_string(dimension));
  }
  std::vector<Vector> points;
  for (std::size_t i = 0; i < flat.size(); i += dimension) {
    points.push_back(Eigen::Map<const Vector>(flat.data() + i, d));
  }
  return Grid(std::move(points));
}

void require_grid_in_domain(const SpectralDistribution& dist, const Grid& grid) {
  if (grid.dimension() != dist.dimension()) {
    throw std::invalid_argument("grid: dimension " + std::to_string(grid.dimension()) +
                                " does not match the spectral law (" +
                                std::to_string(dist.dimension()) + ")");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require_in_domain(dist, grid[i], "grid location " + std::to_string(i));
  }
}

}  // namespace maxstable
