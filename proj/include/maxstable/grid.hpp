#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "maxstable/linalg.hpp"

namespace maxstable {

class SpectralDistribution;
class Box;

/// Finite set of distinct index points t in R^d.
class Grid {
 public:
  // Throws std::invalid_argument on empty input, mixed dimensions,
  // non-finite coordinates or duplicates (max-norm distance <= 1e-12).
  explicit Grid(std::vector<Vector> locations);

  [[nodiscard]] std::size_t size() const noexcept { return locations_.size(); }
  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] const Vector& operator[](std::size_t i) const { return locations_[i]; }
  [[nodiscard]] const std::vector<Vector>& locations() const noexcept { return locations_; }

  // Index of the location equal to t (max-norm 1e-12), if any.
  [[nodiscard]] std::optional<std::size_t> find(const Vector& t) const;

  // Smallest axis-aligned box containing the grid; degenerate axes are
  // widened by `pad` on each side.
  [[nodiscard]] Box bounding_box(double pad = 0.5) const;

 private:
  std::vector<Vector> locations_;
  std::size_t dimension_ = 0;
};

// Grid text format, for a known dimension d:
//   explicit points: coordinates separated by ',' or ';', grouped by d
//                    ("0,1" is two points when d = 1, one point when d = 2)
//   ranges:          start:step:count per axis, axes separated by ';',
//                    expanded as a Cartesian product (last axis fastest)
[[nodiscard]] Grid parse_grid(std::string_view text, std::size_t dimension);

// Every location inside the CGF domain of `dist` (throws DomainError).
void require_grid_in_domain(const SpectralDistribution& dist, const Grid& grid);

}  // namespace maxstable
