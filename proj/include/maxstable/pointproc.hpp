#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "maxstable/linalg.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

struct SeedRecord {
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
};

// ============================================================================
// Frechet cascade: points of the Poisson process with intensity u^-2 du
// ============================================================================

/// The n largest points U_1 > U_2 > ... > U_n, with U_i = 1 / Gamma_i and
/// Gamma_i the partial sums of standard exponential gaps.
struct FrechetCascade {
  std::vector<double> points;         // U_i
  std::vector<double> arrival_times;  // Gamma_i
  SeedRecord seed;

  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
  // log U_i computed as -log Gamma_i.
  [[nodiscard]] double log_point(std::size_t i) const { return -std::log(arrival_times[i]); }
};

// Builds a cascade from an arbitrary source of exponential gaps (tests pass
// a stub; the simulators pass an Rng).
template <class ExponentialSource>
[[nodiscard]] FrechetCascade frechet_cascade_with(std::size_t n, ExponentialSource&& next_gap) {
  if (n == 0) throw std::invalid_argument("frechet_cascade: n must be >= 1");
  FrechetCascade out;
  out.points.reserve(n);
  out.arrival_times.reserve(n);
  double gamma = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    gamma += next_gap();
    out.arrival_times.push_back(gamma);
    out.points.push_back(1.0 / gamma);
  }
  return out;
}

[[nodiscard]] FrechetCascade frechet_cascade(std::size_t n, Rng& rng);

// ============================================================================
// Storms: Poisson process with intensity dt x v^-2 dv on a window
// ============================================================================

/// Axis-aligned box with positive volume.
class Box {
 public:
  Box(Vector lower, Vector upper);

  [[nodiscard]] const Vector& lower() const noexcept { return lower_; }
  [[nodiscard]] const Vector& upper() const noexcept { return upper_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(lower_.size()); }
  [[nodiscard]] double volume() const;
  [[nodiscard]] bool contains(const Vector& t) const;
  // Box grown by r on every side.
  [[nodiscard]] Box expanded(double r) const;

 private:
  Vector lower_;
  Vector upper_;
};

struct Storm {
  Vector center;    // T_i
  double strength;  // V_i
};

struct StormSet {
  std::vector<Storm> storms;  // strengths strictly decreasing
  Box window;
  SeedRecord seed;

  [[nodiscard]] std::size_t size() const noexcept { return storms.size(); }
};

/// Emits storms in decreasing strength: V_i = |W| / Gamma_i, T_i uniform on
/// W. Each storm consumes one exponential gap, then d uniforms.
class StormGenerator {
 public:
  StormGenerator(Box window, std::function<double()> exponential, std::function<double()> uniform);
  StormGenerator(Box window, Rng& rng);

  [[nodiscard]] Storm next();
  [[nodiscard]] const Box& window() const noexcept { return window_; }

 private:
  Box window_;
  double volume_;
  double arrival_ = 0.0;
  std::function<double()> exponential_;
  std::function<double()> uniform_;
};

[[nodiscard]] StormSet storm_set(const Box& window, std::size_t n, Rng& rng);
[[nodiscard]] StormSet storm_set(const Box& window, std::size_t n, StormGenerator& generator);

}  // namespace maxstable
