#include "maxstable/pointproc.hpp"

#include <cmath>
#include <string>

namespace maxstable {

FrechetCascade frechet_cascade(std::size_t n, Rng& rng) {
  FrechetCascade out = frechet_cascade_with(n, [&rng] { return rng.exponential(); });
  out.seed = {rng.seed(), rng.replicate()};
  return out;
}

Box::Box(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() == 0 || lower_.size() != upper_.size()) {
    throw std::invalid_argument("window: bounds must be non-empty and of equal dimension");
  }
  for (Eigen::Index j = 0; j < lower_.size(); ++j) {
    if (!(std::isfinite(lower_[j]) && std::isfinite(upper_[j]) && lower_[j] < upper_[j])) {
      throw std::invalid_argument("window: degenerate extent on axis " + std::to_string(j));
    }
  }
}

double Box::volume() const { return (upper_ - lower_).prod(); }

bool Box::contains(const Vector& t) const {
  if (t.size() != lower_.size()) return false;
  return (t.array() >= lower_.array()).all() && (t.array() <= upper_.array()).all();
}

Box Box::expanded(double r) const {
  return Box(lower_.array() - r, upper_.array() + r);
}

StormGenerator::StormGenerator(Box window, std::function<double()> exponential,
                               std::function<double()> uniform)
    : window_(std::move(window)),
      volume_(window_.volume()),
      exponential_(std::move(exponential)),
      uniform_(std::move(uniform)) {
  if (!(volume_ > 0.0) || !std::isfinite(volume_)) {
    throw std::invalid_argument("window: volume must be finite and positive");
  }
}

StormGenerator::StormGenerator(Box window, Rng& rng)
    : StormGenerator(std::move(window), [&rng] { return rng.exponential(); },
                     [&rng] { return rng.uniform(); }) {}

Storm StormGenerator::next() {
  arrival_ += exponential_();
  Storm s;
  s.strength = volume_ / arrival_;
  s.center.resize(window_.lower().size());
  for (Eigen::Index j = 0; j < s.center.size(); ++j) {
    const double lo = window_.lower()[j];
    const double hi = window_.upper()[j];
    s.center[j] = lo + (hi - lo) * uniform_();
  }
  return s;
}

StormSet storm_set(const Box& window, std::size_t n, StormGenerator& generator) {
  if (n == 0) throw std::invalid_argument("storm_set: n must be >= 1");
  StormSet out{{}, window, {}};
  out.storms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.storms.push_back(generator.next());
  return out;
}

StormSet storm_set(const Box& window, std::size_t n, Rng& rng) {
  StormGenerator generator(window, rng);
  StormSet out = storm_set(window, n, generator);
  out.seed = {rng.seed(), rng.replicate()};
  return out;
}

}  // namespace maxstable
