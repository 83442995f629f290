#include "maxstable/rng.hpp"

#include <cmath>

namespace maxstable {

std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix_seed(mix_seed(master) ^ mix_seed(~index));
}

Rng::Rng(std::uint64_t seed, std::uint64_t replicate)
    : Rng(RawSeed{}, derive_seed(seed, replicate), seed, replicate) {}

Rng::Rng(RawSeed, std::uint64_t engine_seed, std::uint64_t seed,
         std::uint64_t replicate)
    : seed_(seed), replicate_(replicate), engine_(engine_seed) {}

double Rng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::exponential() { return -std::log(uniform()); }

double Rng::normal() { return normal_(engine_); }

double Rng::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

Rng Rng::fork() {
  return Rng(RawSeed{}, mix_seed(engine_()), seed_, replicate_);
}

}  // namespace maxstable
