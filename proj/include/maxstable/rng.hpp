#pragma once

#include <cstdint>
#include <random>

namespace maxstable {

// splitmix64 finalizer.
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t x) noexcept;

// Sub-seed for stream `index` of a run seeded with `master`. Every
// replicate, Monte Carlo chunk and internal stream is seeded this way, so
// results never depend on scheduling.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master,
                                        std::uint64_t index) noexcept;

/// Seeded generator carrying its (seed, replicate) record for provenance.
///
/// The engine is std::mt19937_64 seeded with derive_seed(seed, replicate).
/// Uniforms use the top 53 bits and never return 0 or 1.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t replicate = 0);

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t replicate() const noexcept { return replicate_; }

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double exponential();
  double normal();
  // Gamma(shape, rate = 1).
  double gamma(double shape);

  // Independent child stream seeded from this stream's next output. The
  // child keeps the parent's (seed, replicate) record.
  [[nodiscard]] Rng fork();

 private:
  struct RawSeed {};
  Rng(RawSeed, std::uint64_t engine_seed, std::uint64_t seed,
      std::uint64_t replicate);

  std::uint64_t seed_;
  std::uint64_t replicate_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace maxstable
