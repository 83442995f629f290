#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "maxstable/simulator.hpp"

namespace maxstable::cli {

inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;
inline constexpr std::size_t kDefaultExperimentReplicates = 10'000;

enum ExitCode : int { kOk = 0, kViolation = 1, kUsage = 2, kDomain = 3 };

/// Every input of a run. Numeric fields equal to zero mean "use the
/// subcommand default" until resolved.
struct RunConfig {
  std::string subcommand;
  std::string construction;
  std::string dist;
  std::string kappa;
  std::string sigma;
  std::string variogram;
  std::string window;
  std::string grid;
  std::size_t dim = 0;
  std::uint64_t seed = kDefaultSeed;
  std::size_t n_points = 0;
  std::size_t replicates = 0;
  unsigned threads = 0;
  std::string out;
  std::string plot_data;
  std::size_t n = 0;
  std::size_t budget = 0;
  std::string box;
  std::vector<std::string> ts;
  std::vector<std::string> xs;
  std::string method;
  std::size_t mc_n = 0;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Flat "key = value" lines, one per field (ts and xs repeat their key).
// Without io, out, plot_data and threads are omitted: they do not affect
// results.
[[nodiscard]] std::string to_config_text(const RunConfig& cfg, bool include_io = true);

// Inverse of to_config_text. Blank lines and '#' comments are skipped,
// except comment lines of the form "# key = value", which are read so that
// output headers can be fed back.
[[nodiscard]] RunConfig parse_config_text(std::string_view text);

// Raw (key, value) pairs in file order, same comment rules.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> config_entries(std::string_view text);

// 64-bit seed, decimal or 0x-prefixed hex.
[[nodiscard]] std::uint64_t parse_seed(std::string_view text);

// Runs one command line (without the program name). `env_seed` is the value
// of MAXSTABLE_SEED, used only when no seed is given otherwise.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::optional<std::string>& env_seed = std::nullopt);

}  // namespace maxstable::cli
