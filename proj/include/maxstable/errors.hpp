#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maxstable {

// A query point left the region where the cumulant generating function is
// finite. `coordinate()` names the first offending axis.
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, std::size_t coordinate)
      : std::domain_error(what), coordinate_(coordinate) {}

  [[nodiscard]] std::size_t coordinate() const noexcept { return coordinate_; }

 private:
  std::size_t coordinate_;
};

// Non-PSD / singular matrices, overflow in log space, unachievable buffers.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace maxstable
