#pragma once

// Private helpers for the `head:key=value;key=value` text format shared by
// distribution, shape-function and variogram specs.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "maxstable/linalg.hpp"

namespace maxstable::detail {

struct KeyValueSpec {
  std::string head;
  std::map<std::string, std::string, std::less<>> fields;
};

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// Throws std::invalid_argument naming `what` on malformed or repeated keys.
KeyValueSpec parse_key_value_spec(std::string_view text, std::string_view what);

// d*d row-major entries -> d x d matrix.
Matrix square_matrix(const std::vector<double>& row_major, std::string_view field);
std::string format_row_major(const Matrix& m);

}  // namespace maxstable::detail
