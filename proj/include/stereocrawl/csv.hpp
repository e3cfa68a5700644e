#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stereocrawl::csv {

/// Quotes a field when it holds a comma, quote or line break.
std::string field(std::string_view value);

/// Shortest decimal form that reads back to the same double.
std::string number(double value);

/// RFC 4180 rows. Throws Error(InvalidConfig) on an unterminated quote.
std::vector<std::vector<std::string>> parse(std::string_view text);

/// Reads a double written by number(). Throws Error(InvalidConfig).
double to_double(std::string_view s);

}  // namespace stereocrawl::csv
