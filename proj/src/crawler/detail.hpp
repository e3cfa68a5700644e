#pragma once

#include <optional>
#include <string_view>

#include "stereocrawl/crawler.hpp"

namespace stereocrawl::detail {

std::optional<ParsedCompletion> split_expansion(std::string_view text, ExpansionMode mode,
                                                std::string_view query_predicate);

}  // namespace stereocrawl::detail
