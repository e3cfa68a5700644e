#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stereocrawl::text {

std::string_view trim(std::string_view s);

/// ASCII lower-casing; bytes outside ASCII are left alone.
std::string ascii_lower(std::string_view s);

/// Trim, collapse interior whitespace runs to one space, lower-case.
/// Used wherever two surface forms must compare equal "up to case".
std::string normalize_key(std::string_view s);

/// Case-sensitive whole-word search: `word` must not be preceded or followed
/// by an ASCII letter, digit or underscore.
bool contains_word(std::string_view haystack, std::string_view word);

std::vector<std::string> split_lines(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

bool starts_with_icase(std::string_view s, std::string_view prefix);

bool ends_with_icase(std::string_view s, std::string_view suffix);

/// Truncate at the earliest occurrence of any stop sequence. Returns true if
/// a stop sequence was found.
bool cut_at_stop(std::string& s, const std::vector<std::string>& stops);

}  // namespace stereocrawl::text
