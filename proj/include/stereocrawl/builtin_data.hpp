#pragma once

#include <string_view>

// Data files compiled into the library (see data/ and src/builtin_data.cpp.in).
namespace stereocrawl::builtin {

std::string_view mock_corpus_json();
std::string_view toy_vectors_text();

}  // namespace stereocrawl::builtin
