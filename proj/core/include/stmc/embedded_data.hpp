#pragma once

#include <string_view>

// Data tables compiled into the library from core/data/.
namespace stmc::data {
extern const std::string_view language_profiles_json;
extern const std::string_view lancaster_rules_txt;
extern const std::string_view stopwords_txt;
}  // namespace stmc::data
