#pragma once

#include <cstdint>
#include <string>
#include <string_view>

// Small UTF-8 and whitespace helpers shared by the ingest, agent and eval code.
namespace geolog::text {

std::string_view trim(std::string_view s);
std::string trim_copy(std::string_view s);

bool is_valid_utf8(std::string_view s);

// Decodes the code point starting at s[pos] and advances pos. Invalid bytes
// decode as U+FFFD and advance by one.
char32_t next_code_point(std::string_view s, std::size_t& pos);
void append_utf8(std::string& out, char32_t cp);

// Simple case mapping for Latin, Greek and Cyrillic blocks.
char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view s);

// Lowercases and strips Spanish diacritics (á -> a, ñ -> n, ü -> u).
std::string fold_ascii(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);

// Number of code points; used for column alignment.
std::size_t display_width(std::string_view s);

}  // namespace geolog::text
