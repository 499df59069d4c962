#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace recipemem {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split_words(std::string_view text);
bool contains_ci(std::string_view haystack, std::string_view needle);

// 64-bit FNV-1a; stable across platforms, used for ids and cache keys.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);
std::string stable_hash(std::string_view data);

// Lowercase ASCII alphanumerics separated by '-', e.g. "Fish and Chips" -> "fish-and-chips".
std::string slugify(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace recipemem
