#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fzsl/errors.hpp"

namespace fzsl {

// Shortest round-trip decimal form of a float (std::to_chars).
std::string format_float(float v);

// Strict scalar parsers: the whole token must be consumed.
bool parse_float(std::string_view tok, float& out);
bool parse_int(std::string_view tok, int& out);
bool parse_u64(std::string_view tok, uint64_t& out);

std::vector<std::string_view> split(std::string_view line, char sep);

// Reads a whole file; throws ParseError when it cannot be opened.
std::string read_text_file(const std::string& path);

// Writes atomically-ish: to path + ".tmp" then rename.
void write_text_file(const std::string& path, const std::string& body);

}  // namespace fzsl
