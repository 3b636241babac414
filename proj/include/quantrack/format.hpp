#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace quantrack {

/// Shortest round-trip decimal form, locale independent.
std::string format_double(double value);

/// Parses a complete decimal number; throws FormatError naming `what`.
double parse_double(std::string_view text, std::string_view what, std::size_t line = 0);

std::int64_t parse_int(std::string_view text, std::string_view what, std::size_t line = 0);

/// Strips spaces, tabs and carriage returns from both ends.
std::string_view trim(std::string_view text) noexcept;

std::vector<std::string_view> split(std::string_view text, char separator);

/// Parses "0.2,0.5,0.8" style lists.
std::vector<double> parse_double_list(std::string_view text, std::string_view what);

}  // namespace quantrack
