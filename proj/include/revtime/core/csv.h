#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace revtime {

std::vector<std::string> split_csv_line(const std::string& line);
// Quotes the cell when it contains a comma, quote or newline.
std::string csv_escape(std::string_view cell);
// Shortest round-trip representation.
std::string format_double(double value);
// Strict parse; `line` is only used for the error message.
double parse_double(const std::string& s, std::size_t line);

}  // namespace revtime
