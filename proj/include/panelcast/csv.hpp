#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace panelcast::csv {

// Splits one CSV record. Handles double-quoted fields with embedded commas
// and doubled quotes. Trailing '\r' is stripped.
std::vector<std::string> split_line(std::string_view line);

// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string_view trim(std::string_view s);

} // namespace panelcast::csv

#include <optional>

namespace panelcast::csv {

// Parses a finite decimal number occupying the whole (trimmed) field.
std::optional<double> parse_number(std::string_view field);
std::optional<long long> parse_integer(std::string_view field);

} // namespace panelcast::csv
