#pragma once

#include <string>
#include <vector>

namespace scblock::csv {

// Parses delimiter-separated text with the usual quoting convention:
// fields may be wrapped in double quotes, embedded quotes are doubled,
// quoted fields may contain delimiters and newlines. Accepts LF and CRLF.
std::vector<std::vector<std::string>> parse(const std::string& text, char delimiter = ',');

std::vector<std::vector<std::string>> read_file(const std::string& path, char delimiter = ',');

// Quotes a field only when it contains the delimiter, a quote or a newline.
std::string escape_field(const std::string& field, char delimiter = ',');

std::string format_row(const std::vector<std::string>& fields, char delimiter = ',');

}  // namespace scblock::csv
