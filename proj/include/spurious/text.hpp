#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace spurious {

// Round-trippable decimal, 17 significant digits.
std::string format_double(double v);

// Parses a full string as a double; throws DataError naming `what` otherwise.
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

std::vector<std::string> split_char(std::string_view s, char sep);
std::string_view trim(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Writes `content` to `path` through a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace spurious
