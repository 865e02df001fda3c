#pragma once

#include <string>
#include <vector>

namespace memprobe {

// Shortest decimal form that round-trips to the same double. Keeps repeated
// exports byte-identical.
std::string fmt_double(double v);

double parse_double(const std::string& s);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace memprobe
