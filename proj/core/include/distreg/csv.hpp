#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace distreg::csv {

/// Splits a CSV line on commas. No quoting: the formats used here never
/// quote fields.
std::vector<std::string> split_line(const std::string& line);

/// Parses a double with '.' decimal separator, locale-independent.
/// Throws IoError naming line/column on failure.
double parse_double(const std::string& field, std::size_t line_no, std::size_t col_no);

/// Formats a double at 17 significant digits (round-trip exact).
std::string format_double(double v);

struct Row {
    std::size_t line_no = 0;  ///< 1-based physical line in the file
    std::vector<std::string> fields;
};

/// Loads a whole CSV file: first non-empty line is the header, the rest are
/// rows. Trailing '\r' is stripped; empty lines are skipped.
struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;
};

Table read_file(const std::string& path);

}  // namespace distreg::csv
