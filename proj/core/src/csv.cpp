#include "distreg/csv.hpp"

#include "distreg/error.hpp"

#include <charconv>
#include <fstream>

namespace distreg::csv {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& field, std::size_t line_no, std::size_t col_no) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || field.empty()) {
        throw IoError("non-numeric cell '" + field + "' at line " + std::to_string(line_no) +
                      ", column " + std::to_string(col_no));
    }
    return value;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    Table table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (table.header.empty()) {
            table.header = split_line(line);
        } else {
            table.rows.push_back({line_no, split_line(line)});
        }
    }
    if (table.header.empty()) throw IoError("empty CSV file (no header): " + path);
    return table;
}

}  // namespace distreg::csv
