#include "blipsum/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "blipsum/errors.hpp"

namespace blipsum::io {

std::string format_g17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
    if (!out) throw ConfigError("write failed: " + path);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_double_token(const std::string& token, double& out) {
    const char* begin = token.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    return *end == '\0';
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> load_two_column_csv(
    const std::string& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::vector<double> col_a, col_b;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split(line, ',');
        if (cells.size() < 2) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected two columns");
        }
        double a, b;
        if (!parse_double_token(cells[0], a) || !parse_double_token(cells[1], b)) {
            if (line_no == 1) continue;  // header line
            throw ConfigError(path + ":" + std::to_string(line_no) + ": non-numeric row");
        }
        col_a.push_back(a);
        col_b.push_back(b);
    }
    if (col_a.empty()) throw ConfigError(path + ": no data rows");
    return {std::move(col_a), std::move(col_b)};
}

std::vector<drive::SpinTrajectory::Segment> load_trajectory_csv(const std::string& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::vector<drive::SpinTrajectory::Segment> segments;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split(line, ',');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (cells.size() < 4)
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected t_begin,t_end,eta,xi");
        double tb, te, eta, xi;
        if (!parse_double_token(cells[0], tb) || !parse_double_token(cells[1], te) ||
            !parse_double_token(cells[2], eta) || !parse_double_token(cells[3], xi)) {
            if (line_no == 1) continue;  // header line
            throw ConfigError(path + ":" + std::to_string(line_no) + ": non-numeric row");
        }
        drive::SpinTrajectory::Segment seg;
        seg.t_begin = tb;
        seg.t_end = te;
        seg.eta = static_cast<int>(eta);
        seg.xi = static_cast<int>(xi);
        segments.push_back(seg);
    }
    if (segments.empty()) throw ConfigError(path + ": no trajectory segments");
    return segments;
}

}  // namespace blipsum::io
