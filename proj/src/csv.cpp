#include "pnc/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pnc/errors.hpp"

namespace pnc {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        std::ostringstream msg;
        msg << "row " << row << ", column " << col << ": cannot parse '" << cell
            << "' as a number";
        throw ParseError(msg.str());
    }
    return value;
}

} // namespace

std::string format_double(double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) lines.push_back(line);
    }
    if (lines.size() < 2) {
        throw ParseError(path + ": need a header row and at least one data row");
    }

    const std::vector<std::string> raw_header = split_line(lines[0]);
    std::ptrdiff_t label_col = -1;
    CsvTable table;
    for (std::size_t c = 0; c < raw_header.size(); ++c) {
        if (raw_header[c] == "label") {
            label_col = static_cast<std::ptrdiff_t>(c);
        } else {
            table.header.push_back(raw_header[c]);
        }
    }

    const std::size_t n_rows = lines.size() - 1;
    const std::size_t n_cols = table.header.size();
    table.values.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
    for (std::size_t r = 0; r < n_rows; ++r) {
        const std::vector<std::string> cells = split_line(lines[r + 1]);
        if (cells.size() != raw_header.size()) {
            std::ostringstream msg;
            msg << "row " << r + 1 << ": expected " << raw_header.size() << " cells, got "
                << cells.size();
            throw ParseError(msg.str());
        }
        std::size_t out_c = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (static_cast<std::ptrdiff_t>(c) == label_col) {
                table.labels.push_back(
                    static_cast<int>(parse_cell(cells[c], r + 1, c + 1)));
            } else {
                table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(out_c++)) =
                    parse_cell(cells[c], r + 1, c + 1);
            }
        }
    }
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& rows, const std::vector<int>* labels) {
    if (header.size() != static_cast<std::size_t>(rows.cols())) {
        throw DimensionError("write_csv: header/column mismatch");
    }
    if (labels != nullptr && labels->size() != static_cast<std::size_t>(rows.rows())) {
        throw DimensionError("write_csv: labels/row mismatch");
    }
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);

    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c > 0) out << ',';
        out << header[c];
    }
    if (labels != nullptr) out << ",label";
    out << '\n';

    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        for (Eigen::Index c = 0; c < rows.cols(); ++c) {
            if (c > 0) out << ',';
            out << format_double(rows(r, c));
        }
        if (labels != nullptr) out << ',' << (*labels)[static_cast<std::size_t>(r)];
        out << '\n';
    }
}

double parse_angle(const std::string& text) {
    const std::string s = trim(text);
    if (s.empty()) throw ParseError("empty angle");

    const std::size_t pi_pos = s.find("pi");
    if (pi_pos == std::string::npos) {
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            throw ParseError("cannot parse angle '" + text + "'");
        }
        return value;
    }

    std::string prefix = s.substr(0, pi_pos);
    const std::string suffix = s.substr(pi_pos + 2);
    double sign = 1.0;
    if (!prefix.empty() && (prefix[0] == '+' || prefix[0] == '-')) {
        if (prefix[0] == '-') sign = -1.0;
        prefix.erase(prefix.begin());
    }
    double coeff = 1.0;
    if (!prefix.empty()) {
        const auto [ptr, ec] = std::from_chars(prefix.data(), prefix.data() + prefix.size(), coeff);
        if (ec != std::errc() || ptr != prefix.data() + prefix.size()) {
            throw ParseError("cannot parse angle '" + text + "'");
        }
    }
    double denom = 1.0;
    if (!suffix.empty()) {
        if (suffix[0] != '/') throw ParseError("cannot parse angle '" + text + "'");
        const std::string d = suffix.substr(1);
        const auto [ptr, ec] = std::from_chars(d.data(), d.data() + d.size(), denom);
        if (ec != std::errc() || ptr != d.data() + d.size() || denom == 0.0) {
            throw ParseError("cannot parse angle '" + text + "'");
        }
    }
    return sign * coeff * std::numbers::pi / denom;
}

} // namespace pnc
