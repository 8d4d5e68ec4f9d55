#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace pnc {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

struct CsvTable {
    std::vector<std::string> header; // numeric columns only
    Eigen::MatrixXd values;          // rows are observations
    std::vector<int> labels;         // contents of a "label" column, if present

    bool has_labels() const { return !labels.empty(); }
};

/// Strict CSV reader: first row is the header, '.' decimals, no locale.
/// A column named "label" is split out of the numeric block.
CsvTable read_csv(const std::string& path);

/// Rows are observations. Appends a "label" column when labels are given.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& rows, const std::vector<int>* labels = nullptr);

/// Radians, either plain decimals or pi fractions ("pi/6", "2pi/3", "-pi").
double parse_angle(const std::string& text);

} // namespace pnc
