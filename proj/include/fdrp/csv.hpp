#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fdrp/bspline.hpp"
#include "fdrp/partition.hpp"

namespace fdrp {
namespace detail {

inline double parse_csv_double(std::string_view cell, std::size_t row, std::size_t col) {
    // Trim surrounding spaces and an optional CR left by Windows line endings.
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() &&
           (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
        cell.remove_suffix(1);
    double value = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last)
        throw std::runtime_error("non-numeric cell at row " + std::to_string(row + 1) +
                                 ", column " + std::to_string(col + 1));
    return value;
}

inline std::vector<double> parse_csv_row(const std::string& line, std::size_t row) {
    std::vector<double> out;
    std::size_t start = 0, col = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        const std::size_t end = (comma == std::string::npos) ? line.size() : comma;
        out.push_back(parse_csv_double(
            std::string_view(line).substr(start, end - start), row, col++));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    return f;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    return f;
}

inline void append_formatted(std::string& buf, double v) {
    char tmp[40];
    const int len = std::snprintf(tmp, sizeof tmp, "%.17g", v);
    buf.append(tmp, len);
}

}  // namespace detail

// Rectangular numeric CSV -> matrix. Blank lines are skipped; a `#t,` header
// (handled by read_curves_csv) must be stripped before calling this.
inline Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    auto f = detail::open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") {
            ++lineno;
            continue;
        }
        rows.push_back(detail::parse_csv_row(line, lineno));
        if (rows.size() > 1 && rows.back().size() != rows.front().size())
            throw std::runtime_error("ragged CSV: row " + std::to_string(lineno + 1) + " has " +
                                     std::to_string(rows.back().size()) + " cells, expected " +
                                     std::to_string(rows.front().size()) + " in " + path);
        ++lineno;
    }
    if (rows.empty()) throw std::runtime_error("empty CSV file " + path);
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    auto f = detail::open_out(path);
    std::string buf;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        buf.clear();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) buf.push_back(',');
            detail::append_formatted(buf, m(i, j));
        }
        buf.push_back('\n');
        f << buf;
    }
}

// Curve CSV: one curve per row; optional first row `#t,<g1>,<g2>,...` giving
// the sampling grid, otherwise the grid defaults to 1..n.
inline CurveSet read_curves_csv(const std::string& path) {
    auto f = detail::open_in(path);
    std::string line;
    std::vector<std::vector<double>> rows;
    std::vector<double> grid;
    bool have_grid = false;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") {
            ++lineno;
            continue;
        }
        if (!have_grid && rows.empty() && line.rfind("#t,", 0) == 0) {
            grid = detail::parse_csv_row(line.substr(3), lineno);
            have_grid = true;
            ++lineno;
            continue;
        }
        rows.push_back(detail::parse_csv_row(line, lineno));
        if (rows.size() > 1 && rows.back().size() != rows.front().size())
            throw std::runtime_error("ragged CSV: row " + std::to_string(lineno + 1) + " has " +
                                     std::to_string(rows.back().size()) + " cells, expected " +
                                     std::to_string(rows.front().size()) + " in " + path);
        ++lineno;
    }
    if (rows.empty()) throw std::runtime_error("no curves in " + path);
    const std::size_t n = rows[0].size();
    if (have_grid && grid.size() != n)
        throw std::runtime_error("grid header length " + std::to_string(grid.size()) +
                                 " does not match curve length " + std::to_string(n));

    CurveSet cs;
    if (have_grid) {
        cs.grid.points = std::move(grid);
    } else {
        cs.grid.points.resize(n);
        for (std::size_t j = 0; j < n; ++j) cs.grid.points[j] = static_cast<double>(j + 1);
    }
    cs.values.resize(rows.size(), n);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < n; ++j) cs.values(i, j) = rows[i][j];
    cs.validate();
    return cs;
}

inline void write_curves_csv(const std::string& path, const CurveSet& curves) {
    auto f = detail::open_out(path);
    std::string buf = "#t";
    for (double t : curves.grid.points) {
        buf.push_back(',');
        detail::append_formatted(buf, t);
    }
    buf.push_back('\n');
    f << buf;
    for (Eigen::Index i = 0; i < curves.values.rows(); ++i) {
        buf.clear();
        for (Eigen::Index j = 0; j < curves.values.cols(); ++j) {
            if (j > 0) buf.push_back(',');
            detail::append_formatted(buf, curves.values(i, j));
        }
        buf.push_back('\n');
        f << buf;
    }
}

// One 1-based integer label per line.
inline void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
    auto f = detail::open_out(path);
    for (int l : labels) f << l << '\n';
}

inline std::vector<int> read_labels_csv(const std::string& path) {
    auto f = detail::open_in(path);
    std::vector<int> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") {
            ++lineno;
            continue;
        }
        const double v = detail::parse_csv_double(line, lineno, 0);
        const int l = static_cast<int>(v);
        if (static_cast<double>(l) != v)
            throw std::runtime_error("non-integer label at line " + std::to_string(lineno + 1));
        labels.push_back(l);
        ++lineno;
    }
    if (labels.empty()) throw std::runtime_error("no labels in " + path);
    return labels;
}

}  // namespace fdrp
