#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace fdrp {

namespace detail {

// Maps arbitrary label values to dense 0-based ids in order of first appearance.
inline std::vector<int> dense_ids(const std::vector<int>& labels, int& k) {
    std::unordered_map<int, int> ids;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        out[i] = ids.emplace(labels[i], static_cast<int>(ids.size())).first->second;
    k = static_cast<int>(ids.size());
    return out;
}

inline double comb2(double x) { return 0.5 * x * (x - 1.0); }

}  // namespace detail

// Contingency table: entry (g, c) counts units with found label g (row) and
// true label c (column), labels indexed in order of first appearance.
inline Eigen::MatrixXi confusion_matrix(const std::vector<int>& found,
                                        const std::vector<int>& truth) {
    if (found.size() != truth.size())
        throw std::invalid_argument("partitions must have equal length");
    if (found.empty()) throw std::invalid_argument("empty partitions");
    int kf = 0, kt = 0;
    const std::vector<int> f = detail::dense_ids(found, kf);
    const std::vector<int> t = detail::dense_ids(truth, kt);
    Eigen::MatrixXi table = Eigen::MatrixXi::Zero(kf, kt);
    for (std::size_t i = 0; i < f.size(); ++i) ++table(f[i], t[i]);
    return table;
}

// Hubert–Arabie adjusted Rand index. When the max-index denominator is zero
// (both partitions all singletons or both a single block) returns 1 if the
// partitions induce the same grouping, else 0.
inline double adjusted_rand_index(const std::vector<int>& u, const std::vector<int>& v) {
    if (u.size() != v.size()) throw std::invalid_argument("partitions must have equal length");
    const std::size_t n = u.size();
    if (n < 2) throw std::invalid_argument("ARI needs at least two units");

    const Eigen::MatrixXi table = confusion_matrix(u, v);
    double sum_cells = 0.0;
    for (int i = 0; i < table.rows(); ++i)
        for (int j = 0; j < table.cols(); ++j) sum_cells += detail::comb2(table(i, j));
    double sum_rows = 0.0, sum_cols = 0.0;
    for (int i = 0; i < table.rows(); ++i) sum_rows += detail::comb2(table.row(i).sum());
    for (int j = 0; j < table.cols(); ++j) sum_cols += detail::comb2(table.col(j).sum());

    const double total = detail::comb2(static_cast<double>(n));
    const double expected = sum_rows * sum_cols / total;
    const double maximum = 0.5 * (sum_rows + sum_cols);
    const double denom = maximum - expected;
    if (std::abs(denom) < 1e-12) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if ((u[i] == u[j]) != (v[i] == v[j])) return 0.0;
        return 1.0;
    }
    return (sum_cells - expected) / denom;
}

// Histogram of selected cluster counts across replicates.
inline std::map<int, int> cluster_count_table(const std::vector<int>& selected) {
    if (selected.empty()) throw std::invalid_argument("empty replicate list");
    std::map<int, int> hist;
    for (int g : selected) ++hist[g];
    return hist;
}

}  // namespace fdrp
