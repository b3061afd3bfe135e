#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fdrp/assignment.hpp"
#include "fdrp/common.hpp"
#include "fdrp/partition.hpp"

namespace fdrp {

struct ConsensusConfig {
    double tol = 1e-9;  // absolute objective decrease
    int max_iter = 100;
    std::vector<double> weights;  // empty = equal weights
};

struct ConsensusResult {
    Eigen::MatrixXd membership;  // N x k_max, rows on the simplex
    std::vector<double> objective_trace;
    int n_iter = 0;
    bool converged = false;
};

// Appends zero columns on the right; rows keep their sums.
inline Eigen::MatrixXd pad_columns(const Eigen::MatrixXd& m, int k_max) {
    if (m.cols() > k_max) throw std::invalid_argument("membership matrix wider than k_max");
    if (m.cols() == k_max) return m;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), k_max);
    out.leftCols(m.cols()) = m;
    return out;
}

// Column permutation perm minimizing |mb * P - m|_F^2, where column j of mb
// is moved to position perm[j]. Solved exactly as a linear-sum assignment on
// squared column distances.
inline std::vector<int> optimal_matching(const Eigen::MatrixXd& mb, const Eigen::MatrixXd& m) {
    if (mb.rows() != m.rows() || mb.cols() != m.cols())
        throw std::invalid_argument("matching needs identically shaped matrices");
    const int k = static_cast<int>(m.cols());
    Eigen::MatrixXd cost(k, k);
    for (int j = 0; j < k; ++j)
        for (int l = 0; l < k; ++l) cost(j, l) = (mb.col(j) - m.col(l)).squaredNorm();
    return linear_sum_assignment(cost);
}

inline Eigen::MatrixXd apply_matching(const Eigen::MatrixXd& mb, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != mb.cols())
        throw std::invalid_argument("permutation length does not match column count");
    Eigen::MatrixXd out(mb.rows(), mb.cols());
    for (int j = 0; j < mb.cols(); ++j) out.col(perm[j]) = mb.col(j);
    return out;
}

// Fixed-point soft least-squares Euclidean consensus. Members arrive in rank
// order; the first (best-ranked) one, zero-padded, is the starting point.
// Each pass matches every member's columns to the current consensus and
// replaces it with the weighted mean of the matched members; the objective
// sum_b w_b |M_b P_b - M|_F^2 never increases.
inline ConsensusResult se_consensus(const std::vector<Eigen::MatrixXd>& members,
                                    const ConsensusConfig& cfg = {}) {
    if (members.empty()) throw std::runtime_error("consensus needs at least one member partition");
    const auto n = members[0].rows();
    int k_max = 0;
    for (const auto& m : members) {
        if (m.rows() != n) throw std::invalid_argument("member partitions disagree on N");
        k_max = std::max(k_max, static_cast<int>(m.cols()));
    }
    std::vector<double> w = cfg.weights.empty()
                                ? std::vector<double>(members.size(), 1.0)
                                : cfg.weights;
    if (w.size() != members.size())
        throw std::invalid_argument("one weight per member partition required");
    double w_total = 0.0;
    for (double wi : w) {
        if (!(wi > 0.0)) throw std::invalid_argument("weights must be positive");
        w_total += wi;
    }
    if (cfg.max_iter < 1) throw std::invalid_argument("consensus needs at least one iteration");

    std::vector<Eigen::MatrixXd> padded;
    padded.reserve(members.size());
    for (const auto& m : members) padded.push_back(pad_columns(m, k_max));

    ConsensusResult res;
    Eigen::MatrixXd consensus = padded[0];
    Eigen::MatrixXd mean(n, k_max), matched(n, k_max);
    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        std::vector<std::vector<int>> perms(padded.size());
        for (std::size_t b = 0; b < padded.size(); ++b)
            perms[b] = optimal_matching(padded[b], consensus);

        mean.setZero();
        for (std::size_t b = 0; b < padded.size(); ++b)
            mean += w[b] * apply_matching(padded[b], perms[b]);
        mean /= w_total;

        double objective = 0.0;
        for (std::size_t b = 0; b < padded.size(); ++b) {
            matched = apply_matching(padded[b], perms[b]);
            objective += w[b] * (matched - mean).squaredNorm();
        }
        consensus = mean;
        res.objective_trace.push_back(objective);
        res.n_iter = iter;
        if (iter >= 2 && res.objective_trace[iter - 2] - objective < cfg.tol) {
            res.converged = true;
            break;
        }
    }
    res.membership = std::move(consensus);
    return res;
}

// Row-wise argmax (ties to the lowest column), then labels compressed to
// consecutive integers starting at 1 in column order.
inline CrispPartition crispify(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    const int k = static_cast<int>(m.cols());
    if (n < 1 || k < 1) throw std::invalid_argument("empty membership matrix");

    std::vector<int> argmax(n);
    std::vector<char> used(k, 0);
    for (int i = 0; i < n; ++i) {
        int best = 0;
        for (int c = 1; c < k; ++c)
            if (m(i, c) > m(i, best)) best = c;
        argmax[i] = best;
        used[best] = 1;
    }
    std::vector<int> relabel(k, 0);
    int next = 0;
    for (int c = 0; c < k; ++c)
        if (used[c]) relabel[c] = ++next;

    CrispPartition part;
    part.labels.resize(n);
    for (int i = 0; i < n; ++i) part.labels[i] = relabel[argmax[i]];
    part.k_effective = next;
    return part;
}

// Mean row entropy over the nonzero columns of M, normalized by
// ln(#nonzero columns); 0 = hard, 1 = uniform.
inline double ensemble_entropy(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    const int k = static_cast<int>(m.cols());
    int k_nonzero = 0;
    for (int c = 0; c < k; ++c)
        if ((m.col(c).array() != 0.0).any()) ++k_nonzero;
    if (k_nonzero < 2)
        throw std::runtime_error("ensemble entropy undefined with fewer than two occupied clusters");

    double total = 0.0;
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < k; ++c) {
            const double p = m(i, c);
            if (p > 0.0) total -= p * std::log(p);
        }
    return total / (n * std::log(static_cast<double>(k_nonzero)));
}

}  // namespace fdrp
