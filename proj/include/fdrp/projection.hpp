#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "fdrp/rng.hpp"

namespace fdrp {

enum class ProjectionKind { GaussianNormalized, Haar };

inline const char* to_string(ProjectionKind kind) {
    return kind == ProjectionKind::GaussianNormalized ? "gaussian" : "haar";
}

inline ProjectionKind parse_projection_kind(const std::string& s) {
    if (s == "gaussian") return ProjectionKind::GaussianNormalized;
    if (s == "haar") return ProjectionKind::Haar;
    throw std::invalid_argument("unknown projection kind: " + s);
}

struct ProjectionMatrix {
    Eigen::MatrixXd a;  // K x d, unit-norm columns
    ProjectionKind kind = ProjectionKind::Haar;
    std::uint64_t seed = 0;

    int input_dim() const { return static_cast<int>(a.rows()); }
    int output_dim() const { return static_cast<int>(a.cols()); }
};

struct ProjectedData {
    Eigen::MatrixXd x;  // N x d
    int projection_index = 0;
};

namespace detail {

inline void check_projection_dims(int k, int d) {
    if (d <= 0) throw std::invalid_argument("projection dimension must be positive");
    if (d >= k)
        throw std::invalid_argument("projection dimension must be smaller than the input dimension");
}

inline Eigen::MatrixXd gaussian_entries(int k, int d, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd a(k, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < k; ++i) a(i, j) = rng.normal();
    return a;
}

}  // namespace detail

// K x d matrix of iid standard normals with columns scaled to unit norm.
inline ProjectionMatrix gaussian_projection(int k, int d, std::uint64_t seed) {
    detail::check_projection_dims(k, d);
    Eigen::MatrixXd a = detail::gaussian_entries(k, d, seed);
    for (int j = 0; j < d; ++j) a.col(j) /= a.col(j).norm();
    return {std::move(a), ProjectionKind::GaussianNormalized, seed};
}

// Orthonormal d-frame drawn uniformly (rotation invariant): thin Q of the QR
// decomposition of a Gaussian matrix, with signs fixed so R has a positive
// diagonal. The sign convention pins a unique representative.
inline ProjectionMatrix haar_projection(int k, int d, std::uint64_t seed) {
    detail::check_projection_dims(k, d);
    const Eigen::MatrixXd g = detail::gaussian_entries(k, d, seed);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(k, d);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(d);
    for (int j = 0; j < d; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return {std::move(q), ProjectionKind::Haar, seed};
}

inline ProjectionMatrix make_projection(ProjectionKind kind, int k, int d, std::uint64_t seed) {
    return kind == ProjectionKind::GaussianNormalized ? gaussian_projection(k, d, seed)
                                                      : haar_projection(k, d, seed);
}

// X = C A, mapping each coefficient row into the projected subspace.
inline Eigen::MatrixXd project(const Eigen::MatrixXd& coef, const ProjectionMatrix& proj) {
    if (coef.cols() != proj.a.rows())
        throw std::invalid_argument("coefficient columns do not match projection rows");
    return coef * proj.a;
}

// Projection dimension heuristic: ceil(a * ln(G)) + 1.
inline int heuristic_dim(int num_groups, double a) {
    if (num_groups < 2) throw std::invalid_argument("heuristic needs at least 2 groups");
    if (a <= 0.0) throw std::invalid_argument("heuristic scale must be positive");
    return static_cast<int>(std::ceil(a * std::log(static_cast<double>(num_groups)))) + 1;
}

}  // namespace fdrp
