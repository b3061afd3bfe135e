#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "fdrp/common.hpp"

namespace fdrp {

// Symmetric PSD square root via eigendecomposition. Eigenvalues in
// [-1e-8, 0) are treated as roundoff and clamped to zero; anything more
// negative means the input was not a covariance.
inline Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("matrix square root needs a square input");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("matrix square root needs a symmetric input");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) {
        if (ev[i] < -1e-8) throw NumericError("matrix is not positive semidefinite");
        if (ev[i] < 0.0) ev[i] = 0.0;
    }
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

// KL(N(mu0,S0) || N(mu1,S1)) in nats.
inline double kl_gaussian(const Eigen::VectorXd& mu0, const Eigen::MatrixXd& s0,
                          const Eigen::VectorXd& mu1, const Eigen::MatrixXd& s1) {
    const int d = static_cast<int>(mu0.size());
    if (mu1.size() != d || s0.rows() != d || s0.cols() != d || s1.rows() != d || s1.cols() != d)
        throw std::invalid_argument("KL divergence needs matching dimensions");

    Eigen::LLT<Eigen::MatrixXd> llt1(s1);
    if (llt1.info() != Eigen::Success)
        throw NumericError("second covariance is not positive definite");
    Eigen::LLT<Eigen::MatrixXd> llt0(s0);
    if (llt0.info() != Eigen::Success)
        throw NumericError("first covariance is not positive definite");

    const double logdet0 = 2.0 * llt0.matrixLLT().diagonal().array().log().sum();
    const double logdet1 = 2.0 * llt1.matrixLLT().diagonal().array().log().sum();
    const double tr = llt1.solve(s0).trace();
    const Eigen::VectorXd diff = mu1 - mu0;
    const double maha = diff.dot(llt1.solve(diff));
    return 0.5 * (tr + maha - d + logdet1 - logdet0);
}

// Squared 2-Wasserstein distance between N(mu0,S0) and N(mu1,S1):
// |mu0-mu1|^2 + tr(S0) + tr(S1) - 2 tr((S1^1/2 S0 S1^1/2)^1/2).
inline double wasserstein_gaussian(const Eigen::VectorXd& mu0, const Eigen::MatrixXd& s0,
                                   const Eigen::VectorXd& mu1, const Eigen::MatrixXd& s1) {
    const int d = static_cast<int>(mu0.size());
    if (mu1.size() != d || s0.rows() != d || s0.cols() != d || s1.rows() != d || s1.cols() != d)
        throw std::invalid_argument("Wasserstein distance needs matching dimensions");

    const Eigen::MatrixXd root1 = spd_sqrt(s1);
    const Eigen::MatrixXd cross = spd_sqrt(root1 * s0 * root1);
    const double w2 = (mu0 - mu1).squaredNorm() + s0.trace() + s1.trace() - 2.0 * cross.trace();
    // Exact arithmetic gives w2 >= 0; tiny negatives are roundoff.
    return w2 < 0.0 ? 0.0 : w2;
}

}  // namespace fdrp
