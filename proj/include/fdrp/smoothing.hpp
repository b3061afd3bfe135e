#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fdrp/bspline.hpp"
#include "fdrp/common.hpp"

namespace fdrp {

struct CoefficientMatrix {
    Eigen::MatrixXd coef;  // N x K
    BasisSpec spec;

    int num_curves() const { return static_cast<int>(coef.rows()); }
    int dim() const { return static_cast<int>(coef.cols()); }
};

namespace detail {

inline bool ldlt_usable(const Eigen::LDLT<Eigen::MatrixXd>& ldlt) {
    if (ldlt.info() != Eigen::Success) return false;
    const Eigen::VectorXd d = ldlt.vectorD();
    return d.minCoeff() > 0.0 && d.minCoeff() > 1e-13 * d.cwiseAbs().maxCoeff();
}

// Factorizes Phi'Phi + lambda R. At lambda = 0 a singular system is retried
// with lambda = 1e-10 (warned); K > n at lambda = 0 is rejected outright.
inline Eigen::LDLT<Eigen::MatrixXd> penalized_ldlt(const Eigen::MatrixXd& phi,
                                                   const Eigen::MatrixXd& r, double lambda) {
    const int n = static_cast<int>(phi.rows());
    const int k = static_cast<int>(phi.cols());
    if (r.rows() != k || r.cols() != k)
        throw std::invalid_argument("penalty matrix does not match the basis size");
    if (lambda == 0.0 && k > n)
        throw std::invalid_argument(
            "normal equations are rank deficient for K > n at lambda = 0; set lambda > 0");
    Eigen::MatrixXd m = phi.transpose() * phi;
    if (lambda != 0.0) m += lambda * r;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    if (!ldlt_usable(ldlt)) {
        if (lambda == 0.0) {
            warn("normal equations singular at lambda = 0; retrying with lambda = 1e-10");
            ldlt.compute(phi.transpose() * phi + 1e-10 * r);
            if (ldlt_usable(ldlt)) return ldlt;
        }
        throw NumericError("penalized normal equations could not be factorized");
    }
    return ldlt;
}

}  // namespace detail

// Minimizer of ||y - Phi c||^2 + lambda c' R c.
inline Eigen::VectorXd penalized_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& phi,
                                     const Eigen::MatrixXd& r, double lambda) {
    if (y.size() != phi.rows())
        throw std::invalid_argument("observation length does not match the design matrix");
    const auto ldlt = detail::penalized_ldlt(phi, r, lambda);
    return ldlt.solve(phi.transpose() * y);
}

// Generalized cross-validation: mean over curves of n * SSE_i / (n - tr H)^2,
// where tr H is the effective degrees of freedom of the smoother.
inline double gcv_score(const CurveSet& curves, const Eigen::MatrixXd& phi,
                        const Eigen::MatrixXd& r, double lambda) {
    curves.validate();
    const int n = static_cast<int>(phi.rows());
    if (curves.num_points() != n)
        throw std::invalid_argument("curve length does not match the design matrix");

    const auto ldlt = detail::penalized_ldlt(phi, r, lambda);
    const Eigen::MatrixXd coef = ldlt.solve(phi.transpose() * curves.values.transpose());
    const Eigen::MatrixXd resid = curves.values.transpose() - phi * coef;  // n x N
    const double mean_sse = resid.colwise().squaredNorm().mean();
    // A numerically perfect interpolation scores 0 even when the smoother
    // uses all n degrees of freedom (K = n, lambda = 0).
    const double data_scale = curves.values.squaredNorm() / curves.num_curves();
    if (mean_sse <= 1e-20 * std::max(data_scale, 1.0)) return 0.0;

    const double trace_hat = ldlt.solve(phi.transpose() * phi).trace();
    if (!(trace_hat < n))
        throw std::domain_error("gcv degenerate: effective degrees of freedom reach n");
    const double denom = (n - trace_hat) * (n - trace_hat);
    return n * mean_sse / denom;
}

struct SmoothingSelection {
    int num_basis = 0;
    double lambda = 0.0;
    double score = std::numeric_limits<double>::infinity();
};

// Grid search over (K, lambda) minimizing the GCV score.
// Ties resolve to the smaller K, then to the larger lambda.
inline SmoothingSelection select_smoothing(const CurveSet& curves,
                                           const std::vector<int>& k_candidates,
                                           const std::vector<double>& lambda_candidates,
                                           int order = 4) {
    curves.validate();
    if (k_candidates.empty() || lambda_candidates.empty())
        throw std::invalid_argument("candidate grids must be non-empty");
    SmoothingSelection best;
    bool found = false;
    for (int k : k_candidates) {
        BasisSpec spec{k, order, 0.0, {}};
        Eigen::MatrixXd phi, r;
        try {
            phi = design_matrix(curves.grid, spec);
            r = roughness_matrix(spec, curves.grid);
        } catch (const std::exception&) {
            continue;
        }
        for (double lambda : lambda_candidates) {
            double score;
            try {
                score = gcv_score(curves, phi, r, lambda);
            } catch (const std::exception&) {
                continue;
            }
            if (!std::isfinite(score)) continue;
            const bool better =
                !found || score < best.score ||
                (score == best.score &&
                 (k < best.num_basis || (k == best.num_basis && lambda > best.lambda)));
            if (better) {
                best = {k, lambda, score};
                found = true;
            }
        }
    }
    if (!found)
        throw std::runtime_error("smoothing selection failed: every grid point was degenerate");
    return best;
}

// Penalized fit of every curve against one shared design and penalty.
inline CoefficientMatrix smooth_dataset(const CurveSet& curves, const BasisSpec& spec) {
    curves.validate();
    spec.validate(curves.grid);
    if (!curves.grid.is_equispaced())
        warn("time grid is not equispaced; smoothing proceeds on the given locations");
    const Eigen::MatrixXd phi = design_matrix(curves.grid, spec);
    const Eigen::MatrixXd r = roughness_matrix(spec, curves.grid);
    const auto ldlt = detail::penalized_ldlt(phi, r, spec.lambda);

    CoefficientMatrix out;
    out.coef = ldlt.solve(phi.transpose() * curves.values.transpose()).transpose();
    out.spec = spec;
    if (!out.coef.allFinite()) throw NumericError("smoothing produced non-finite coefficients");
    return out;
}

}  // namespace fdrp
