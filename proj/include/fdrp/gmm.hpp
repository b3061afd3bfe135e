#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fdrp/common.hpp"
#include "fdrp/rng.hpp"

namespace fdrp {

// Volume/shape/orientation taxonomy: spherical, diagonal and full
// covariances, each either shared across components or varying.
enum class CovarianceModel { EII, VII, EEI, VVI, EEE, VVV };

inline constexpr CovarianceModel kAllCovarianceModels[] = {
    CovarianceModel::EII, CovarianceModel::VII, CovarianceModel::EEI,
    CovarianceModel::VVI, CovarianceModel::EEE, CovarianceModel::VVV};

inline const char* to_string(CovarianceModel m) {
    switch (m) {
        case CovarianceModel::EII: return "EII";
        case CovarianceModel::VII: return "VII";
        case CovarianceModel::EEI: return "EEI";
        case CovarianceModel::VVI: return "VVI";
        case CovarianceModel::EEE: return "EEE";
        case CovarianceModel::VVV: return "VVV";
    }
    return "?";
}

inline CovarianceModel parse_covariance_model(const std::string& s) {
    for (CovarianceModel m : kAllCovarianceModels)
        if (s == to_string(m)) return m;
    throw std::invalid_argument("unknown covariance model: " + s);
}

struct GaussianComponent {
    double weight = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

struct MixtureFit {
    std::vector<GaussianComponent> components;
    Eigen::MatrixXd posteriors;  // N x G, rows on the simplex
    double loglik = 0.0;
    double bic = 0.0;
    CovarianceModel model = CovarianceModel::VVV;
    int n_iter = 0;
    bool converged = false;
    std::vector<double> loglik_trace;

    int num_components() const { return static_cast<int>(components.size()); }
    int dim() const { return components.empty() ? 0 : static_cast<int>(components[0].mean.size()); }
};

// Free covariance parameters per model.
inline int covariance_param_count(CovarianceModel m, int g, int d) {
    switch (m) {
        case CovarianceModel::EII: return 1;
        case CovarianceModel::VII: return g;
        case CovarianceModel::EEI: return d;
        case CovarianceModel::VVI: return g * d;
        case CovarianceModel::EEE: return d * (d + 1) / 2;
        case CovarianceModel::VVV: return g * d * (d + 1) / 2;
    }
    return 0;
}

// BIC = 2 loglik - nu ln(N); larger is better.
inline double bic_score(double loglik, CovarianceModel model, int g, int d, int n) {
    const int nu = (g - 1) + g * d + covariance_param_count(model, g, d);
    return 2.0 * loglik - nu * std::log(static_cast<double>(n));
}

inline double bic(const MixtureFit& fit, int n) {
    return bic_score(fit.loglik, fit.model, fit.num_components(), fit.dim(), n);
}

namespace detail {

// Relative ridge used when scoring agglomerative merges. Keeps
// near-degenerate merges (flat in one direction) from posting -inf gains,
// which would otherwise chain thin slices together on pancake-shaped data.
inline constexpr double kAggloRidge = 0.01;

// Beyond this many rows the merge tree is built on a seeded subsample and
// the remaining rows join their nearest group mean.
inline constexpr int kAggloSampleCap = 512;

// Gaussian model-based agglomeration: starting from singletons, repeatedly
// merge the pair of groups that least increases
//     sum_g n_g log det((W_g + ridge) / n_g)
// where W_g is the within-group scatter and the ridge is kAggloRidge times
// the mean per-column variance, isotropic so distances are not distorted.
// Returns one-hot cuts for every level g = 1..g_max (cuts[0] stays empty).
// EM started from these cuts lands on blob-like structure instead of the
// razor-thin slicing optima that distance-based seeding is prone to when
// the data live near a subspace.
inline std::vector<Eigen::MatrixXd> agglomerative_cuts(const Eigen::MatrixXd& x, int g_max,
                                                       std::uint64_t seed) {
    const int n_all = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());

    // Rows the tree is actually built on. The sample must be at least g_max
    // rows so every requested cut exists.
    const int cap = std::max(kAggloSampleCap, g_max);
    std::vector<int> rows(n_all);
    for (int i = 0; i < n_all; ++i) rows[i] = i;
    if (n_all > cap) {
        Rng rng(seed);
        for (int i = 0; i < cap; ++i) {
            const int j = rng.uniform_int(i, n_all - 1);
            std::swap(rows[i], rows[j]);
        }
        rows.resize(cap);
        std::sort(rows.begin(), rows.end());
    }
    const int n = static_cast<int>(rows.size());

    const double mean_var =
        (x.rowwise() - x.colwise().mean()).array().square().mean();
    const Eigen::MatrixXd ridge = kAggloRidge * std::max(mean_var, 1e-300) *
                                  Eigen::MatrixXd::Identity(d, d);

    struct Group {
        std::vector<int> members;  // positions into rows
        Eigen::VectorXd sum;
        Eigen::MatrixXd w;  // scatter about the group mean
        bool alive = true;
    };
    std::vector<Group> groups(n);
    for (int i = 0; i < n; ++i) {
        groups[i].members = {i};
        groups[i].sum = x.row(rows[i]).transpose();
        groups[i].w = Eigen::MatrixXd::Zero(d, d);
    }

    // log det via Cholesky so tiny ridges cannot underflow a raw determinant.
    const auto logdet_spd = [](const Eigen::MatrixXd& s) {
        const Eigen::LLT<Eigen::MatrixXd> llt(s);
        if (llt.info() != Eigen::Success)
            throw NumericError("merge-tree scatter is not positive definite");
        return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    };
    const auto group_score = [&](const Group& a) {
        const double m = static_cast<double>(a.members.size());
        return m * (logdet_spd(a.w + ridge) - d * std::log(m));
    };
    // Score of the union, without materialising it.
    const auto merged_score = [&](const Group& a, const Group& b) {
        const double na = static_cast<double>(a.members.size());
        const double nb = static_cast<double>(b.members.size());
        const Eigen::VectorXd dm = a.sum / na - b.sum / nb;
        const Eigen::MatrixXd w = a.w + b.w + (na * nb / (na + nb)) * (dm * dm.transpose());
        const double m = na + nb;
        return m * (logdet_spd(w + ridge) - d * std::log(m));
    };

    std::vector<double> sc(n);
    for (int i = 0; i < n; ++i) sc[i] = group_score(groups[i]);
    Eigen::MatrixXd cost(n, n);
    cost.setConstant(std::numeric_limits<double>::max());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            cost(i, j) = merged_score(groups[i], groups[j]) - sc[i] - sc[j];

    std::vector<Eigen::MatrixXd> cuts(static_cast<std::size_t>(g_max) + 1);
    const auto harvest = [&](int live) {
        // Tree labels for sampled rows; everyone else joins the nearest mean.
        Eigen::MatrixXd means(live, d);
        std::vector<char> taken(static_cast<std::size_t>(n_all), 0);
        Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n_all, live);
        int c = 0;
        for (const Group& grp : groups) {
            if (!grp.alive) continue;
            means.row(c) = grp.sum.transpose() / static_cast<double>(grp.members.size());
            for (int pos : grp.members) {
                z(rows[pos], c) = 1.0;
                taken[static_cast<std::size_t>(rows[pos])] = 1;
            }
            ++c;
        }
        for (int i = 0; i < n_all; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            int best = 0;
            double best_d = (x.row(i) - means.row(0)).squaredNorm();
            for (int k = 1; k < live; ++k) {
                const double dist = (x.row(i) - means.row(k)).squaredNorm();
                if (dist < best_d) {
                    best_d = dist;
                    best = k;
                }
            }
            z(i, best) = 1.0;
        }
        cuts[static_cast<std::size_t>(live)] = std::move(z);
    };

    int live = n;
    while (live > 1) {
        if (live <= g_max) harvest(live);
        double best = std::numeric_limits<double>::max();
        int bi = -1, bj = -1;
        for (int i = 0; i < n; ++i) {
            if (!groups[i].alive) continue;
            for (int j = i + 1; j < n; ++j)
                if (groups[j].alive && cost(i, j) < best) {
                    best = cost(i, j);
                    bi = i;
                    bj = j;
                }
        }
        if (bi < 0) throw NumericError("no finite merge cost in the merge tree");
        Group& a = groups[bi];
        Group& b = groups[bj];
        {
            const double na = static_cast<double>(a.members.size());
            const double nb = static_cast<double>(b.members.size());
            const Eigen::VectorXd dm = a.sum / na - b.sum / nb;
            a.w += b.w + (na * nb / (na + nb)) * (dm * dm.transpose());
            a.sum += b.sum;
            a.members.insert(a.members.end(), b.members.begin(), b.members.end());
        }
        b.alive = false;
        sc[bi] = group_score(a);
        --live;
        for (int k = 0; k < n; ++k) {
            if (!groups[k].alive || k == bi) continue;
            cost(std::min(bi, k), std::max(bi, k)) = merged_score(a, groups[k]) - sc[bi] - sc[k];
        }
    }
    if (g_max >= 1) cuts[1] = Eigen::MatrixXd::Ones(n_all, 1);
    return cuts;
}

}  // namespace detail

// Initial hard assignment for EM, as one-hot responsibilities: the g-group
// cut of a model-based merge tree. Deterministic given the seed (the seed
// only matters above the subsampling threshold).
inline Eigen::MatrixXd init_assignment(const Eigen::MatrixXd& x, int g, std::uint64_t seed) {
    const int n = static_cast<int>(x.rows());
    if (g < 1) throw std::invalid_argument("need at least one component");
    if (g > n) throw std::invalid_argument("infeasible: more components than observations");
    return detail::agglomerative_cuts(x, g, seed)[static_cast<std::size_t>(g)];
}

namespace detail {

// Covariance estimates under the model constraint, from responsibilities.
// covs[g] is written in place; all matrices are d x d.
inline void constrained_covariances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& z,
                                    const Eigen::MatrixXd& means, const Eigen::VectorXd& nk,
                                    CovarianceModel model, std::vector<Eigen::MatrixXd>& covs,
                                    Eigen::MatrixXd& xc) {
    const int n = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    const int g = static_cast<int>(means.rows());

    switch (model) {
        case CovarianceModel::EII: {
            double wss = 0.0;
            for (int c = 0; c < g; ++c) {
                xc = x.rowwise() - means.row(c);
                wss += (xc.rowwise().squaredNorm().array() * z.col(c).array()).sum();
            }
            const double s2 = wss / (n * d);
            for (int c = 0; c < g; ++c)
                covs[c] = s2 * Eigen::MatrixXd::Identity(d, d);
            break;
        }
        case CovarianceModel::VII: {
            for (int c = 0; c < g; ++c) {
                xc = x.rowwise() - means.row(c);
                const double wss = (xc.rowwise().squaredNorm().array() * z.col(c).array()).sum();
                covs[c] = (wss / (nk[c] * d)) * Eigen::MatrixXd::Identity(d, d);
            }
            break;
        }
        case CovarianceModel::EEI: {
            Eigen::VectorXd diag = Eigen::VectorXd::Zero(d);
            for (int c = 0; c < g; ++c) {
                xc = x.rowwise() - means.row(c);
                diag += (xc.array().square().colwise() * z.col(c).array()).colwise().sum().matrix();
            }
            diag /= n;
            for (int c = 0; c < g; ++c) covs[c] = diag.asDiagonal();
            break;
        }
        case CovarianceModel::VVI: {
            for (int c = 0; c < g; ++c) {
                xc = x.rowwise() - means.row(c);
                Eigen::VectorXd diag =
                    (xc.array().square().colwise() * z.col(c).array()).colwise().sum().matrix() /
                    nk[c];
                covs[c] = diag.asDiagonal();
            }
            break;
        }
        case CovarianceModel::EEE: {
            Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(d, d);
            for (int c = 0; c < g; ++c) {
                xc = x.rowwise() - means.row(c);
                pooled.noalias() += xc.transpose() * (xc.array().colwise() * z.col(c).array()).matrix();
            }
            pooled /= n;
            for (int c = 0; c < g; ++c) covs[c] = pooled;
            break;
        }
        case CovarianceModel::VVV: {
            for (int c = 0; c < g; ++c) {
                xc = x.rowwise() - means.row(c);
                covs[c].noalias() =
                    xc.transpose() * (xc.array().colwise() * z.col(c).array()).matrix();
                covs[c] /= nk[c];
            }
            break;
        }
    }
}

inline bool is_diagonal_model(CovarianceModel m) {
    return m != CovarianceModel::EEE && m != CovarianceModel::VVV;
}

inline double smallest_eigenvalue(const Eigen::MatrixXd& cov, CovarianceModel model) {
    if (is_diagonal_model(model)) return cov.diagonal().minCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace detail

// EM for a Gaussian mixture under one covariance constraint, starting from
// an N x G responsibility matrix. The log-likelihood trace is recorded; a
// component whose weight falls below 1/(10N) aborts the fit.
inline MixtureFit em_fit(const Eigen::MatrixXd& x, int g, CovarianceModel model,
                         const Eigen::MatrixXd& init, double tol = 1e-6, int max_iter = 500) {
    const int n = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    if (n <= g) throw std::invalid_argument("EM needs more observations than components");
    if (d < 1) throw std::invalid_argument("EM needs at least one dimension");
    if (tol <= 0.0) throw std::invalid_argument("EM tolerance must be positive");
    if (max_iter < 1) throw std::invalid_argument("EM needs at least one iteration");
    if (init.rows() != n || init.cols() != g)
        throw std::invalid_argument("initial responsibilities have the wrong shape");

    constexpr double kLog2Pi = 1.8378770664093454835606594728112;
    const double weight_floor = 1.0 / (10.0 * n);

    Eigen::MatrixXd z = init;
    Eigen::MatrixXd means(g, d);
    std::vector<Eigen::MatrixXd> covs(g, Eigen::MatrixXd(d, d));
    Eigen::MatrixXd xc(n, d);
    Eigen::MatrixXd log_dens(n, g);
    Eigen::VectorXd nk(g), weights(g), lse(n);

    MixtureFit fit;
    fit.model = model;
    double prev_ll = 0.0;

    int iter = 0;
    for (iter = 1; iter <= max_iter; ++iter) {
        // M-step
        nk = z.colwise().sum();
        weights = nk / n;
        if (weights.minCoeff() < weight_floor)
            throw FitDegenerateError("component weight collapsed below 1/(10N)");
        means.noalias() = z.transpose() * x;
        means.array().colwise() /= nk.array();
        detail::constrained_covariances(x, z, means, nk, model, covs, xc);

        const bool shared_cov =
            model == CovarianceModel::EII || model == CovarianceModel::EEI ||
            model == CovarianceModel::EEE;
        for (int c = 0; c < g; ++c) {
            if (shared_cov && c > 0) {
                covs[c] = covs[0];
                continue;
            }
            const double lam_min = detail::smallest_eigenvalue(covs[c], model);
            if (lam_min < 1e-10) {
                const double ridge = 1e-8 * (covs[c].trace() / d);
                covs[c] += ridge * Eigen::MatrixXd::Identity(d, d);
            }
        }

        // E-step with the updated parameters
        for (int c = 0; c < g; ++c) {
            Eigen::LLT<Eigen::MatrixXd> llt(covs[c]);
            if (llt.info() != Eigen::Success)
                throw NumericError("covariance is not positive definite");
            const double logdet =
                2.0 * llt.matrixLLT().diagonal().array().log().sum();
            xc = x.rowwise() - means.row(c);
            const Eigen::MatrixXd sol = llt.matrixL().solve(xc.transpose());
            log_dens.col(c) = (-0.5 * (d * kLog2Pi + logdet) + std::log(weights[c])) -
                              0.5 * sol.colwise().squaredNorm().transpose().array();
        }
        lse = log_dens.rowwise().maxCoeff();
        lse += ((log_dens.colwise() - lse).array().exp().rowwise().sum()).log().matrix();
        const double ll = lse.sum();
        if (!std::isfinite(ll)) throw NumericError("non-finite mixture log-likelihood");
        z = (log_dens.colwise() - lse).array().exp();

        fit.loglik_trace.push_back(ll);
        if (iter >= 2 && std::abs(ll - prev_ll) / (1.0 + std::abs(ll)) < tol) {
            fit.converged = true;
            prev_ll = ll;
            break;
        }
        prev_ll = ll;
    }

    fit.n_iter = static_cast<int>(fit.loglik_trace.size());
    fit.loglik = prev_ll;
    fit.posteriors = std::move(z);
    fit.components.resize(g);
    for (int c = 0; c < g; ++c) {
        fit.components[c].weight = weights[c];
        fit.components[c].mean = means.row(c).transpose();
        fit.components[c].cov = covs[c];
    }
    fit.bic = bic_score(fit.loglik, model, g, d, n);
    return fit;
}

// Best-BIC fit over the (G, model) grid. One merge tree is built per dataset
// and its g-group cuts seed every fit, so the whole grid shares a consistent,
// deterministic starting point ("restarts" is accepted for interface
// stability; with a deterministic start repeated runs are identical, so each
// combination is fitted once). Degenerate combinations are skipped; if
// everything collapses the caller should discard the projection.
inline MixtureFit fit_best(const Eigen::MatrixXd& x, const std::vector<int>& g_range,
                           const std::vector<CovarianceModel>& models, std::uint64_t seed,
                           int restarts = 3, double tol = 1e-6, int max_iter = 500) {
    if (g_range.empty()) throw std::invalid_argument("empty component range");
    if (models.empty()) throw std::invalid_argument("empty model list");
    if (restarts < 1) throw std::invalid_argument("need at least one restart");

    const int n = static_cast<int>(x.rows());
    int g_max = 0;
    for (int g : g_range) {
        if (g < 1) throw std::invalid_argument("need at least one component");
        if (g > n) throw std::invalid_argument("infeasible: more components than observations");
        g_max = std::max(g_max, g);
    }
    const std::vector<Eigen::MatrixXd> cuts = detail::agglomerative_cuts(x, g_max, seed);

    MixtureFit best;
    bool have_best = false;
    for (int g : g_range) {
        for (std::size_t mi = 0; mi < models.size(); ++mi) {
            try {
                MixtureFit f =
                    em_fit(x, g, models[mi], cuts[static_cast<std::size_t>(g)], tol, max_iter);
                if (!have_best || f.bic > best.bic) {
                    best = std::move(f);
                    have_best = true;
                }
            } catch (const FitDegenerateError&) {
            } catch (const NumericError&) {
            }
        }
    }
    if (!have_best)
        throw ProjectionUnfitError("every (G, model) combination degenerated on this projection");
    return best;
}

}  // namespace fdrp
