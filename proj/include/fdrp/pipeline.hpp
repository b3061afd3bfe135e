#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdrp/common.hpp"
#include "fdrp/consensus.hpp"
#include "fdrp/gmm.hpp"
#include "fdrp/partition.hpp"
#include "fdrp/projection.hpp"
#include "fdrp/ranking.hpp"
#include "fdrp/rng.hpp"

namespace fdrp {

struct PipelineConfig {
    int num_projections = 1000;  // B
    int num_retained = 100;      // B*
    int d = 0;                   // 0 = derive from the heuristic below
    double a = 5.0;              // d = ceil(a ln G) + 1
    int heuristic_g = 0;         // 0 = largest value in g_range
    ProjectionKind matrix_kind = ProjectionKind::Haar;
    RankCriterion criterion = RankCriterion::KL;
    std::vector<int> g_range = {2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<CovarianceModel> models{kAllCovarianceModels,
                                        kAllCovarianceModels + 6};
    std::uint64_t seed = 0;
    int threads = 1;
    int restarts = 3;  // kept for config compatibility; the EM start is deterministic
    double em_tol = 1e-6;
    int em_max_iter = 500;
    ConsensusConfig consensus;

    int resolve_d(int input_dim) const {
        int dim = d;
        if (dim == 0) {
            int g = heuristic_g;
            if (g == 0) {
                for (int v : g_range) g = std::max(g, v);
            }
            dim = heuristic_dim(g, a);
        }
        if (dim >= input_dim)
            throw std::invalid_argument("projection dimension " + std::to_string(dim) +
                                        " must be below the coefficient dimension " +
                                        std::to_string(input_dim));
        return dim;
    }

    void validate() const {
        if (num_projections < 1) throw std::invalid_argument("need at least one projection");
        if (num_retained < 1 || num_retained > num_projections)
            throw std::invalid_argument("retained count must lie in [1, B]");
        if (g_range.empty()) throw std::invalid_argument("empty component range");
        for (int g : g_range)
            if (g < 1) throw std::invalid_argument("component counts must be positive");
        if (models.empty()) throw std::invalid_argument("empty covariance model list");
        if (restarts < 1) throw std::invalid_argument("need at least one restart");
        if (threads < 1) throw std::invalid_argument("thread count must be positive");
    }
};

enum class ProjectionStatus { Retained, Discarded, Unfit };

inline const char* to_string(ProjectionStatus s) {
    switch (s) {
        case ProjectionStatus::Retained: return "retained";
        case ProjectionStatus::Discarded: return "discarded";
        case ProjectionStatus::Unfit: return "unfit";
    }
    return "?";
}

struct ProjectionRecord {
    int index = 0;
    ProjectionStatus status = ProjectionStatus::Unfit;
    int num_components = 0;
    CovarianceModel model = CovarianceModel::VVV;
    double bic = std::numeric_limits<double>::quiet_NaN();
    double score = std::numeric_limits<double>::quiet_NaN();
    int rank = -1;  // 0-based rank among retained projections, -1 otherwise
    std::string note;
};

struct PipelineResult {
    CrispPartition labels;
    Eigen::MatrixXd membership;  // N x k_max consensus
    std::vector<ProjectionRecord> per_projection;
    int selected_d = 0;
    std::vector<double> consensus_trace;
    int consensus_iters = 0;
    bool consensus_converged = false;
    // NaN when fewer than two consensus clusters are occupied.
    double ensemble_entropy_value = std::numeric_limits<double>::quiet_NaN();
    double wall_seconds = 0.0;

    int count(ProjectionStatus s) const {
        int c = 0;
        for (const auto& r : per_projection) c += (r.status == s);
        return c;
    }
};

// Full run over one coefficient matrix: B seeded projections, a mixture fit
// per projection, criterion ranking, consensus over the best B*, crisp
// labels. Deterministic in (coef, cfg) regardless of thread count.
inline PipelineResult run_pipeline(const Eigen::MatrixXd& coef, const PipelineConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.validate();
    if (!coef.allFinite()) throw std::invalid_argument("coefficient matrix has non-finite entries");
    {
        // Identical curves cannot be clustered; fail early instead of letting
        // every projection chase rounding noise.
        const double scale = coef.cwiseAbs().maxCoeff();
        const double spread =
            (coef.rowwise() - coef.colwise().mean()).cwiseAbs().maxCoeff();
        if (spread <= 1e-12 * std::max(scale, 1.0))
            throw std::runtime_error("coefficient rows are (numerically) identical");
    }
    const int K = static_cast<int>(coef.cols());
    const int B = cfg.num_projections;
    const int d = cfg.resolve_d(K);

    PipelineResult res;
    res.selected_d = d;
    res.per_projection.resize(B);
    std::vector<std::optional<MixtureFit>> fits(B);

    parallel_for(0, B, cfg.threads, [&](int b) {
        ProjectionRecord& rec = res.per_projection[b];
        rec.index = b;
        const std::uint64_t seed_b = derive_seed(cfg.seed, {static_cast<std::uint64_t>(b)});
        try {
            const ProjectionMatrix proj = make_projection(cfg.matrix_kind, K, d, seed_b);
            const Eigen::MatrixXd x = coef * proj.a;
            MixtureFit fit = fit_best(x, cfg.g_range, cfg.models, seed_b, cfg.restarts,
                                      cfg.em_tol, cfg.em_max_iter);
            rec.num_components = fit.num_components();
            rec.model = fit.model;
            rec.bic = fit.bic;
            if (fit.num_components() < 2) {
                rec.status = ProjectionStatus::Unfit;
                rec.note = "single-component fit has no separation criterion";
                return;
            }
            rec.score = criterion_value(fit, cfg.criterion);
            rec.status = ProjectionStatus::Discarded;  // promoted to Retained after ranking
            fits[b].emplace(std::move(fit));
        } catch (const ProjectionUnfitError& e) {
            rec.status = ProjectionStatus::Unfit;
            rec.note = e.what();
        } catch (const NumericError& e) {
            rec.status = ProjectionStatus::Unfit;
            rec.note = std::string("criterion evaluation failed: ") + e.what();
        }
    });

    std::vector<RankedFit> scored;
    scored.reserve(B);
    for (int b = 0; b < B; ++b)
        if (fits[b]) scored.push_back({b, res.per_projection[b].score});
    if (scored.empty()) {
        int unfit = 0;
        for (const auto& r : res.per_projection) unfit += (r.status == ProjectionStatus::Unfit);
        throw std::runtime_error("pipeline failed: none of the " + std::to_string(B) +
                                 " projections produced a rankable fit (" +
                                 std::to_string(unfit) + " unfit)");
    }

    const std::vector<RankedFit> ranked = rank_and_select(scored, cfg.criterion, cfg.num_retained);
    std::vector<Eigen::MatrixXd> members;
    members.reserve(ranked.size());
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        const int b = ranked[r].projection_index;
        res.per_projection[b].status = ProjectionStatus::Retained;
        res.per_projection[b].rank = static_cast<int>(r);
        members.push_back(fits[b]->posteriors);
    }

    ConsensusResult cons = se_consensus(members, cfg.consensus);
    res.labels = crispify(cons.membership);
    res.consensus_trace = std::move(cons.objective_trace);
    res.consensus_iters = cons.n_iter;
    res.consensus_converged = cons.converged;
    try {
        res.ensemble_entropy_value = ensemble_entropy(cons.membership);
    } catch (const std::runtime_error&) {
        // fewer than two occupied clusters; entropy stays NaN
    }
    res.membership = std::move(cons.membership);
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

struct DimensionSelection {
    int selected_d = 0;
    PipelineResult result;
    // (candidate d, ensemble entropy) — NaN entropy marks a failed candidate.
    std::vector<std::pair<int, double>> entropies;
};

// Runs the pipeline once per candidate dimension and keeps the one whose
// consensus has the lowest ensemble entropy (ties to the smallest d).
inline DimensionSelection select_d(const Eigen::MatrixXd& coef, const PipelineConfig& cfg,
                                   const std::vector<int>& d_candidates) {
    if (d_candidates.empty()) throw std::invalid_argument("empty candidate list for d");

    DimensionSelection sel;
    bool have = false;
    double best_entropy = std::numeric_limits<double>::quiet_NaN();
    for (int cand : d_candidates) {
        PipelineConfig sub = cfg;
        sub.d = cand;
        double entropy = std::numeric_limits<double>::quiet_NaN();
        try {
            PipelineResult r = run_pipeline(coef, sub);
            entropy = r.ensemble_entropy_value;
            const bool better = std::isfinite(entropy) &&
                                (!have || entropy < best_entropy ||
                                 (entropy == best_entropy && cand < sel.selected_d));
            if (better) {
                sel.selected_d = cand;
                sel.result = std::move(r);
                best_entropy = entropy;
                have = true;
            }
        } catch (const std::exception& e) {
            warn(std::string("candidate d=") + std::to_string(cand) + " failed: " + e.what());
        }
        sel.entropies.emplace_back(cand, entropy);
    }
    if (!have)
        throw std::runtime_error("every candidate projection dimension failed or had undefined entropy");
    return sel;
}

}  // namespace fdrp
