#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdrp/divergence.hpp"
#include "fdrp/gmm.hpp"

namespace fdrp {

// KL and Wasserstein rank descending (more separation is better),
// entropy ascending (crisper posteriors are better).
enum class RankCriterion { KL, Wasserstein, Entropy };

inline const char* to_string(RankCriterion c) {
    switch (c) {
        case RankCriterion::KL: return "kl";
        case RankCriterion::Wasserstein: return "wasserstein";
        case RankCriterion::Entropy: return "entropy";
    }
    return "?";
}

inline RankCriterion parse_rank_criterion(const std::string& s) {
    if (s == "kl") return RankCriterion::KL;
    if (s == "wasserstein") return RankCriterion::Wasserstein;
    if (s == "entropy") return RankCriterion::Entropy;
    throw std::invalid_argument("unknown ranking criterion: " + s);
}

struct RankedFit {
    int projection_index = 0;
    double score = 0.0;
};

namespace detail {

inline void require_separable(const MixtureFit& fit) {
    if (fit.num_components() < 2)
        throw std::invalid_argument("separation criteria need at least two components");
}

}  // namespace detail

// Mean directed KL over ordered component pairs: sum_{h != g} KL(N_g || N_h) / (G(G-1)).
inline double kl_criterion(const MixtureFit& fit) {
    detail::require_separable(fit);
    const int g = fit.num_components();
    double total = 0.0;
    for (int a = 0; a < g; ++a)
        for (int b = 0; b < g; ++b) {
            if (a == b) continue;
            total += kl_gaussian(fit.components[a].mean, fit.components[a].cov,
                                 fit.components[b].mean, fit.components[b].cov);
        }
    return total / (static_cast<double>(g) * (g - 1));
}

// Mean squared 2-Wasserstein distance over unordered component pairs.
inline double wasserstein_criterion(const MixtureFit& fit) {
    detail::require_separable(fit);
    const int g = fit.num_components();
    double total = 0.0;
    for (int a = 0; a < g; ++a)
        for (int b = a + 1; b < g; ++b)
            total += wasserstein_gaussian(fit.components[a].mean, fit.components[a].cov,
                                          fit.components[b].mean, fit.components[b].cov);
    return total / (0.5 * g * (g - 1));
}

// Mean posterior entropy normalized by ln(G), in [0, 1]; 0 ln 0 = 0.
inline double entropy_criterion(const MixtureFit& fit) {
    detail::require_separable(fit);
    const auto& z = fit.posteriors;
    const int n = static_cast<int>(z.rows());
    const int g = static_cast<int>(z.cols());
    if (n < 1) throw std::invalid_argument("empty posterior matrix");
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < g; ++c) {
            const double p = z(i, c);
            if (p > 0.0) total -= p * std::log(p);
        }
    return total / (n * std::log(static_cast<double>(g)));
}

inline double criterion_value(const MixtureFit& fit, RankCriterion c) {
    switch (c) {
        case RankCriterion::KL: return kl_criterion(fit);
        case RankCriterion::Wasserstein: return wasserstein_criterion(fit);
        case RankCriterion::Entropy: return entropy_criterion(fit);
    }
    throw std::invalid_argument("unknown ranking criterion");
}

// Sorts scored fits (better first, ties to the lower projection index) and
// keeps at most b_star of them.
inline std::vector<RankedFit> rank_and_select(std::vector<RankedFit> scored, RankCriterion c,
                                              int b_star) {
    if (b_star < 1) throw std::invalid_argument("must retain at least one projection");
    if (scored.empty()) throw std::runtime_error("no rankable projections to select from");
    for (const auto& s : scored)
        if (!std::isfinite(s.score)) throw std::invalid_argument("non-finite criterion score");

    const bool ascending = (c == RankCriterion::Entropy);
    std::sort(scored.begin(), scored.end(), [ascending](const RankedFit& a, const RankedFit& b) {
        if (a.score != b.score) return ascending ? a.score < b.score : a.score > b.score;
        return a.projection_index < b.projection_index;
    });
    if (static_cast<int>(scored.size()) > b_star) scored.resize(b_star);
    return scored;
}

}  // namespace fdrp
