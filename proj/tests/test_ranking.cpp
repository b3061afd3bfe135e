#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "fdrp/gmm.hpp"
#include "fdrp/ranking.hpp"

using namespace fdrp;

namespace {

MixtureFit fit_with(std::vector<double> means_1d) {
    MixtureFit fit;
    for (double m : means_1d) {
        GaussianComponent c;
        c.weight = 1.0 / means_1d.size();
        c.mean = Eigen::VectorXd::Constant(1, m);
        c.cov = Eigen::MatrixXd::Identity(1, 1);
        fit.components.push_back(c);
    }
    return fit;
}

MixtureFit fit_with_posteriors(const Eigen::MatrixXd& z) {
    MixtureFit fit = fit_with(std::vector<double>(z.cols(), 0.0));
    for (int c = 0; c < z.cols(); ++c) fit.components[c].mean[0] = c;
    fit.posteriors = z;
    return fit;
}

}  // namespace

TEST_CASE("criterion names round-trip") {
    for (RankCriterion c : {RankCriterion::KL, RankCriterion::Wasserstein, RankCriterion::Entropy})
        REQUIRE(parse_rank_criterion(to_string(c)) == c);
    REQUIRE_THROWS_AS(parse_rank_criterion("bic"), std::invalid_argument);
}

TEST_CASE("mean pairwise kl on hand-checked mixtures") {
    REQUIRE(std::abs(kl_criterion(fit_with({3.0, 3.0}))) < 1e-12);
    // two unit-variance components one apart: KL each way is 0.5
    REQUIRE(std::abs(kl_criterion(fit_with({0.0, 1.0})) - 0.5) < 1e-12);
    // means 0,1,2: ordered-pair divergences (0.5,2,0.5,0.5,2,0.5)/6 = 1
    REQUIRE(std::abs(kl_criterion(fit_with({0.0, 1.0, 2.0})) - 1.0) < 1e-12);
}

TEST_CASE("mean pairwise wasserstein on hand-checked mixtures") {
    // unit variances cancel; squared mean gaps remain
    REQUIRE(std::abs(wasserstein_criterion(fit_with({0.0, 3.0})) - 9.0) < 1e-10);
    // pairs (0,3),(0,6),(3,6): (9 + 36 + 9)/3 = 18
    REQUIRE(std::abs(wasserstein_criterion(fit_with({0.0, 3.0, 6.0})) - 18.0) < 1e-10);
}

TEST_CASE("normalized posterior entropy on hand-checked matrices") {
    Eigen::MatrixXd crisp = Eigen::MatrixXd::Zero(4, 2);
    crisp.col(0).setOnes();
    crisp(2, 0) = 0.0;
    crisp(2, 1) = 1.0;
    REQUIRE(entropy_criterion(fit_with_posteriors(crisp)) == 0.0);

    const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(5, 3, 1.0 / 3.0);
    REQUIRE(std::abs(entropy_criterion(fit_with_posteriors(flat)) - 1.0) < 1e-12);

    Eigen::MatrixXd half(2, 2);
    half << 0.5, 0.5, 1.0, 0.0;
    REQUIRE(std::abs(entropy_criterion(fit_with_posteriors(half)) - 0.5) < 1e-12);
}

TEST_CASE("criteria ignore the order in which components are stored") {
    MixtureFit fit;
    {
        Eigen::MatrixXd z(6, 3);
        z << 0.7, 0.2, 0.1,
             0.1, 0.8, 0.1,
             0.3, 0.3, 0.4,
             0.9, 0.05, 0.05,
             0.2, 0.2, 0.6,
             0.1, 0.6, 0.3;
        fit = fit_with_posteriors(z);
        fit.components[0].cov(0, 0) = 2.0;
        fit.components[2].cov(0, 0) = 0.5;
    }
    MixtureFit shuffled = fit;
    std::swap(shuffled.components[0], shuffled.components[2]);
    Eigen::MatrixXd z2 = fit.posteriors;
    z2.col(0).swap(z2.col(2));
    shuffled.posteriors = z2;

    for (RankCriterion c : {RankCriterion::KL, RankCriterion::Wasserstein, RankCriterion::Entropy})
        REQUIRE(std::abs(criterion_value(fit, c) - criterion_value(shuffled, c)) < 1e-10);
}

TEST_CASE("single-component fits cannot be ranked") {
    const MixtureFit lone = fit_with({0.0});
    REQUIRE_THROWS_AS(kl_criterion(lone), std::invalid_argument);
    REQUIRE_THROWS_AS(wasserstein_criterion(lone), std::invalid_argument);
    REQUIRE_THROWS_AS(entropy_criterion(lone), std::invalid_argument);
}

TEST_CASE("selection keeps the best-scoring projections in order") {
    const std::vector<RankedFit> scored{{1, 0.1}, {2, 5.2}, {3, 3.3}};
    {
        const auto kept = rank_and_select(scored, RankCriterion::KL, 2);
        REQUIRE(kept.size() == 2);
        REQUIRE(kept[0].projection_index == 2);
        REQUIRE(kept[1].projection_index == 3);
    }
    {
        // entropy ranks ascending
        const std::vector<RankedFit> ent{{1, 0.9}, {2, 0.2}, {3, 0.2}};
        const auto kept = rank_and_select(ent, RankCriterion::Entropy, 3);
        REQUIRE(kept[0].projection_index == 2);  // tie goes to the lower index
        REQUIRE(kept[1].projection_index == 3);
        REQUIRE(kept[2].projection_index == 1);
    }
    {
        // asking for more than exist keeps everything
        const auto kept = rank_and_select(scored, RankCriterion::Wasserstein, 10);
        REQUIRE(kept.size() == 3);
        REQUIRE(kept[0].projection_index == 2);
    }
    {
        // input order does not matter
        std::vector<RankedFit> shuffled{{3, 3.3}, {1, 0.1}, {2, 5.2}};
        const auto a = rank_and_select(scored, RankCriterion::KL, 3);
        const auto b = rank_and_select(shuffled, RankCriterion::KL, 3);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i].projection_index == b[i].projection_index);
            REQUIRE(a[i].score == b[i].score);
        }
    }
}

TEST_CASE("selection rejects bad inputs") {
    const std::vector<RankedFit> scored{{1, 0.1}};
    REQUIRE_THROWS_AS(rank_and_select(scored, RankCriterion::KL, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(rank_and_select({}, RankCriterion::KL, 1), std::runtime_error);
    const std::vector<RankedFit> bad{{1, std::nan("")}};
    REQUIRE_THROWS_AS(rank_and_select(bad, RankCriterion::KL, 1), std::invalid_argument);
}
