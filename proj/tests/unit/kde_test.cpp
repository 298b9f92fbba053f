#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>

#include "oracles.hpp"
#include "refinder/errors.hpp"
#include "refinder/feedback/kde.hpp"
#include "refinder/feedback/refine.hpp"

using namespace refinder;

namespace {

SampleMatrix rows(std::initializer_list<std::initializer_list<double>> r) {
    SampleMatrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : r) {
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

std::vector<std::vector<double>> as_vectors(const SampleMatrix& m) {
    std::vector<std::vector<double>> out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out.emplace_back();
        for (Eigen::Index j = 0; j < m.cols(); ++j) out.back().push_back(m(i, j));
    }
    return out;
}

KdeContext ctx(double fallback) {
    KdeContext c;
    c.fallback_bandwidth = fallback;
    return c;
}

std::vector<float> pt(std::initializer_list<float> v) { return v; }

}  // namespace

TEST(Kde, CoincidentPositiveDominates) {
    const KdeScorer s = kde_fit(rows({{0, 0}}), rows({{10, 0}}), nullptr, ctx(0.5));
    EXPECT_GT(s.score(pt({0, 0})), 0.99);
}

TEST(Kde, EquidistantIsHalf) {
    const KdeScorer s = kde_fit(rows({{1, 0}}), rows({{-1, 0}}), nullptr, ctx(0.7));
    EXPECT_NEAR(s.score(pt({0, 1})), 0.5, 1e-12);
    EXPECT_NEAR(s.score(pt({0, -3})), 0.5, 1e-12);
}

TEST(Kde, TwoByTwoMatchesKernelSumOracle) {
    const SampleMatrix pos = rows({{0.0, 0.0}, {0.5, 0.3}});
    const SampleMatrix neg = rows({{2.0, 1.0}, {1.2, -0.4}});
    const KdeScorer s = kde_fit(pos, neg, nullptr, ctx(1.0));
    const auto P = as_vectors(pos), N = as_vectors(neg);
    const double hp = oracle::median_pairwise(P), hn = oracle::median_pairwise(N);
    EXPECT_NEAR(s.positive_bandwidth(), hp, 1e-12);
    EXPECT_NEAR(s.negative_bandwidth(), hn, 1e-12);
    for (const auto& x : std::vector<std::vector<double>>{{0.7, 0.1}, {1.5, 0.5}, {-0.3, 0.9}}) {
        const double kp = oracle::kernel_mean(P, x, hp), kn = oracle::kernel_mean(N, x, hn);
        const std::vector<float> xf{float(x[0]), float(x[1])};
        EXPECT_NEAR(s.score(xf), kp / (kp + kn), 1e-6);
    }
}

TEST(Kde, SurrogateReplacesMissingNegatives) {
    KdeContext c = ctx(0.8);
    c.negative_surrogate_log_density = std::log(0.2);
    const SampleMatrix pos = rows({{0, 0}, {1, 1}, {0, 1}});
    const KdeScorer s = kde_fit(pos, SampleMatrix(0, 2), nullptr, c);
    const auto P = as_vectors(pos);
    const double h = oracle::median_pairwise(P);
    const std::vector<double> x{0.4, 0.2};
    const double kp = oracle::kernel_mean(P, x, h);
    EXPECT_NEAR(s.score(pt({0.4f, 0.2f})), kp / (kp + 0.2), 1e-6);
}

TEST(Kde, MissingNegativesWithoutSurrogateThrows) {
    EXPECT_THROW(kde_fit(rows({{0, 0}}), SampleMatrix(0, 2), nullptr, ctx(1.0)), FeedbackError);
}

TEST(Kde, EmptyPositivesThrow) {
    EXPECT_THROW(kde_fit(SampleMatrix(0, 2), rows({{0, 0}}), nullptr, ctx(1.0)), FeedbackError);
}

TEST(Kde, SingleExemplarUsesFallbackBandwidth) {
    const KdeScorer s = kde_fit(rows({{0, 0}}), rows({{1, 0}, {0, 1}}), nullptr, ctx(0.37));
    EXPECT_DOUBLE_EQ(s.positive_bandwidth(), 0.37);
    EXPECT_NEAR(s.negative_bandwidth(), std::sqrt(2.0), 1e-12);
}

TEST(Kde, ScoresInUnitIntervalAndOrderInvariant) {
    oracle::Gen g(3);
    for (int t = 0; t < 30; ++t) {
        SampleMatrix pos(4, 5), neg(3, 5);
        for (Eigen::Index i = 0; i < pos.size(); ++i) pos(i) = g.normal();
        for (Eigen::Index i = 0; i < neg.size(); ++i) neg(i) = g.normal() + 1.0;
        SampleMatrix pos_r = pos.colwise().reverse(), neg_r = neg.colwise().reverse();
        const KdeScorer a = kde_fit(pos, neg, nullptr, ctx(1.0));
        const KdeScorer b = kde_fit(pos_r, neg_r, nullptr, ctx(1.0));
        for (int k = 0; k < 20; ++k) {
            const auto x = oracle::random_vector(g, 5);
            const double sa = a.score(x), sb = b.score(x);
            EXPECT_GE(sa, 0.0);
            EXPECT_LE(sa, 1.0);
            EXPECT_NEAR(sa, sb, 1e-12);
        }
    }
}

TEST(Kde, MedianPairwiseDistance) {
    EXPECT_FALSE(median_pairwise_distance(rows({{0, 0}})).has_value());
    // Distances 1, 2, sqrt(5): median 2.
    EXPECT_NEAR(*median_pairwise_distance(rows({{0, 0}, {1, 0}, {0, 2}})), 2.0, 1e-12);
}

TEST(CombineWithKde, IdentityBaseMatchesPlainKde) {
    const SampleMatrix pos = rows({{0.1, 0.2}, {0.4, 0.1}, {0.0, 0.6}});
    const SampleMatrix neg = rows({{1.0, 1.0}, {1.4, 0.2}});
    const LearnedMetric I = LearnedMetric::identity(2);
    const KdeScorer a = kde_fit(pos, neg, &I, ctx(1.0));
    const KdeScorer b = kde_fit(pos, neg, nullptr, ctx(1.0));
    oracle::Gen g(4);
    for (int k = 0; k < 30; ++k) {
        const auto x = oracle::random_vector(g, 2);
        EXPECT_NEAR(a.score(x), b.score(x), 1e-12);
    }
}

TEST(CombineWithKde, IdentityBaseOnCorpusMatchesPlainKde) {
    oracle::Gen g(5);
    std::vector<CorpusEntry> e;
    for (int i = 0; i < 50; ++i) e.push_back({"i" + std::to_string(i), oracle::random_vector(g, 3), {}, ""});
    const CorpusIndex idx = build_index(e);
    const std::vector<std::size_t> p{1, 2}, n{3};
    const SampleMatrix pos = with_row(gather_rows(idx, p), idx.row(0));
    const SampleMatrix neg = gather_rows(idx, n);
    const QueryRef q{idx.row(0), 0};
    const KdeScorer a = combine_with_kde(LearnedMetric::identity(3), pos, neg, idx, q);
    const KdeScorer b = kde_fit(pos, neg, nullptr, ctx(median_query_distance(idx, idx.row(0), nullptr, 0)));
    for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_NEAR(a.score(idx.row(i)), b.score(idx.row(i)), 1e-12);
}

TEST(CombineWithKde, NullspaceDirectionIsIgnored) {
    Eigen::VectorXd w(2);
    w << 1.0, 0.0;
    const LearnedMetric base = LearnedMetric::diagonal(w);
    const KdeScorer s = kde_fit(rows({{0.3, 0.0}, {0.3, 0.5}}), rows({{0.3, 1.0}}), &base, ctx(0.5));
    for (float x : {-1.0f, 0.0f, 0.4f})
        EXPECT_NEAR(s.score(pt({x, -2.0f})), s.score(pt({x, 3.0f})), 1e-12);
}

TEST(CombineWithKde, MatchesCholeskyTransformOracle) {
    oracle::Gen g(6);
    for (int t = 0; t < 20; ++t) {
        Eigen::MatrixXd a(2, 2);
        for (Eigen::Index i = 0; i < 4; ++i) a(i) = g.normal();
        const Eigen::MatrixXd m = a.transpose() * a + 0.05 * Eigen::MatrixXd::Identity(2, 2);
        const LearnedMetric base = LearnedMetric::full(m);
        const Eigen::MatrixXd lt = Eigen::LLT<Eigen::MatrixXd>(m).matrixU();  // m = lt^T lt

        SampleMatrix pos(3, 2), neg(2, 2);
        for (Eigen::Index i = 0; i < pos.size(); ++i) pos(i) = g.normal();
        for (Eigen::Index i = 0; i < neg.size(); ++i) neg(i) = g.normal() + 0.5;
        const KdeScorer s = kde_fit(pos, neg, &base, ctx(1.0));

        const SampleMatrix tp = pos * lt.transpose(), tn = neg * lt.transpose();
        const auto P = as_vectors(tp), N = as_vectors(tn);
        const double hp = oracle::median_pairwise(P), hn = oracle::median_pairwise(N);
        for (int k = 0; k < 10; ++k) {
            const auto x = oracle::random_vector(g, 2);
            const Eigen::Vector2d z = lt * Eigen::Vector2d(x[0], x[1]);
            const std::vector<double> zv{z[0], z[1]};
            const double kp = oracle::kernel_mean(P, zv, hp), kn = oracle::kernel_mean(N, zv, hn);
            if (kp + kn < 1e-200) continue;  // both kernels underflow; the score is a convention there
            EXPECT_NEAR(s.score(x), kp / (kp + kn), 1e-6);
        }
    }
}
