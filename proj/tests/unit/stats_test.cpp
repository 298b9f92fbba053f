#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "oracles.hpp"
#include "refinder/errors.hpp"
#include "refinder/evaluation/stats.hpp"

using namespace refinder;

namespace {

double boost_two_sided(double t, double dof) {
    boost::math::students_t dist(dof);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace

TEST(IncompleteBeta, MatchesBoost) {
    oracle::Gen g(3);
    for (int i = 0; i < 500; ++i) {
        const double a = g.uniform(0.1, 30.0), b = g.uniform(0.1, 30.0), x = g.uniform();
        EXPECT_NEAR(regularized_incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-9) << a << " " << b << " " << x;
    }
}

TEST(IncompleteBeta, Endpoints) {
    EXPECT_EQ(regularized_incomplete_beta(2.0, 3.0, 0.0), 0.0);
    EXPECT_EQ(regularized_incomplete_beta(2.0, 3.0, 1.0), 1.0);
}

TEST(StudentT, TwoSidedMatchesBoost) {
    for (double dof : {1.0, 2.0, 4.0, 9.0, 29.0, 199.0})
        for (double t : {0.0, 0.3, 1.0, 2.2, 4.2426, 10.0, -3.0})
            EXPECT_NEAR(student_t_two_sided_p(t, dof), boost_two_sided(t, dof), 1e-9) << t << " " << dof;
}

TEST(PairedTTest, IdenticalSamples) {
    const std::vector<double> a{0.1, 0.5, 0.7};
    const auto r = paired_t_test(a, a);
    EXPECT_EQ(r.t, 0.0);
    EXPECT_EQ(r.p, 1.0);
}

TEST(PairedTTest, ZeroMeanDifferences) {
    const std::vector<double> a{1, -1, 1, -1}, b{0, 0, 0, 0};
    const auto r = paired_t_test(a, b);
    EXPECT_NEAR(r.t, 0.0, 1e-12);
    EXPECT_NEAR(r.p, 1.0, 1e-12);
}

TEST(PairedTTest, ReferenceValues) {
    const std::vector<double> a{1, 2, 3, 4, 5}, b{0, 0, 0, 0, 0};
    const auto r = paired_t_test(a, b);
    // mean 3, sample sd sqrt(2.5), t = 3 sqrt(5) / sqrt(2.5) = 3 sqrt(2)
    EXPECT_NEAR(r.t, 3.0 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(r.t, 4.2426, 1e-3);
    EXPECT_NEAR(r.p, 0.0132, 1e-3);
    EXPECT_NEAR(r.p, boost_two_sided(r.t, 4.0), 1e-10);
}

TEST(PairedTTest, ConstantNonzeroDifferencesGiveSentinel) {
    const std::vector<double> a{2, 3, 4}, b{1, 2, 3};
    const auto r = paired_t_test(a, b);
    EXPECT_EQ(r.t, std::numeric_limits<double>::infinity());
    EXPECT_EQ(r.p, 0.0);
    const auto s = paired_t_test(b, a);
    EXPECT_EQ(s.t, -std::numeric_limits<double>::infinity());
    EXPECT_EQ(s.p, 0.0);
}

TEST(PairedTTest, InvalidInputsThrow) {
    const std::vector<double> one{1.0}, two{1.0, 2.0};
    EXPECT_THROW(paired_t_test(one, one), ParameterError);
    EXPECT_THROW(paired_t_test(one, two), ParameterError);
}

TEST(PairedTTest, RandomSamplesMatchDirectFormula) {
    oracle::Gen g(17);
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 2 + g.index(40);
        std::vector<double> a(n), b(n);
        for (std::size_t j = 0; j < n; ++j) {
            a[j] = g.normal() + 0.3;
            b[j] = g.normal();
        }
        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) mean += a[j] - b[j];
        mean /= n;
        double ss = 0.0;
        for (std::size_t j = 0; j < n; ++j) ss += (a[j] - b[j] - mean) * (a[j] - b[j] - mean);
        const double sd = std::sqrt(ss / (n - 1));
        const double t = mean * std::sqrt(double(n)) / sd;
        const auto r = paired_t_test(a, b);
        EXPECT_NEAR(r.t, t, 1e-9 * std::max(1.0, std::abs(t)));
        EXPECT_NEAR(r.p, boost_two_sided(t, n - 1.0), 1e-9);
    }
}

TEST(PairedTTest, SymmetricInArguments) {
    const std::vector<double> a{0.3, 0.5, 0.4, 0.9}, b{0.1, 0.6, 0.2, 0.4};
    const auto ab = paired_t_test(a, b), ba = paired_t_test(b, a);
    EXPECT_DOUBLE_EQ(ab.t, -ba.t);
    EXPECT_DOUBLE_EQ(ab.p, ba.p);
}
