#include <gtest/gtest.h>

#include <random>

#include "mxpl/selection.hpp"
#include "mxpl/signal_mixture.hpp"
#include "support/oracles.hpp"

using namespace mxpl;

namespace {

Eigen::VectorXd random_pvalues(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> size(1, 20);
    std::uniform_real_distribution<double> u;
    const int m = size(rng);
    Eigen::VectorXd p(m);
    for (int j = 0; j < m; ++j) {
        const double r = u(rng);
        // A mix of tiny signals, uniform nulls, exact ties and values near 1.
        if (r < 0.3) p[j] = u(rng) * 0.02;
        else if (r < 0.4) p[j] = 0.5;
        else if (r < 0.45) p[j] = 1.0;
        else p[j] = u(rng);
    }
    return p;
}

}  // namespace

TEST(Selection, BhKnownCase) {
    Eigen::VectorXd p(5);
    p << 0.01, 0.04, 0.03, 0.5, 0.2;
    // Sorted: 0.01 0.03 0.04 0.2 0.5; cutoffs at q = 0.1: 0.02 0.04 0.06 0.08 0.1.
    const auto r = bh(p, 0.1);
    EXPECT_EQ(r.selected, (std::vector<int>{0, 1, 2}));
    EXPECT_DOUBLE_EQ(r.threshold, 0.04);
    Eigen::VectorXd none(3);
    none << 0.5, 0.7, 0.9;
    EXPECT_TRUE(bh(none, 0.1).selected.empty());
    EXPECT_LT(bh(none, 0.1).threshold, 0.0);
}

TEST(Selection, AdaptKnownCase) {
    Eigen::VectorXd p = Eigen::VectorXd::Constant(30, 0.001);
    p[29] = 0.9995;
    // At t = 0.001: (1 + 1) / 29 <= 0.1.
    const auto r = adapt(p, 0.1);
    EXPECT_EQ(r.selected.size(), 29u);
    Eigen::VectorXd few = Eigen::VectorXd::Constant(5, 0.001);
    EXPECT_TRUE(adapt(few, 0.1).selected.empty());
}

TEST(Selection, MatchesExhaustiveEnumeration) {
    std::mt19937_64 rng(77);
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::VectorXd p = random_pvalues(rng);
        for (double q : {0.05, 0.1, 0.3}) {
            EXPECT_EQ(bh(p, q).selected, oracle::bh(p, q)) << rep;
            EXPECT_EQ(adapt(p, q).selected, oracle::adapt(p, q)) << rep;
            EXPECT_EQ(adapt(p, q, 0.5, true).selected, oracle::adapt(p, q, 0.5, true)) << rep;
        }
    }
}

TEST(Selection, Validation) {
    Eigen::VectorXd p(2);
    p << 0.1, 1.2;
    EXPECT_THROW(bh(p, 0.1), Error);
    p[1] = 0.2;
    EXPECT_THROW(bh(p, 0.0), Error);
    EXPECT_THROW(adapt(p, 0.1, 0.0), Error);
}

TEST(Selection, Evaluate) {
    Eigen::VectorXd beta(6);
    beta << 0, 4, 0, 4, 4, 0;
    auto [fdp, power] = evaluate({1, 2, 3}, beta);
    EXPECT_DOUBLE_EQ(fdp, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(power, 2.0 / 3.0);
    std::tie(fdp, power) = evaluate({}, beta);
    EXPECT_EQ(fdp, 0.0);
    EXPECT_EQ(power, 0.0);
    EXPECT_THROW(evaluate({7}, beta), Error);
    SelectionResult r;
    r.selected = {4};
    score(r, beta);
    EXPECT_EQ(r.fdp, 0.0);
    EXPECT_DOUBLE_EQ(r.power, 1.0 / 3.0);
}
