#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mxpl/knockoff.hpp"
#include "mxpl/lasso.hpp"
#include "mxpl/model_gen.hpp"
#include "mxpl/selection.hpp"
#include "support/oracles.hpp"

using namespace mxpl;

namespace {

Dataset full_data(int n, int p, std::uint64_t seed) {
    ModelConfig c;
    c.n = n;
    c.p = p;
    c.signal = SignalMixture({{0.0, 0.8}, {5.0, 0.2}});
    c.design = Design::full;
    c.seed = seed;
    return generate(c);
}

}  // namespace

TEST(Knockoff, Antisymmetry) {
    EXPECT_EQ(antisym_apply(Antisym::difference, 3.0, -1.0), 4.0);
    EXPECT_EQ(antisym_apply(Antisym::abs_difference, 3.0, -4.0), -1.0);
    for (double x : {-2.0, 0.5})
        for (double y : {1.0, -3.0})
            for (Antisym f : {Antisym::difference, Antisym::abs_difference})
                EXPECT_EQ(antisym_apply(f, x, y), -antisym_apply(f, y, x));
    EXPECT_EQ(to_string(Antisym::difference), "diff");
    EXPECT_EQ(to_string(Antisym::abs_difference), "absdiff");
}

TEST(Knockoff, IidSamplesAreReproducible) {
    const Eigen::MatrixXd a = sample_knockoffs_iid(50, 10, 3, 1);
    const Eigen::MatrixXd b = sample_knockoffs_iid(50, 10, 3, 1);
    const Eigen::MatrixXd c = sample_knockoffs_iid(50, 10, 3, 2);
    EXPECT_TRUE(a.isApprox(b, 0.0));
    EXPECT_FALSE(a.isApprox(c, 1e-3));
    EXPECT_NEAR(a.squaredNorm() / 500.0, 1.0, 0.2);
}

TEST(Knockoff, StatisticsFromDefinitions) {
    const Dataset d = full_data(120, 20, 4);
    const Eigen::MatrixXd Xt = sample_knockoffs_iid(d.X, 4);
    const double rn = std::sqrt(120.0);
    const WVector mc = w_statistics(d.X, Xt, d.y, KnockoffStat::mc, Antisym::difference);
    for (int j = 0; j < 20; ++j) EXPECT_NEAR(mc.w[j], (d.X.col(j) - Xt.col(j)).dot(d.y) / rn, 1e-12);

    Eigen::MatrixXd aug(120, 40);
    aug << d.X, Xt;
    const Eigen::VectorXd ls = (aug.transpose() * aug).ldlt().solve(aug.transpose() * d.y);
    const WVector ols = w_statistics(d.X, Xt, d.y, KnockoffStat::ols, Antisym::abs_difference);
    for (int j = 0; j < 20; ++j) EXPECT_NEAR(ols.w[j], rn * (std::abs(ls[j]) - std::abs(ls[20 + j])), 1e-8);

    const auto fit = fit_lasso(aug, d.y, 0.3);
    const WVector las = w_statistics(d.X, Xt, d.y, KnockoffStat::lasso, Antisym::abs_difference, 0.3);
    for (int j = 0; j < 20; ++j)
        EXPECT_NEAR(las.w[j], rn * (std::abs(fit.theta_hat[j]) - std::abs(fit.theta_hat[20 + j])), 1e-9);

    EXPECT_THROW(w_statistics(d.X.topRows(30), Xt.topRows(30), d.y.head(30), KnockoffStat::ols, Antisym::difference),
                 Error);
    EXPECT_THROW(w_statistics(d.X, Xt, d.y, KnockoffStat::lasso, Antisym::difference, 0.0), Error);
}

TEST(Knockoff, ThresholdKnownCase) {
    Eigen::VectorXd w(12);
    w << 5, 4, 3.5, 3, 2.5, 2, 1.5, 1.2, 1.1, -1, 0, -0.5;
    // At w = 1: (1 + 1) / 9 > 0.2; at w = 1.1: 1 / 9 <= 0.2.
    const auto s = knockoff_threshold(w, 0.2);
    EXPECT_DOUBLE_EQ(s.w_hat, 1.1);
    EXPECT_EQ(s.selected.size(), 9u);
    Eigen::VectorXd none(3);
    none << 1, -1, 0;
    EXPECT_TRUE(knockoff_threshold(none, 0.1).selected.empty());
    EXPECT_TRUE(std::isinf(knockoff_threshold(none, 0.1).w_hat));
}

TEST(Knockoff, ThresholdMatchesExhaustiveEnumeration) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> size(1, 20);
    std::normal_distribution<double> g;
    std::uniform_int_distribution<int> grid(-6, 12);
    for (int rep = 0; rep < 100; ++rep) {
        const int m = size(rng);
        Eigen::VectorXd w(m);
        for (int j = 0; j < m; ++j) w[j] = rep % 2 ? g(rng) + 1.5 : static_cast<double>(grid(rng));
        for (double q : {0.1, 0.2, 0.5}) EXPECT_EQ(knockoff_threshold(w, q).selected, oracle::knockoff(w, q)) << rep;
    }
}

TEST(Knockoff, EqualsAdaptOnSymmetricPvalues) {
    // p_j = 1 - F(W_j) with F uniform on [-64, 64]; integer W keep every value exact.
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> grid(-20, 40);
    for (int rep = 0; rep < 200; ++rep) {
        Eigen::VectorXd w(25);
        for (int j = 0; j < 25; ++j) w[j] = grid(rng);
        const Eigen::VectorXd p = (0.5 - w.array() / 128.0).matrix();
        for (double q : {0.1, 0.3})
            EXPECT_EQ(knockoff_threshold(w, q).selected, adapt(p, q, 0.5, true).selected) << rep;
    }
}
