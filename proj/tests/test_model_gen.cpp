#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mxpl/model_gen.hpp"
#include "mxpl/rng.hpp"

using namespace mxpl;

namespace {

ModelConfig focal_config() {
    ModelConfig c;
    c.n = 300;
    c.p = 120;
    c.sigma2 = 1.5;
    c.h = 2.0;
    c.signal = SignalMixture({{0.0, 0.9}, {4.0, 0.1}});
    c.seed = 17;
    c.replicate = 2;
    return c;
}

}  // namespace

TEST(ModelGen, FocalResponseFromStreams) {
    const auto c = focal_config();
    const Dataset d = generate(c);
    ASSERT_TRUE(d.is_focal());
    ASSERT_EQ(d.Z.rows(), c.n);
    ASSERT_EQ(d.Z.cols(), c.p - 1);
    EXPECT_EQ(d.beta_truth[0], c.h);
    const NormalField field(c.seed, c.replicate, Purpose::design);
    const double rn = std::sqrt(static_cast<double>(c.n));
    for (int i = 0; i < c.n; i += 37) {
        double yi = c.h / rn * field(i, 0) + std::sqrt(c.sigma2) * field(i, c.p);
        for (int j = 1; j < c.p; ++j) yi += d.beta_truth[j] / rn * field(i, j);
        EXPECT_NEAR(d.y[i], yi, 1e-12);
        EXPECT_EQ((*d.focal_x)[i], field(i, 0));
    }
    for (int j = 1; j < c.p; ++j) EXPECT_TRUE(d.beta_truth[j] == 0.0 || d.beta_truth[j] == 4.0);
}

TEST(ModelGen, Deterministic) {
    const auto c = focal_config();
    std::ostringstream a, b;
    write_dataset_csv(generate(c), a);
    write_dataset_csv(generate(c), b);
    EXPECT_EQ(a.str(), b.str());
    auto c2 = c;
    c2.replicate = 3;
    EXPECT_NE(generate(c2).y[0], generate(c).y[0]);
}

TEST(ModelGen, FullDesignVariance) {
    ModelConfig c;
    c.n = 4000;
    c.p = 100;
    c.sigma2 = 1.0;
    c.signal = SignalMixture({{0.0, 0.5}, {2.0, 0.5}});
    c.design = Design::full;
    c.seed = 5;
    const Dataset d = generate(c);
    ASSERT_FALSE(d.is_focal());
    ASSERT_EQ(d.X.cols(), c.p);
    const double realized = c.sigma2 + d.beta_truth.squaredNorm() / c.n;
    EXPECT_NEAR(d.y.squaredNorm() / c.n, realized, 4.0 * realized * std::sqrt(2.0 / c.n));
}

TEST(ModelGen, UnlabeledRowsExtendTheLabeledData) {
    auto c = focal_config();
    const Dataset base = generate(c);
    c.unlabeled_m = 200;
    const Dataset ext = generate_with_unlabeled(c);
    EXPECT_EQ(ext.labeled_n, c.n);
    EXPECT_EQ(ext.total_rows(), c.n + 200);
    EXPECT_EQ(ext.y.size(), c.n);
    EXPECT_TRUE(ext.labeled_z().isApprox(base.Z, 0.0));
    EXPECT_TRUE(ext.y.isApprox(base.y, 0.0));
    c.unlabeled_m = 0;
    EXPECT_THROW(generate_with_unlabeled(c), Error);
}

TEST(ModelGen, RetrospectiveZeroThresholdMatchesFocal) {
    auto c = focal_config();
    const Dataset base = generate(c);
    c.screen_threshold = 0.0;
    const Dataset r = generate(c);
    EXPECT_EQ(r.raw_draws, c.n);
    EXPECT_LT((r.y - base.y).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(r.Z.isApprox(base.Z, 0.0));
}

TEST(ModelGen, RetrospectiveScreensRows) {
    auto c = focal_config();
    const double C = 1.2;
    c.screen_threshold = C;
    const Dataset r = generate(c);
    for (int i = 0; i < c.n; ++i) EXPECT_GT(std::abs(r.y[i]), C);
    // Acceptance rate against P(|N(0, s^2)| > C) with the realized variance.
    const double s2 = c.sigma2 + (r.beta_truth.squaredNorm()) / c.n;
    const double rate = std::erfc(C / std::sqrt(2.0 * s2));
    const double observed = static_cast<double>(c.n) / r.raw_draws;
    EXPECT_NEAR(observed, rate, 0.06);
}

TEST(ModelGen, RetrospectiveGuard) {
    auto c = focal_config();
    c.screen_threshold = 1e6;
    c.max_raw_draws_factor = 2.0;
    EXPECT_THROW(generate(c), Error);
}

TEST(ModelGen, Validation) {
    auto c = focal_config();
    c.sigma2 = 0.0;
    EXPECT_THROW(generate(c), Error);
    c = focal_config();
    c.n = 0;
    EXPECT_THROW(generate(c), Error);
    c = focal_config();
    c.screen_threshold = -1.0;
    EXPECT_THROW(generate(c), Error);
    c = focal_config();
    c.n = 100000;
    c.p = 100000;
    EXPECT_THROW(generate(c), Error);
}
