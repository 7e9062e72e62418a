#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mxpl/crt.hpp"
#include "mxpl/lasso.hpp"

using namespace mxpl;

namespace {

ModelConfig focal(int n, int p, double h, std::uint64_t replicate = 0) {
    ModelConfig c;
    c.n = n;
    c.p = p;
    c.h = h;
    c.signal = SignalMixture({{0.0, 0.9}, {4.0, 0.1}});
    c.seed = 31;
    c.replicate = replicate;
    return c;
}

// The same data seen with column j of a full design as the focal covariate.
Dataset as_focal(const Dataset& full, Eigen::Index j) {
    Dataset d;
    const Eigen::Index p = full.X.cols();
    d.focal_x = full.X.col(j);
    d.Z.resize(full.X.rows(), p - 1);
    d.Z << full.X.leftCols(j), full.X.rightCols(p - 1 - j);
    d.y = full.y;
    d.labeled_n = static_cast<int>(full.X.rows());
    return d;
}

}  // namespace

TEST(Crt, StatisticsFromDefinitions) {
    const Dataset d = generate(focal(120, 40, 2.0));
    const Eigen::VectorXd x = d.labeled_x();
    const Eigen::MatrixXd Z = d.labeled_z();
    EXPECT_NEAR(stat_mc(x, d.y), x.dot(d.y) / 120.0, 1e-15);
    Eigen::MatrixXd XZ(120, 40);
    XZ << x, Z;
    const Eigen::VectorXd coef = XZ.colPivHouseholderQr().solve(d.y);
    EXPECT_NEAR(stat_ols(x, Z, d.y), std::sqrt(120.0) * coef[0], 1e-10);
    const auto fit = fit_lasso(Z, d.y, 0.5);
    EXPECT_NEAR(stat_distilled(x, Z, d.y, 0.5), (d.y - Z * fit.theta_hat).dot(x) / 120.0, 1e-12);
}

TEST(Crt, GaussianPvalue) {
    EXPECT_NEAR(gaussian_pvalue(1.6448536269514722, 1.0, Sided::one_sided_upper), 0.05, 1e-14);
    EXPECT_NEAR(gaussian_pvalue(-2.0 * 1.959963984540054, 2.0, Sided::two_sided), 0.05, 1e-14);
    EXPECT_EQ(gaussian_pvalue(3.0, 0.0, Sided::two_sided), 1.0);
}

TEST(Crt, OlsNullLawMatchesMonteCarlo) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (int dof : {0, 1, 5, 40}) {
        std::chi_squared_distribution<double> chi(dof > 0 ? dof : 1);
        const double a = 3.0;
        const int m = 400000;
        std::vector<double> draws(m);
        for (int i = 0; i < m; ++i) {
            const double z = g(rng);
            const double c = dof > 0 ? chi(rng) : 0.0;
            draws[i] = a * z / (z * z + c);
        }
        for (double t : {-0.5, 0.05, 0.2, 0.6, 1.2}) {
            double hits = 0;
            for (double v : draws) hits += v >= t;
            EXPECT_NEAR(ols_null_upper_tail(t, a, dof), hits / m, 3e-3) << "dof " << dof << " t " << t;
        }
    }
    EXPECT_THROW(ols_null_upper_tail(0.1, 0.0, 3), Error);
}

// T = a cos(theta) / R with R ~ chi_{dof+1}: average the sphere tail over R.
TEST(Crt, OlsNullLawMatchesRadialIntegral) {
    boost::math::quadrature::tanh_sinh<double> quad;
    for (int dof : {1, 4, 30, 400}) {
        const double k = dof + 1.0;
        for (double a : {2.0, 40.0}) {
            for (double t : {1e-4, 0.01, 0.3, 1.0, 2.5}) {
                const double tt = t * a / std::sqrt(k);
                auto f = [&](double r) {
                    if (r <= 0.0) return 0.0;
                    const double log_density = (k - 1.0) * std::log(r) - 0.5 * r * r -
                                               (0.5 * k - 1.0) * std::log(2.0) - std::lgamma(0.5 * k);
                    return std::exp(log_density) * sphere_null_upper_tail(tt * r, a, dof + 1);
                };
                const double end = std::min(a / tt, std::sqrt(k) + 12.0);
                const double expected = quad.integrate(f, 0.0, end);
                EXPECT_NEAR(ols_null_upper_tail(tt, a, dof), expected, 1e-9 + 1e-7 * expected)
                    << "dof " << dof << " a " << a << " t " << tt;
            }
        }
    }
}

TEST(Crt, SphereNullLawMatchesMonteCarlo) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (int dim : {2, 3, 10, 50}) {
        const int m = 200000;
        std::vector<double> first(m);
        for (int i = 0; i < m; ++i) {
            double s = 0.0, z0 = 0.0;
            for (int k = 0; k < dim; ++k) {
                const double z = g(rng);
                if (k == 0) z0 = z;
                s += z * z;
            }
            first[i] = z0 / std::sqrt(s);
        }
        for (double u : {-0.3, 0.1, 0.4, 0.8}) {
            double hits = 0;
            for (double v : first) hits += 2.0 * v >= 2.0 * u;
            EXPECT_NEAR(sphere_null_upper_tail(2.0 * u, 2.0, dim), hits / m, 3e-3) << dim;
        }
    }
    EXPECT_EQ(sphere_null_upper_tail(3.0, 2.0, 5), 0.0);
}

TEST(Crt, ResamplingAgreesWithExactLaws) {
    const Dataset d = generate(focal(150, 50, 2.0, 4));
    const int M = 4999;
    for (Sided sided : {Sided::one_sided_upper, Sided::two_sided}) {
        const auto mc_a = crt_pvalue_analytic(CrtStatKind::mc(), d, sided);
        const auto mc_r = crt_pvalue_resampling(CrtStatKind::mc(), d, M, sided, 5);
        EXPECT_NEAR(mc_a.value, mc_r.value, 0.02);
        EXPECT_DOUBLE_EQ(mc_a.statistic, mc_r.statistic);
        const auto ols_e = crt_pvalue_ols_exact(d, sided);
        const auto ols_r = crt_pvalue_resampling(CrtStatKind::ols(), d, M, sided, 5);
        EXPECT_NEAR(ols_e.value, ols_r.value, 0.02);
        EXPECT_NEAR(ols_e.statistic, stat_ols(d.labeled_x(), d.labeled_z(), d.y), 1e-10);
        const auto di_a = crt_pvalue_analytic(CrtStatKind::distilled(0.4), d, sided);
        const auto di_r = crt_pvalue_resampling(CrtStatKind::distilled(0.4), d, M, sided, 5);
        EXPECT_NEAR(di_a.value, di_r.value, 0.02);
    }
    EXPECT_THROW(crt_pvalue_analytic(CrtStatKind::ols(), d, Sided::two_sided), Error);
    EXPECT_THROW(crt_pvalue_resampling(CrtStatKind::mc(), d, 10, Sided::two_sided, 1), Error);
    EXPECT_THROW(crt_pvalue_analytic(CrtStatKind::distilled(0.0), d, Sided::two_sided), Error);
}

TEST(Crt, ResamplingIsDeterministicAndOnGrid) {
    const Dataset d = generate(focal(80, 20, 0.0));
    const auto a = crt_pvalue_resampling(CrtStatKind::ols(), d, 99, Sided::two_sided, 8, 3);
    const auto b = crt_pvalue_resampling(CrtStatKind::ols(), d, 99, Sided::two_sided, 8, 3);
    EXPECT_EQ(a.value, b.value);
    const double k = a.value * 100.0;
    EXPECT_NEAR(k, std::round(k), 1e-9);
    EXPECT_GE(a.value, 0.01);
}

TEST(Crt, AllColumnsMatchSingleColumnTests) {
    ModelConfig c;
    c.n = 100;
    c.p = 30;
    c.signal = SignalMixture({{0.0, 0.8}, {3.0, 0.2}});
    c.design = Design::full;
    c.seed = 12;
    const Dataset d = generate(c);
    for (Sided sided : {Sided::one_sided_upper, Sided::two_sided}) {
        const Eigen::VectorXd mc = crt_pvalues_all(CrtStatKind::mc(), d, sided);
        const Eigen::VectorXd ols = crt_pvalues_all(CrtStatKind::ols(), d, sided);
        const Eigen::VectorXd dl = crt_pvalues_all(CrtStatKind::distilled(0.3), d, sided);
        for (Eigen::Index j = 0; j < c.p; j += 3) {
            const Dataset f = as_focal(d, j);
            EXPECT_NEAR(mc[j], crt_pvalue_analytic(CrtStatKind::mc(), f, sided).value, 1e-12);
            EXPECT_NEAR(ols[j], crt_pvalue_ols_exact(f, sided).value, 1e-9);
            EXPECT_NEAR(dl[j], crt_pvalue_analytic(CrtStatKind::distilled(0.3), f, sided).value, 1e-6);
        }
    }
}

TEST(Crt, ConditionalUnlabeledPaths) {
    auto c = focal(40, 30, 0.0);
    c.unlabeled_m = 40;
    const Dataset d = generate(c);
    // The Gram path (n_* >= 2d) and the QR path must agree; drop rows to force the latter.
    const auto known = conditional_crt_unlabeled(d, true, Sided::two_sided);
    Dataset narrow = d;
    narrow.focal_x = d.focal_x->head(55);
    narrow.Z = d.Z.topRows(55);
    const auto qr_path = conditional_crt_unlabeled(narrow, true, Sided::two_sided);
    // Direct oracle: project the zero-padded response and the focal column off span(Z*).
    auto oracle = [](const Dataset& data) {
        const Eigen::Index ns = data.total_rows();
        Eigen::VectorXd v = Eigen::VectorXd::Zero(ns);
        v.head(data.labeled_n) = data.y;
        const Eigen::MatrixXd H = data.Z * (data.Z.transpose() * data.Z).inverse() * data.Z.transpose();
        const Eigen::VectorXd rv = v - H * v;
        const double t = rv.dot(*data.focal_x);
        return std::erfc(std::abs(t) / rv.norm() / std::sqrt(2.0));
    };
    EXPECT_NEAR(known.value, oracle(d), 1e-9);
    EXPECT_NEAR(qr_path.value, oracle(narrow), 1e-9);
    const auto unknown = conditional_crt_unlabeled(d, false, Sided::two_sided, 1999, 3);
    EXPECT_FALSE(unknown.degenerate);
}

TEST(Crt, ConditionalUnlabeledDegenerate) {
    auto c = focal(20, 31, 0.0);
    c.unlabeled_m = 10;
    const Dataset d = generate(c);
    const auto pv = conditional_crt_unlabeled(d, true);
    EXPECT_TRUE(pv.degenerate);
    EXPECT_EQ(pv.value, 1.0);
}

TEST(Crt, ConditionalUnlabeledIsValid) {
    int rejections = 0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
        auto c = focal(30, 16, 0.0, r);
        c.unlabeled_m = 30;
        const Dataset d = generate(c);
        rejections += conditional_crt_unlabeled(d, false, Sided::one_sided_upper, 199, 9, r).value <= 0.1;
    }
    EXPECT_NEAR(rejections / static_cast<double>(reps), 0.1, 3.0 * std::sqrt(0.09 / reps) + 0.01);
}
