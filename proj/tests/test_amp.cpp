#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>
#include <algorithm>

#include "mxpl/amp.hpp"
#include "mxpl/model_gen.hpp"

using namespace mxpl;

namespace {

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// Composite Simpson rule in W over [-12, 12] for E[g(W)], with the range
// split at the kinks of g so each piece is smooth.
template <class F>
double gauss_expect(F f, std::vector<double> cuts = {}) {
    cuts.push_back(-12.0);
    cuts.push_back(12.0);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = std::max(cuts[k], -12.0), b = std::min(cuts[k + 1], 12.0);
        if (!(b > a)) continue;
        const int m = 4000;
        const double h = (b - a) / m;
        double s = 0.0;
        for (int i = 0; i <= m; ++i) {
            // Nudge the ends inward so one-sided limits are used at the cuts.
            const double w = std::clamp(a + i * h, a + 1e-13, b - 1e-13);
            const double c = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            s += c * f(w) * phi(w);
        }
        total += s * h / 3.0;
    }
    return total;
}

std::vector<double> kinks(double b, double alpha, double tau) {
    return {(alpha * tau - b) / tau, (-alpha * tau - b) / tau};
}

double mse_oracle(double alpha, double tau, const SignalMixture& s) {
    double total = 0.0;
    for (const auto& atom : s.atoms()) {
        const double b = atom.value;
        total += atom.weight * gauss_expect(
                                   [&](double w) {
                                       const double e = soft_threshold(b + tau * w, alpha * tau) - b;
                                       return e * e;
                                   },
                                   kinks(b, alpha, tau));
    }
    return total;
}

double active_oracle(double alpha, double tau, const SignalMixture& s) {
    double total = 0.0;
    for (const auto& atom : s.atoms())
        total += atom.weight * gauss_expect([&](double w) { return std::abs(atom.value + tau * w) > alpha * tau; },
                                            kinks(atom.value, alpha, tau));
    return total;
}

const SignalMixture kSignal({{0.0, 0.9}, {4.0, 0.1}});

}  // namespace

TEST(Amp, SoftThresholdAndNormal) {
    EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
    EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
    EXPECT_EQ(soft_threshold(0.5, 1.0), 0.0);
    EXPECT_NEAR(normal_cdf(1.6448536269514722), 0.95, 1e-15);
    EXPECT_NEAR(normal_sf(10.0), 7.619853024160527e-24, 1e-36);
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-13);
    EXPECT_NEAR(normal_pdf(0.3), phi(0.3), 1e-16);
}

TEST(Amp, ClosedFormsMatchQuadrature) {
    const SignalMixture mix({{0.0, 0.7}, {2.5, 0.2}, {-1.0, 0.1}});
    for (double alpha : {0.3, 1.0, 2.2})
        for (double tau : {0.7, 1.4, 3.0}) {
            EXPECT_NEAR(se_mse(alpha, tau, mix), mse_oracle(alpha, tau, mix), 1e-9);
            EXPECT_NEAR(se_active_fraction(alpha, tau, mix), active_oracle(alpha, tau, mix), 1e-6);
        }
    for (double alpha : {0.0, 0.5, 1.5, 3.0})
        EXPECT_NEAR(null_threshold_mse(alpha), mse_oracle(alpha, 1.0, SignalMixture::point(0.0)), 1e-9);
}

TEST(Amp, FixedPointEquations) {
    for (bool doubled : {false, true})
        for (double kappa : {0.4, 1.0, 2.0}) {
            const AmpProblem pr{kappa, 1.0, kSignal, doubled};
            const SignalMixture eff = doubled ? kSignal.doubled() : kSignal;
            const double k = doubled ? 2.0 * kappa : kappa;
            for (double lambda : {0.2, 1.0, 3.0}) {
                const AmpSolution sol = solve_fixed_point(lambda, pr);
                const double t2 = 1.0 + k * mse_oracle(sol.alpha, sol.tau, eff);
                EXPECT_NEAR(sol.tau * sol.tau, t2, 1e-7 * t2);
                const double lam = sol.alpha * sol.tau * (1.0 - k * active_oracle(sol.alpha, sol.tau, eff));
                EXPECT_NEAR(lam, lambda, 1e-5 * lambda);
            }
        }
}

TEST(Amp, TauLimitsAndMinimum) {
    const AmpProblem pr{0.4, 1.0, kSignal, false};
    EXPECT_NEAR(tau_large_lambda_limit(pr), std::sqrt(1.0 + 0.4 * 1.6), 1e-15);
    EXPECT_NEAR(solve_fixed_point(40.0, pr).tau, std::sqrt(1.64), 1e-6);
    const AmpSolution best = min_tau_over_lambda(pr);
    for (double lambda : {0.05, 0.3, 0.6, 1.0, 2.0, 5.0}) EXPECT_LE(best.tau, solve_fixed_point(lambda, pr).tau + 1e-9);
    EXPECT_LT(best.tau, tau_large_lambda_limit(pr));
}

TEST(Amp, ExistenceBoundary) {
    // Above kappa = 1 small thresholds have no fixed point.
    const AmpProblem pr{2.0, 1.0, kSignal, false};
    const double a0 = alpha_lower_bound(pr);
    EXPECT_GT(a0, 0.0);
    EXPECT_THROW(state_evolution_tau(0.5 * a0, pr), Error);
    EXPECT_NO_THROW(state_evolution_tau(a0 + 0.1, pr));
    const AmpProblem low{0.5, 1.0, kSignal, false};
    EXPECT_EQ(alpha_lower_bound(low), 0.0);
}

TEST(Amp, EmpiricalLassoMatchesStateEvolution) {
    ModelConfig c;
    c.n = 2000;
    c.p = 801;
    c.h = 0.0;
    c.signal = kSignal;
    c.seed = 99;
    const Dataset d = generate(c);
    const double lambda = 0.8;
    const AmpSolution sol = solve_fixed_point(lambda, 0.4, 1.0, kSignal, false);
    const auto [rss, cross] = empirical_se_check(d, lambda);
    const double eta_prime = se_active_fraction(sol.alpha, sol.tau, kSignal);
    EXPECT_NEAR(rss, std::pow(lambda / sol.alpha, 2), 0.06 * rss);
    EXPECT_NEAR(cross, 1.0 - 0.4 * eta_prime, 0.06);
}
