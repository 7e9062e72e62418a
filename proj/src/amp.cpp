#include "mxpl/amp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "mxpl/lasso.hpp"

namespace mxpl {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Q-dependent pieces of E[(eta(beta + W; alpha) - beta)^2] for one tail.
double tail_piece(double a, double alpha) {
    return (1.0 + alpha * alpha) * normal_sf(a) + (a - 2.0 * alpha) * normal_pdf(a);
}

// Per-unit-variance MSE for one atom at standardized location beta.
double atom_mse(double alpha, double beta) {
    const double dead = normal_cdf(alpha - beta) - normal_cdf(-alpha - beta);
    return tail_piece(alpha - beta, alpha) + tail_piece(alpha + beta, alpha) + beta * beta * std::max(dead, 0.0);
}

double unit_mse(double alpha, double tau, const SignalMixture& signal) {
    double m = 0.0;
    for (const auto& a : signal.atoms()) m += a.weight * atom_mse(alpha, a.value / tau);
    return m;
}

}  // namespace

double soft_threshold(double x, double y) {
    if (!(y >= 0.0)) throw Error("soft threshold level must be >= 0");
    if (x > y) return x - y;
    if (x < -y) return x + y;
    return 0.0;
}

double normal_cdf(double x) { return 0.5 * boost::math::erfc(-x * kInvSqrt2); }
double normal_sf(double x) { return 0.5 * boost::math::erfc(x * kInvSqrt2); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw Error("normal quantile needs p in [0, 1]");
    }
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

void AmpProblem::validate() const {
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw Error("kappa must be finite and >= 0");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw Error("sigma2 must be positive");
}

double se_mse(double alpha, double tau, const SignalMixture& signal) {
    if (!(alpha >= 0.0) || !(tau > 0.0)) throw Error("se_mse needs alpha >= 0 and tau > 0");
    return tau * tau * unit_mse(alpha, tau, signal);
}

double se_active_fraction(double alpha, double tau, const SignalMixture& signal) {
    if (!(alpha >= 0.0) || !(tau > 0.0)) throw Error("se_active_fraction needs alpha >= 0 and tau > 0");
    double e = 0.0;
    for (const auto& a : signal.atoms()) {
        const double beta = a.value / tau;
        e += a.weight * (normal_sf(alpha - beta) + normal_cdf(-alpha - beta));
    }
    return e;
}

double null_threshold_mse(double alpha) {
    return 2.0 * ((1.0 + alpha * alpha) * normal_sf(alpha) - alpha * normal_pdf(alpha));
}

double state_evolution_tau(double alpha, const AmpProblem& problem) {
    problem.validate();
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("alpha must be finite and >= 0");
    const double kap = problem.effective_kappa();
    const SignalMixture signal = problem.effective_signal();
    const double s2 = problem.sigma2;
    if (kap == 0.0) return std::sqrt(s2);
    if (kap * null_threshold_mse(alpha) >= 1.0) throw Error("no state evolution fixed point: alpha too small");

    auto F = [&](double s) { return s2 + kap * s * unit_mse(alpha, std::sqrt(s), signal); };

    double s = s2 + kap * signal.second_moment();
    for (int it = 0; it < 10000; ++it) {
        const double next = 0.5 * s + 0.5 * F(s);
        if (!std::isfinite(next)) break;
        if (std::abs(next - s) <= 1e-13 * s) {
            if (std::abs(F(next) - next) <= 1e-10 * next) return std::sqrt(next);
            break;
        }
        s = next;
    }

    // Fallback: bracketed root of F(s) - s on [sigma2, hi].
    auto h = [&](double v) { return F(v) - v; };
    double lo = s2;
    double hi = 2.0 * (s2 + kap * signal.second_moment());
    double h_hi = h(hi);
    while (h_hi > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi) || hi > 1e300) throw Error("state evolution tau diverges");
        h_hi = h(hi);
    }
    const double h_lo = h(lo);
    if (h_lo <= 0.0) return std::sqrt(lo);
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(h, lo, hi, h_lo, h_hi,
                                                     boost::math::tools::eps_tolerance<double>(52), iters);
    if (iters >= 200) throw Error("state evolution tau did not converge");
    return std::sqrt(0.5 * (r.first + r.second));
}

double state_evolution_tau(double alpha, double kappa, double sigma2, const SignalMixture& signal, bool doubled) {
    return state_evolution_tau(alpha, AmpProblem{kappa, sigma2, signal, doubled});
}

double lambda_of_alpha(double alpha, const AmpProblem& problem) {
    const double tau = state_evolution_tau(alpha, problem);
    return alpha * tau *
           (1.0 - problem.effective_kappa() * se_active_fraction(alpha, tau, problem.effective_signal()));
}

double alpha_lower_bound(const AmpProblem& problem) {
    problem.validate();
    const double kap = problem.effective_kappa();
    if (kap <= 1.0) return 0.0;
    // Existence boundary: kappa psi(alpha) = 1, psi decreasing from 1 at 0.
    double lo = 0.0;
    double hi = 1.0;
    while (kap * null_threshold_mse(hi) >= 1.0) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (kap * null_threshold_mse(mid) >= 1.0 ? lo : hi) = mid;
    }
    const double exist = hi;
    // lambda changes sign once on (exist, inf); the sign is that of 1 - kappa E[eta'].
    const SignalMixture signal = problem.effective_signal();
    auto slack = [&](double a) {
        const double tau = state_evolution_tau(a, problem);
        return 1.0 - kap * se_active_fraction(a, tau, signal);
    };
    lo = exist;
    hi = exist + 1.0;
    while (slack(hi) <= 0.0) {
        lo = hi;
        hi += 1.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        double v = -1.0;
        try {
            v = slack(mid);
        } catch (const Error&) {
            v = -1.0;
        }
        (v <= 0.0 ? lo : hi) = mid;
    }
    return hi;
}

AmpSolution make_solution(double alpha, const AmpProblem& problem) {
    AmpSolution sol;
    sol.alpha = alpha;
    sol.tau = state_evolution_tau(alpha, problem);
    const double kap = problem.effective_kappa();
    const SignalMixture signal = problem.effective_signal();
    sol.lambda = alpha * sol.tau * (1.0 - kap * se_active_fraction(alpha, sol.tau, signal));
    sol.doubled = problem.doubled;
    sol.kappa = problem.kappa;
    sol.sigma2 = problem.sigma2;
    sol.signal = problem.signal;
    const double t2 = sol.tau * sol.tau;
    sol.tau_residual = std::abs(problem.sigma2 + kap * se_mse(alpha, sol.tau, signal) - t2) / t2;
    return sol;
}

AmpSolution solve_fixed_point(double lambda, const AmpProblem& problem) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error("lambda must be positive and finite");
    const double a0 = alpha_lower_bound(problem);
    auto f = [&](double a) { return lambda_of_alpha(a, problem) - lambda; };
    double lo = a0;
    double hi = std::max(1.0, 2.0 * a0);
    double f_hi = f(hi);
    while (f_hi < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw Error("lambda outside the achievable range");
        f_hi = f(hi);
    }
    double f_lo = lo == a0 ? -lambda : f(lo);
    double alpha = hi;
    if (f_hi != 0.0) {
        std::uintmax_t iters = 300;
        const auto r = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                                         boost::math::tools::eps_tolerance<double>(50), iters);
        alpha = 0.5 * (r.first + r.second);
    }
    AmpSolution sol = make_solution(alpha, problem);
    sol.lambda_residual = std::abs(sol.lambda - lambda) / lambda;
    return sol;
}

AmpSolution solve_fixed_point(double lambda, double kappa, double sigma2, const SignalMixture& signal,
                              bool doubled) {
    return solve_fixed_point(lambda, AmpProblem{kappa, sigma2, signal, doubled});
}

AmpSolution min_tau_over_lambda(const AmpProblem& problem) {
    const double a0 = alpha_lower_bound(problem);
    auto tau_at = [&](double a) {
        try {
            return state_evolution_tau(a, problem);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    std::vector<double> grid;
    for (double step = 1e-3; step < 60.0; step *= 1.08) grid.push_back(a0 + step);
    std::size_t best = 0;
    std::vector<double> taus(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        taus[i] = tau_at(grid[i]);
        if (taus[i] < taus[best]) best = i;
    }
    double alpha = grid[best];
    if (best + 1 < grid.size()) {
        const double lo = best == 0 ? a0 : grid[best - 1];
        const double hi = grid[best + 1];
        std::uintmax_t iters = 200;
        const auto r = boost::math::tools::brent_find_minima(tau_at, lo, hi, 52, iters);
        if (r.second <= taus[best]) alpha = r.first;
    }
    AmpSolution sol = make_solution(alpha, problem);
    return sol;
}

double tau_large_lambda_limit(const AmpProblem& problem) {
    problem.validate();
    return std::sqrt(problem.sigma2 + problem.effective_kappa() * problem.effective_signal().second_moment());
}

std::pair<double, double> empirical_se_check(const Dataset& data, double lambda) {
    if (!data.is_focal()) throw Error("empirical_se_check needs a focal dataset");
    const int n = data.labeled_n;
    const Eigen::MatrixXd Z = data.labeled_z();
    const LassoFit fit = fit_lasso(Z, data.y, lambda);
    const Eigen::VectorXd resid = data.y - Z * fit.theta_hat;
    const Eigen::VectorXd theta = data.beta_truth.tail(Z.cols()) / std::sqrt(static_cast<double>(n));
    const Eigen::VectorXd noise = data.y - Z * theta;
    return {resid.squaredNorm() / n, resid.dot(noise) / n};
}

}  // namespace mxpl
