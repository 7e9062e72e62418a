#pragma once

#include <utility>

#include "mxpl/model_gen.hpp"
#include "mxpl/signal_mixture.hpp"

namespace mxpl {

/// eta(x; y): soft threshold with dead zone [-y, y].
double soft_threshold(double x, double y);

double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x);
double normal_pdf(double x);
/// Standard normal quantile.
double normal_quantile(double p);

/// The lasso scenario seen by state evolution. `doubled` selects the
/// knockoff-augmented design: 2p columns with coefficient law 1/2 delta_0 + 1/2 signal.
struct AmpProblem {
    double kappa = 0.5;
    double sigma2 = 1.0;
    SignalMixture signal = SignalMixture::point(0.0);
    bool doubled = false;

    void validate() const;
    /// Aspect ratio and coefficient law after the doubling substitution.
    double effective_kappa() const noexcept { return doubled ? 2.0 * kappa : kappa; }
    SignalMixture effective_signal() const { return doubled ? signal.doubled() : signal; }
};

/// E[(eta(B0 + tau W; alpha tau) - B0)^2] for W ~ N(0,1) independent of B0.
double se_mse(double alpha, double tau, const SignalMixture& signal);
/// E[eta'(B0 + tau W; alpha tau)] = P(|B0 + tau W| > alpha tau).
double se_active_fraction(double alpha, double tau, const SignalMixture& signal);

/// Per-unit-variance MSE of the pure-noise threshold, psi(alpha) = 2[(1+a^2)Q(a) - a phi(a)].
double null_threshold_mse(double alpha);

/// tau solving tau^2 = sigma2 + kappa E[(eta(B0 + tau W; alpha tau) - B0)^2].
double state_evolution_tau(double alpha, const AmpProblem& problem);
double state_evolution_tau(double alpha, double kappa, double sigma2, const SignalMixture& signal, bool doubled);

/// lambda = alpha tau (1 - kappa E[eta']) at tau = tau(alpha).
double lambda_of_alpha(double alpha, const AmpProblem& problem);

/// Infimum of alpha with a positive lambda; the valid range is (alpha_min, inf).
double alpha_lower_bound(const AmpProblem& problem);

struct AmpSolution {
    double alpha = 0.0;
    double tau = 0.0;
    double lambda = 0.0;
    bool doubled = false;
    double kappa = 0.0;
    double sigma2 = 0.0;
    SignalMixture signal = SignalMixture::point(0.0);
    /// Relative residuals of the tau and lambda equations.
    double tau_residual = 0.0;
    double lambda_residual = 0.0;
};

AmpSolution make_solution(double alpha, const AmpProblem& problem);
AmpSolution solve_fixed_point(double lambda, const AmpProblem& problem);
AmpSolution solve_fixed_point(double lambda, double kappa, double sigma2, const SignalMixture& signal,
                              bool doubled);

/// Minimizes tau over lambda. For a null signal the infimum sigma is reached as
/// lambda grows; the returned solution then sits at a large alpha.
AmpSolution min_tau_over_lambda(const AmpProblem& problem);

/// tau in the lambda -> infinity limit: sqrt(sigma2 + kappa E[B0^2]).
double tau_large_lambda_limit(const AmpProblem& problem);

/// Empirical ||Y - Z theta_hat||^2 / n and (Y - Z theta_hat)^T (Y - Z theta) / n
/// on the labeled rows of a focal dataset.
std::pair<double, double> empirical_se_check(const Dataset& data, double lambda);

}  // namespace mxpl
