#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mxpl/amp.hpp"
#include "mxpl/crt.hpp"
#include "mxpl/knockoff.hpp"
#include "mxpl/signal_mixture.hpp"

namespace mxpl {

enum class Procedure { bh, adapt };

/// Power of a level-alpha z-test whose statistic is asymptotically N(mu, 1).
double ztest_power(double mu, double alpha_level, Sided sided);

/// Scale that turns a sqrt(n)-scale coefficient into a standardized effect
/// for each CRT statistic: sqrt(sigma2 + kappa E[B0^2]), sigma / sqrt(1 - kappa), tau.
/// This single function feeds both single-test effect sizes and effective mixtures.
double crt_effect_denominator(StatKind kind, double kappa, double sigma2, const SignalMixture& signal,
                              double tau = 0.0);

double effect_size_mc(double h, double kappa, double sigma2, const SignalMixture& signal);
double effect_size_ols(double h, double kappa, double sigma2);
double effect_size_distilled(double h, const AmpSolution& amp);

struct UnlabeledEffect {
    double lower = 0.0;
    double upper = 0.0;
    /// Reference curve only; never asserted.
    double conjectured = 0.0;
    /// True when the upper bound's max(0, .) clips.
    bool upper_clipped = false;
};

/// kappa = p / n, kappa_star = n / n_*, v_z2 = kappa E[B0^2].
UnlabeledEffect effect_size_unlabeled(double h, double kappa, double kappa_star, double sigma2, double v_z2);

/// Root second moment of Y ~ N(0, sigma2 + v_z2) conditioned on |Y| > C.
double m_retro(double C, double sigma2, double v_z2);
double effect_size_retro(double h, double C, double sigma2, double v_z2);

/// Law of the standardized non-null effects B0 / denominator (zero atoms removed).
SignalMixture effective_pi_mu(StatKind kind, double kappa, double sigma2, const SignalMixture& signal,
                              double tau = 0.0);

enum class LimitCase { interior, boundary, zero_power };
std::string to_string(LimitCase c);

struct LimitResult {
    double threshold = 0.0;
    double fdp_limit = 0.0;
    double power_limit = 0.0;
    LimitCase case_tag = LimitCase::zero_power;
};

/// Normal-means limit of BH / AdaPT: nulls are uniform p-values, non-nulls
/// follow the effect mixture pi_mu with proportion 1 - gamma.
class NormalMeansLimit {
public:
    NormalMeansLimit(SignalMixture pi_mu, double gamma, Sided sided);

    /// CDF of a non-null p-value.
    double G(double t) const;
    double g_bh(double t) const;
    double g_adapt(double t) const;
    double fdp(double t) const;

    /// t* = max{t in (0, domain_end]: g(t) <= q}.
    LimitResult solve(Procedure procedure, double q, double domain_end = 1.0) const;

private:
    SignalMixture pi_mu_;
    double gamma_;
    Sided sided_;
};

LimitResult limit_bh_adapt(const SignalMixture& pi_mu, double gamma, double q, Sided sided, Procedure procedure,
                           double domain_end = 1.0);

/// W = f(eta(mu + Z1; a), eta(Z2; a)) in standardized units. MC and OLS use a = 0.
/// P(W <= w) for a single location mu, by one-dimensional quadrature.
double w_cdf(double mu, double a, Antisym f, double w);
/// P(W = 0), the point mass created by the dead zone.
double w_zero_mass(double mu, double a);

class KnockoffLimit {
public:
    /// mu1: law of standardized non-null effects; a: standardized threshold.
    KnockoffLimit(SignalMixture mu1, double a, Antisym f, double gamma);

    double G0(double w) const;
    double G1(double w) const;
    /// g(w); at w = 0 this is the right limit P(W < 0) / P(W > 0).
    double g(double w) const;

    LimitResult solve(double q) const;

private:
    double mass_below(const SignalMixture& mix, double w, bool strict) const;
    SignalMixture mu1_;
    double a_;
    Antisym f_;
    double gamma_;
};

/// Knockoff scenario inputs: standardized effects and threshold for each statistic.
struct KnockoffScenario {
    KnockoffStat stat = KnockoffStat::mc;
    Antisym f = Antisym::abs_difference;
    double kappa = 0.4;
    double sigma2 = 1.0;
    /// Full coefficient law gamma delta_0 + (1 - gamma) pi_1.
    SignalMixture signal = SignalMixture::point(0.0);
    /// Extra factor on the effects (sqrt(2) for the doubled-signal reference curve).
    double signal_scale = 1.0;
};

/// Standardized mixture and threshold (mu1, a) for a knockoff scenario. Lasso
/// uses the doubled state evolution at the tau-minimizing lambda unless amp is given.
std::pair<SignalMixture, double> knockoff_effects(const KnockoffScenario& scenario,
                                                  const AmpSolution* amp = nullptr);

LimitResult limit_knockoff(const KnockoffScenario& scenario, double q, const AmpSolution* amp = nullptr);

struct TheoryRow {
    std::string scenario_id;
    double param = 0.0;
    double value = 0.0;
    std::string flag;
};

/// CSV with header scenario_id,param,value,flag.
void write_theory_csv(const std::vector<TheoryRow>& rows, std::ostream& out);

}  // namespace mxpl
