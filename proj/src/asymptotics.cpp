#include "mxpl/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mxpl {

namespace {

constexpr int kGrid = 10000;
constexpr int kKnockoffGrid = 1500;
constexpr int kBisect = 60;
constexpr double kTailRange = 12.0;

template <class F>
double integrate(F f, double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 12, 1e-12);
}

// Integral over [lo, hi] split at an interior point where the integrand jumps.
template <class F>
double integrate_split(F f, double lo, double hi, double split) {
    if (split > lo && split < hi) return integrate(f, lo, split) + integrate(f, split, hi);
    return integrate(f, lo, hi);
}

double dead_zone_mass(double mu, double a) { return normal_cdf(a - mu) - normal_cdf(-a - mu); }

// P(eta(mu + Z; a) <= x).
double eta_cdf(double mu, double a, double x) { return x < 0.0 ? normal_cdf(x - a - mu) : normal_cdf(x + a - mu); }

// P(|eta(mu + Z; a)| <= s).
double abs_eta_cdf(double mu, double a, double s) {
    if (s < 0.0) return 0.0;
    return normal_cdf(s + a - mu) - normal_cdf(-s - a - mu);
}

}  // namespace

double ztest_power(double mu, double alpha_level, Sided sided) {
    if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw Error("test level must lie in (0, 1)");
    if (sided == Sided::one_sided_upper) return normal_cdf(mu + normal_quantile(alpha_level));
    const double z = -normal_quantile(0.5 * alpha_level);
    return normal_cdf(mu - z) + normal_cdf(-mu - z);
}

double crt_effect_denominator(StatKind kind, double kappa, double sigma2, const SignalMixture& signal, double tau) {
    if (!(sigma2 > 0.0)) throw Error("sigma2 must be positive");
    if (!(kappa >= 0.0)) throw Error("kappa must be >= 0");
    switch (kind) {
        case StatKind::marginal_covariance: return std::sqrt(sigma2 + kappa * signal.second_moment());
        case StatKind::ols:
            if (!(kappa < 1.0)) throw Error("the OLS statistic needs kappa < 1");
            return std::sqrt(sigma2 / (1.0 - kappa));
        case StatKind::distilled_lasso:
            if (!(tau > 0.0)) throw Error("the distilled effect needs tau > 0");
            return tau;
    }
    throw Error("unknown statistic kind");
}

double effect_size_mc(double h, double kappa, double sigma2, const SignalMixture& signal) {
    return h / crt_effect_denominator(StatKind::marginal_covariance, kappa, sigma2, signal);
}

double effect_size_ols(double h, double kappa, double sigma2) {
    return h / crt_effect_denominator(StatKind::ols, kappa, sigma2, SignalMixture::point(0.0));
}

double effect_size_distilled(double h, const AmpSolution& amp) {
    return h / crt_effect_denominator(StatKind::distilled_lasso, amp.kappa, amp.sigma2, amp.signal, amp.tau);
}

UnlabeledEffect effect_size_unlabeled(double h, double kappa, double kappa_star, double sigma2, double v_z2) {
    const double kk = kappa * kappa_star;
    if (!(kappa > 0.0) || !(kappa_star > 0.0 && kappa_star <= 1.0)) throw Error("invalid kappa or kappa_star");
    if (!(kk < 1.0)) throw Error("unlabeled effect needs kappa * kappa_star < 1");
    if (!(sigma2 > 0.0) || !(v_z2 >= 0.0)) throw Error("invalid variance inputs");
    const double num = h * std::sqrt(1.0 - kk);
    UnlabeledEffect e;
    e.lower = num / std::sqrt(sigma2 + v_z2 / (1.0 - kk));
    const double lead = 1.0 + std::sqrt(1.0 / kappa);
    const double gap = 1.0 - std::sqrt(kk);
    const double inner = (1.0 - lead * lead / (gap * gap) * kk) / (1.0 - kk);
    e.upper_clipped = inner < 0.0;
    e.upper = num / std::sqrt(sigma2 + v_z2 * std::max(0.0, inner));
    e.conjectured = num / std::sqrt(sigma2 + v_z2 * (1.0 - kappa_star));
    return e;
}

double m_retro(double C, double sigma2, double v_z2) {
    if (!(C >= 0.0)) throw Error("screening threshold must be >= 0");
    const double s = std::sqrt(sigma2 + v_z2);
    if (!(s > 0.0)) throw Error("Y variance must be positive");
    const double c = C / s;
    if (c == 0.0) return s;
    return s * std::sqrt(1.0 + c * normal_pdf(c) / normal_sf(c));
}

double effect_size_retro(double h, double C, double sigma2, double v_z2) {
    return h * m_retro(C, sigma2, v_z2) / (sigma2 + v_z2);
}

SignalMixture effective_pi_mu(StatKind kind, double kappa, double sigma2, const SignalMixture& signal, double tau) {
    return signal.nonnull_part().scaled(1.0 / crt_effect_denominator(kind, kappa, sigma2, signal, tau));
}

std::string to_string(LimitCase c) {
    switch (c) {
        case LimitCase::interior: return "interior";
        case LimitCase::boundary: return "boundary";
        case LimitCase::zero_power: return "zero_power";
    }
    return "unknown";
}

NormalMeansLimit::NormalMeansLimit(SignalMixture pi_mu, double gamma, Sided sided)
    : pi_mu_(std::move(pi_mu)), gamma_(gamma), sided_(sided) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw Error("null proportion gamma must lie in (0, 1)");
}

double NormalMeansLimit::G(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double g = 0.0;
    if (sided_ == Sided::one_sided_upper) {
        const double z = -normal_quantile(t);
        for (const auto& a : pi_mu_.atoms()) g += a.weight * normal_sf(z - a.value);
    } else {
        const double z = -normal_quantile(0.5 * t);
        for (const auto& a : pi_mu_.atoms()) g += a.weight * (normal_sf(z - a.value) + normal_cdf(-z - a.value));
    }
    return std::min(g, 1.0);
}

double NormalMeansLimit::g_bh(double t) const { return t / (gamma_ * t + (1.0 - gamma_) * G(t)); }

double NormalMeansLimit::g_adapt(double t) const {
    return (gamma_ * t + (1.0 - gamma_) * (1.0 - G(1.0 - t))) / (gamma_ * t + (1.0 - gamma_) * G(t));
}

double NormalMeansLimit::fdp(double t) const { return gamma_ * t / (gamma_ * t + (1.0 - gamma_) * G(t)); }

LimitResult NormalMeansLimit::solve(Procedure procedure, double q, double domain_end) const {
    if (!(q > 0.0 && q < 1.0)) throw Error("FDR level q must lie in (0, 1)");
    if (!(domain_end > 0.0 && domain_end <= 1.0)) throw Error("domain end must lie in (0, 1]");
    auto g = [&](double t) { return procedure == Procedure::bh ? g_bh(t) : g_adapt(t); };
    const double t_min = 1e-14;
    const double log_span = std::log(domain_end / t_min);
    auto grid = [&](int k) { return k == kGrid - 1 ? domain_end : t_min * std::exp(log_span * k / (kGrid - 1)); };

    LimitResult out;
    int k = kGrid - 1;
    while (k >= 0 && !(g(grid(k)) <= q)) --k;
    if (k < 0) return out;
    double t = grid(k);
    if (k == kGrid - 1) {
        out.case_tag = LimitCase::boundary;
    } else {
        double lo = std::log(t);
        double hi = std::log(grid(k + 1));
        for (int i = 0; i < kBisect; ++i) {
            const double mid = 0.5 * (lo + hi);
            (g(std::exp(mid)) <= q ? lo : hi) = mid;
        }
        t = std::exp(lo);
        out.case_tag = LimitCase::interior;
    }
    out.threshold = t;
    out.fdp_limit = fdp(t);
    out.power_limit = G(t);
    return out;
}

LimitResult limit_bh_adapt(const SignalMixture& pi_mu, double gamma, double q, Sided sided, Procedure procedure,
                           double domain_end) {
    return NormalMeansLimit(pi_mu, gamma, sided).solve(procedure, q, domain_end);
}

double w_zero_mass(double mu, double a) { return dead_zone_mass(mu, a) * dead_zone_mass(0.0, a); }

double w_cdf(double mu, double a, Antisym f, double w) {
    if (!(a >= 0.0)) throw Error("threshold must be >= 0");
    const double v_zero = dead_zone_mass(0.0, a);
    if (f == Antisym::difference) {
        auto left = [&](double v) { return normal_pdf(v - a) * eta_cdf(mu, a, w + v); };
        auto right = [&](double v) { return normal_pdf(v + a) * eta_cdf(mu, a, w + v); };
        return std::clamp(v_zero * eta_cdf(mu, a, w) + integrate_split(left, -kTailRange, 0.0, -w) +
                              integrate_split(right, 0.0, kTailRange, -w),
                          0.0, 1.0);
    }
    auto body = [&](double s) { return 2.0 * normal_pdf(s + a) * abs_eta_cdf(mu, a, w + s); };
    return std::clamp(v_zero * abs_eta_cdf(mu, a, w) + integrate_split(body, 0.0, kTailRange, -w), 0.0, 1.0);
}

KnockoffLimit::KnockoffLimit(SignalMixture mu1, double a, Antisym f, double gamma)
    : mu1_(std::move(mu1)), a_(a), f_(f), gamma_(gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw Error("null proportion gamma must lie in (0, 1)");
    if (!(a >= 0.0)) throw Error("threshold must be >= 0");
}

double KnockoffLimit::mass_below(const SignalMixture& mix, double w, bool strict) const {
    double total = 0.0;
    for (const auto& atom : mix.atoms()) {
        double c = (f_ == Antisym::difference && a_ == 0.0) ? normal_cdf((w - atom.value) / std::sqrt(2.0))
                                                            : w_cdf(atom.value, a_, f_, w);
        if (strict && w == 0.0) c -= w_zero_mass(atom.value, a_);
        total += atom.weight * c;
    }
    return total;
}

double KnockoffLimit::G0(double w) const { return mass_below(SignalMixture::point(0.0), w, false); }
double KnockoffLimit::G1(double w) const { return mass_below(mu1_, w, false); }

double KnockoffLimit::g(double w) const {
    static const SignalMixture null_mix = SignalMixture::point(0.0);
    double num = 0.0;
    double den = 0.0;
    if (w == 0.0) {
        const double below0 = mass_below(null_mix, 0.0, true);
        const double below1 = mass_below(mu1_, 0.0, true);
        num = gamma_ * below0 + (1.0 - gamma_) * below1;
        den = gamma_ * (1.0 - mass_below(null_mix, 0.0, false)) + (1.0 - gamma_) * (1.0 - mass_below(mu1_, 0.0, false));
    } else {
        num = gamma_ * G0(-w) + (1.0 - gamma_) * G1(-w);
        den = gamma_ * (1.0 - G0(w)) + (1.0 - gamma_) * (1.0 - G1(w));
    }
    if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
    return num / den;
}

LimitResult KnockoffLimit::solve(double q) const {
    if (!(q > 0.0 && q < 1.0)) throw Error("FDR level q must lie in (0, 1)");
    const double w_max = mu1_.max_abs_value() + a_ + 10.0;
    LimitResult out;
    int k = 0;
    while (k < kKnockoffGrid && !(g(w_max * k / (kKnockoffGrid - 1)) <= q)) ++k;
    if (k == kKnockoffGrid) return out;
    double w = w_max * k / (kKnockoffGrid - 1);
    if (k == 0) {
        out.case_tag = LimitCase::boundary;
    } else {
        double lo = w_max * (k - 1) / (kKnockoffGrid - 1);
        double hi = w;
        for (int i = 0; i < kBisect; ++i) {
            const double mid = 0.5 * (lo + hi);
            (g(mid) <= q ? hi : lo) = mid;
        }
        w = hi;
        out.case_tag = LimitCase::interior;
    }
    out.threshold = w;
    static const SignalMixture null_mix = SignalMixture::point(0.0);
    double null_below;
    double den;
    if (w == 0.0) {
        null_below = mass_below(null_mix, 0.0, true);
        out.power_limit = 1.0 - mass_below(mu1_, 0.0, false);
        den = gamma_ * (1.0 - mass_below(null_mix, 0.0, false)) + (1.0 - gamma_) * out.power_limit;
    } else {
        null_below = G0(-w);
        out.power_limit = 1.0 - G1(w);
        den = gamma_ * (1.0 - G0(w)) + (1.0 - gamma_) * out.power_limit;
    }
    out.fdp_limit = den > 0.0 ? gamma_ * null_below / den : 0.0;
    return out;
}

std::pair<SignalMixture, double> knockoff_effects(const KnockoffScenario& sc, const AmpSolution* amp) {
    const SignalMixture signal = sc.signal.scaled(sc.signal_scale);
    const SignalMixture pi1 = signal.nonnull_part();
    switch (sc.stat) {
        case KnockoffStat::mc:
            return {pi1.scaled(1.0 / std::sqrt(sc.sigma2 + sc.kappa * signal.second_moment())), 0.0};
        case KnockoffStat::ols:
            if (!(2.0 * sc.kappa < 1.0)) throw Error("knockoff OLS needs kappa < 1/2");
            return {pi1.scaled(std::sqrt((1.0 - 2.0 * sc.kappa) / sc.sigma2)), 0.0};
        case KnockoffStat::lasso: {
            const AmpSolution sol = amp ? *amp : min_tau_over_lambda(AmpProblem{sc.kappa, sc.sigma2, signal, true});
            return {pi1.scaled(1.0 / sol.tau), sol.alpha};
        }
    }
    throw Error("unknown knockoff statistic");
}

LimitResult limit_knockoff(const KnockoffScenario& scenario, double q, const AmpSolution* amp) {
    const auto [mu1, a] = knockoff_effects(scenario, amp);
    return KnockoffLimit(mu1, a, scenario.f, scenario.signal.null_weight()).solve(q);
}

void write_theory_csv(const std::vector<TheoryRow>& rows, std::ostream& out) {
    out << "scenario_id,param,value,flag\n";
    out.precision(12);
    for (const auto& r : rows) out << r.scenario_id << ',' << r.param << ',' << r.value << ',' << r.flag << '\n';
}

}  // namespace mxpl
