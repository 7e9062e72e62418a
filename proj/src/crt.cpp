#include "mxpl/crt.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "mxpl/amp.hpp"
#include "mxpl/lasso.hpp"
#include "mxpl/rng.hpp"

namespace mxpl {

namespace {

// Orthogonal complement of span(Z) expressed in Householder coordinates:
// for any v, the last n - d entries of H^T v carry (I - P_Z) v isometrically.
class Complement {
public:
    explicit Complement(const Eigen::MatrixXd& Z) : n_(Z.rows()), d_(Z.cols()) {
        if (d_ == 0) return;
        if (d_ >= n_) throw Error("nuisance design has at least as many columns as rows");
        qr_.compute(Z);
        const auto diag = qr_.matrixQR().diagonal().cwiseAbs();
        if (!(diag.minCoeff() > 1e-10 * diag.maxCoeff())) throw Error("nuisance design is rank deficient");
    }

    Eigen::VectorXd coords(const Eigen::VectorXd& v) const {
        if (d_ == 0) return v;
        Eigen::VectorXd w = qr_.householderQ().transpose() * v;
        return w.tail(n_ - d_);
    }

    Eigen::MatrixXd coords(const Eigen::MatrixXd& V) const {
        if (d_ == 0) return V;
        Eigen::MatrixXd W = qr_.householderQ().transpose() * V;
        return W.bottomRows(n_ - d_);
    }

    Eigen::Index dim() const noexcept { return n_ - d_; }

private:
    Eigen::Index n_;
    Eigen::Index d_;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
};

void require_focal(const Dataset& data) {
    if (!data.is_focal()) throw Error("CRT on a single variable needs a focal dataset");
}

double empirical_pvalue(double t, const std::vector<double>& null_draws, Sided sided) {
    std::size_t count = 0;
    for (double v : null_draws) {
        if (sided == Sided::two_sided ? std::abs(v) >= std::abs(t) : v >= t) ++count;
    }
    return (1.0 + static_cast<double>(count)) / (static_cast<double>(null_draws.size()) + 1.0);
}

double ols_pvalue(double t, double a, int dof, Sided sided) {
    if (sided == Sided::two_sided) return std::min(1.0, 2.0 * ols_null_upper_tail(std::abs(t), a, dof));
    return std::clamp(ols_null_upper_tail(t, a, dof), 0.0, 1.0);
}

}  // namespace

void CrtStatKind::validate() const {
    if (tag == StatKind::distilled_lasso && !(lambda > 0.0)) throw Error("distilled lasso needs lambda > 0");
}

std::string CrtStatKind::name() const {
    switch (tag) {
        case StatKind::marginal_covariance: return "mc";
        case StatKind::ols: return "ols";
        case StatKind::distilled_lasso: return "distilled";
    }
    return "unknown";
}

double stat_mc(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size() || x.size() == 0) throw Error("stat_mc needs equal non-empty vectors");
    return y.dot(x) / static_cast<double>(x.size());
}

double stat_ols(const Eigen::VectorXd& x, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y) {
    const Eigen::Index n = x.size();
    if (y.size() != n || Z.rows() != n) throw Error("stat_ols dimensions disagree");
    const Complement comp(Z);
    const Eigen::VectorXd px = comp.coords(x);
    const Eigen::VectorXd py = comp.coords(y);
    const double xpx = px.squaredNorm();
    if (!(xpx > 1e-12 * x.squaredNorm())) throw Error("focal column lies in the span of the nuisance design");
    return std::sqrt(static_cast<double>(n)) * px.dot(py) / xpx;
}

double stat_distilled(const Eigen::VectorXd& x, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                      double lambda) {
    if (!(lambda > 0.0)) throw Error("distilled lasso needs lambda > 0");
    const LassoFit fit = fit_lasso(Z, y, lambda);
    return (y - Z * fit.theta_hat).dot(x) / static_cast<double>(x.size());
}

double gaussian_pvalue(double t, double s, Sided sided) {
    if (!(s > 0.0)) return 1.0;
    if (sided == Sided::two_sided) return std::min(1.0, 2.0 * normal_sf(std::abs(t) / s));
    return normal_sf(t / s);
}

PValue crt_pvalue_analytic(const CrtStatKind& kind, const Dataset& data, Sided sided) {
    kind.validate();
    require_focal(data);
    const Eigen::VectorXd x = data.labeled_x();
    const double n = data.labeled_n;
    PValue pv;
    pv.sided = sided;
    pv.method = PMethod::analytic;
    if (kind.tag == StatKind::marginal_covariance) {
        pv.statistic = stat_mc(x, data.y);
        pv.value = gaussian_pvalue(pv.statistic, data.y.norm() / n, sided);
    } else if (kind.tag == StatKind::distilled_lasso) {
        const Eigen::MatrixXd Z = data.labeled_z();
        const LassoFit fit = fit_lasso(Z, data.y, kind.lambda);
        const Eigen::VectorXd resid = data.y - Z * fit.theta_hat;
        pv.statistic = resid.dot(x) / n;
        pv.value = gaussian_pvalue(pv.statistic, resid.norm() / n, sided);
    } else {
        throw Error("the OLS statistic has no analytic CRT law; use resampling or the exact integral");
    }
    return pv;
}

PValue crt_pvalue_resampling(const CrtStatKind& kind, const Dataset& data, int M, Sided sided, std::uint64_t seed,
                             std::uint64_t stream) {
    kind.validate();
    require_focal(data);
    if (M < 19) throw Error("resampling CRT needs M >= 19");
    const int n = data.labeled_n;
    const Eigen::VectorXd x = data.labeled_x();
    const Eigen::MatrixXd Z = data.labeled_z();

    Eigen::MatrixXd copies(n, M);
    const NormalField field(seed, stream, Purpose::resample);
    for (int k = 0; k < M; ++k) field.fill_row(static_cast<std::uint64_t>(k), 0, static_cast<std::uint32_t>(n),
                                               copies.col(k).data());

    PValue pv;
    pv.sided = sided;
    pv.method = PMethod::resampled;
    pv.M = M;
    std::vector<double> null_draws(static_cast<std::size_t>(M));
    if (kind.tag == StatKind::ols) {
        const Complement comp(Z);
        const Eigen::VectorXd py = comp.coords(data.y);
        const Eigen::VectorXd px = comp.coords(x);
        const double rn = std::sqrt(static_cast<double>(n));
        pv.statistic = rn * px.dot(py) / px.squaredNorm();
        const Eigen::MatrixXd pc = comp.coords(copies);
        const Eigen::VectorXd num = pc.transpose() * py;
        const Eigen::VectorXd den = pc.colwise().squaredNorm().transpose();
        for (int k = 0; k < M; ++k) null_draws[k] = rn * num[k] / den[k];
    } else {
        Eigen::VectorXd resid = data.y;
        if (kind.tag == StatKind::distilled_lasso) resid -= Z * fit_lasso(Z, data.y, kind.lambda).theta_hat;
        pv.statistic = resid.dot(x) / n;
        const Eigen::VectorXd t = copies.transpose() * resid / static_cast<double>(n);
        for (int k = 0; k < M; ++k) null_draws[k] = t[k];
    }
    pv.value = empirical_pvalue(pv.statistic, null_draws, sided);
    return pv;
}

double ols_null_upper_tail(double t, double a, int dof) {
    if (!(a > 0.0)) throw Error("OLS null law needs a > 0");
    if (dof < 0) throw Error("OLS null law needs dof >= 0");
    if (t <= 0.0) return t == 0.0 ? 0.5 : 1.0 - ols_null_upper_tail(-t, a, dof);
    if (dof == 0) return normal_cdf(a / t) - 0.5;
    // With C = S^2, S ~ chi_dof, the event T >= t is g between the roots of
    // t g^2 - a g + t S^2 = 0, so the integrand over S needs only normal tails.
    const double k = dof;
    const double log_norm = (0.5 * k - 1.0) * std::log(2.0) + std::lgamma(0.5 * k);
    auto integrand = [&](double s) {
        if (s <= 0.0) return 0.0;
        const double disc = a * a - 4.0 * t * t * s * s;
        if (disc <= 0.0) return 0.0;
        const double root = std::sqrt(disc);
        const double g_hi = (a + root) / (2.0 * t);
        const double g_lo = 2.0 * t * s * s / (a + root);
        const double log_density = (k - 1.0) * std::log(s) - 0.5 * s * s - log_norm;
        return std::exp(log_density) * (normal_sf(g_lo) - normal_sf(g_hi));
    };
    // The chi density has standard deviation below 0.75, so +-10 around its mode
    // carries all but a negligible fraction of the mass.
    const double mode = std::sqrt(k - 1.0);
    const double lo = std::max(0.0, mode - 10.0);
    const double hi = std::min(mode + 10.0, a / (2.0 * t));
    if (hi <= lo) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 15, 1e-13);
}
PValue crt_pvalue_ols_exact(const Dataset& data, Sided sided) {
    require_focal(data);
    const int n = data.labeled_n;
    const Eigen::MatrixXd Z = data.labeled_z();
    const Complement comp(Z);
    const Eigen::VectorXd py = comp.coords(data.y);
    const Eigen::VectorXd px = comp.coords(data.labeled_x());
    const double rn = std::sqrt(static_cast<double>(n));
    PValue pv;
    pv.sided = sided;
    pv.method = PMethod::exact_integral;
    pv.statistic = rn * px.dot(py) / px.squaredNorm();
    const double a = rn * py.norm();
    const int dof = static_cast<int>(comp.dim()) - 1;
    if (!(a > 0.0) || dof < 0) return pv;
    pv.value = ols_pvalue(pv.statistic, a, dof, sided);
    return pv;
}

double sphere_null_upper_tail(double t, double scale, int dim) {
    if (!(scale > 0.0) || dim < 1) throw Error("sphere null law needs scale > 0 and dim >= 1");
    const double u = t / scale;
    if (u <= 0.0) return u == 0.0 ? 0.5 : 1.0 - sphere_null_upper_tail(-t, scale, dim);
    if (u > 1.0) return 0.0;
    if (dim == 1) return 0.5;
    return 0.5 * boost::math::ibetac(0.5, 0.5 * (dim - 1), u * u);
}

PValue conditional_crt_unlabeled(const Dataset& data, bool known_variance, Sided sided, int M, std::uint64_t seed,
                                 std::uint64_t stream) {
    require_focal(data);
    const Eigen::Index n = data.labeled_n;
    const Eigen::Index n_star = data.total_rows();
    const Eigen::Index d = data.Z.cols();
    PValue pv;
    pv.sided = sided;
    pv.method = known_variance ? PMethod::analytic : PMethod::resampled;
    pv.M = known_variance ? 0 : M;
    const Eigen::Index dim = n_star - d;
    if (dim <= 0) {
        pv.degenerate = true;
        pv.value = 1.0;
        return pv;
    }
    const Eigen::VectorXd& xs = *data.focal_x;
    // v = I_{n x n*}^T Y; the statistic is v^T (I - H*) X*.
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n_star);
    v.head(n) = data.y;
    double s2 = 0.0;
    double r2 = 0.0;
    if (n_star >= 2 * d) {
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(data.Z.transpose());
        const Eigen::LLT<Eigen::MatrixXd> llt(gram.selfadjointView<Eigen::Lower>());
        if (llt.info() != Eigen::Success) throw Error("unlabeled Gram matrix is singular");
        const Eigen::VectorXd b = data.Z.topRows(n).transpose() * data.y;
        const Eigen::VectorXd zx = data.Z.transpose() * xs;
        const Eigen::VectorXd u = llt.solve(b);
        pv.statistic = data.y.dot(xs.head(n)) - u.dot(zx);
        s2 = data.y.squaredNorm() - b.dot(u);
        if (!known_variance) r2 = xs.squaredNorm() - zx.dot(llt.solve(zx));
    } else {
        const Complement comp(data.Z);
        const Eigen::VectorXd cv = comp.coords(v);
        const Eigen::VectorXd cx = comp.coords(xs);
        pv.statistic = cv.dot(cx);
        s2 = cv.squaredNorm();
        r2 = cx.squaredNorm();
    }
    const double s = std::sqrt(std::max(s2, 0.0));
    if (known_variance) {
        pv.value = gaussian_pvalue(pv.statistic, s, sided);
        return pv;
    }
    if (M < 19) throw Error("sphere resampling needs M >= 19");
    const double scale = s * std::sqrt(std::max(r2, 0.0));
    CounterStream rng(seed, stream, Purpose::sphere);
    std::gamma_distribution<double> chi2(0.5 * static_cast<double>(dim - 1), 2.0);
    std::vector<double> null_draws(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) {
        const double g = rng.normal();
        const double c = dim > 1 ? chi2(rng) : 0.0;
        null_draws[k] = scale * g / std::sqrt(g * g + c);
    }
    pv.value = empirical_pvalue(pv.statistic, null_draws, sided);
    return pv;
}

Eigen::VectorXd crt_pvalues_all(const CrtStatKind& kind, const Dataset& data, Sided sided) {
    kind.validate();
    if (data.is_focal()) throw Error("crt_pvalues_all needs a full-design dataset");
    const Eigen::MatrixXd& X = data.X;
    const Eigen::VectorXd& y = data.y;
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const double nd = static_cast<double>(n);
    Eigen::VectorXd pvals(p);

    if (kind.tag == StatKind::marginal_covariance) {
        const Eigen::VectorXd t = X.transpose() * y / nd;
        const double s = y.norm() / nd;
        for (Eigen::Index j = 0; j < p; ++j) pvals[j] = gaussian_pvalue(t[j], s, sided);
        return pvals;
    }

    if (kind.tag == StatKind::ols) {
        if (p + 1 > n) throw Error("OLS CRT needs p < n");
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
        const Eigen::MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
        const double rmax = R.diagonal().cwiseAbs().maxCoeff();
        if (R.diagonal().cwiseAbs().minCoeff() <= 1e-12 * rmax) throw Error("design is rank deficient");
        const Eigen::MatrixXd r_inv =
            R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
        const Eigen::VectorXd inv_diag = r_inv.rowwise().squaredNorm();
        const Eigen::VectorXd beta = qr.solve(y);
        const double rss = (y - X * beta).squaredNorm();
        const double rn = std::sqrt(nd);
        const int dof = static_cast<int>(n - p);
        for (Eigen::Index j = 0; j < p; ++j) {
            const double t = rn * beta[j];
            const double a = rn * std::sqrt(rss + beta[j] * beta[j] / inv_diag[j]);
            pvals[j] = ols_pvalue(t, a, dof, sided);
        }
        return pvals;
    }

    const GramLasso gl(X, y);
    const LassoFit full = gl.solve(kind.lambda);
    for (Eigen::Index j = 0; j < p; ++j) {
        Eigen::VectorXd theta = full.theta_hat;
        if (theta[j] != 0.0) {
            theta[j] = 0.0;
            theta = gl.solve(kind.lambda, &theta, static_cast<int>(j)).theta_hat;
        }
        const double t = (gl.zty()[j] - gl.gram().col(j).dot(theta)) / nd;
        const double s = std::sqrt(std::max(gl.rss(theta), 0.0)) / nd;
        pvals[j] = gaussian_pvalue(t, s, sided);
    }
    return pvals;
}

}  // namespace mxpl
