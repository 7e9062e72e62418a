#include "mxpl/knockoff.hpp"

#include <algorithm>
#include <cmath>

#include "mxpl/lasso.hpp"
#include "mxpl/rng.hpp"
#include "mxpl/signal_mixture.hpp"

namespace mxpl {

std::string to_string(KnockoffStat kind) {
    switch (kind) {
        case KnockoffStat::mc: return "mc";
        case KnockoffStat::ols: return "ols";
        case KnockoffStat::lasso: return "lasso";
    }
    return "unknown";
}

std::string to_string(Antisym f) { return f == Antisym::difference ? "diff" : "absdiff"; }

double antisym_apply(Antisym f, double x, double y) noexcept {
    return f == Antisym::difference ? x - y : std::abs(x) - std::abs(y);
}

Eigen::MatrixXd sample_knockoffs_iid(Eigen::Index n, Eigen::Index p, std::uint64_t seed, std::uint64_t stream) {
    if (n < 1 || p < 1) throw Error("knockoff matrix needs positive dimensions");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(n, p);
    const NormalField field(seed, stream, Purpose::knockoff);
    for (Eigen::Index i = 0; i < n; ++i)
        field.fill_row(static_cast<std::uint64_t>(i), 0, static_cast<std::uint32_t>(p), out.row(i).data());
    return out;
}

WVector w_statistics(const Eigen::MatrixXd& X, const Eigen::MatrixXd& X_tilde, const Eigen::VectorXd& y,
                     KnockoffStat kind, Antisym antisym, double lambda) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (X_tilde.rows() != n || X_tilde.cols() != p || y.size() != n) throw Error("knockoff dimensions disagree");
    const double rn = std::sqrt(static_cast<double>(n));
    WVector out;
    out.kind = kind;
    out.antisym = antisym;
    out.lambda = lambda;

    if (kind == KnockoffStat::mc) {
        out.t = X.transpose() * y / rn;
        out.t_tilde = X_tilde.transpose() * y / rn;
    } else {
        Eigen::MatrixXd aug(n, 2 * p);
        aug << X, X_tilde;
        Eigen::VectorXd coef;
        if (kind == KnockoffStat::ols) {
            if (2 * p >= n) throw Error("knockoff OLS statistic needs 2p < n");
            Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(2 * p, 2 * p);
            gram.selfadjointView<Eigen::Lower>().rankUpdate(aug.transpose());
            const Eigen::LLT<Eigen::MatrixXd> llt(gram.selfadjointView<Eigen::Lower>());
            const auto diag = llt.matrixL().nestedExpression().diagonal().cwiseAbs();
            if (llt.info() != Eigen::Success || !(diag.minCoeff() > 1e-7 * diag.maxCoeff()))
                throw Error("augmented design is rank deficient");
            coef = llt.solve(aug.transpose() * y);
        } else {
            if (!(lambda > 0.0)) throw Error("knockoff lasso statistic needs lambda > 0");
            coef = fit_lasso(aug, y, lambda).theta_hat;
        }
        out.t = rn * coef.head(p);
        out.t_tilde = rn * coef.tail(p);
    }
    out.w.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) out.w[j] = antisym_apply(antisym, out.t[j], out.t_tilde[j]);
    return out;
}

KnockoffSelection knockoff_threshold(const Eigen::VectorXd& w, double q) {
    if (!(q > 0.0 && q < 1.0)) throw Error("knockoff level q must lie in (0, 1)");
    std::vector<double> pos;
    std::vector<double> neg;  // magnitudes of negative entries
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (w[j] > 0.0) pos.push_back(w[j]);
        if (w[j] < 0.0) neg.push_back(-w[j]);
    }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    std::vector<double> candidates(pos);
    candidates.insert(candidates.end(), neg.begin(), neg.end());
    std::sort(candidates.begin(), candidates.end());

    KnockoffSelection out;
    for (double c : candidates) {
        const auto den = static_cast<double>(pos.end() - std::lower_bound(pos.begin(), pos.end(), c));
        const auto num = 1.0 + static_cast<double>(neg.end() - std::lower_bound(neg.begin(), neg.end(), c));
        if (den > 0.0 && num / den <= q) {
            out.w_hat = c;
            break;
        }
    }
    if (std::isfinite(out.w_hat))
        for (Eigen::Index j = 0; j < w.size(); ++j)
            if (w[j] >= out.w_hat) out.selected.push_back(static_cast<int>(j));
    return out;
}

}  // namespace mxpl
