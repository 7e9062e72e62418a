#include "mxpl/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mxpl/signal_mixture.hpp"

namespace mxpl {

namespace {

inline double shrink(double x, double t) noexcept {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

double stationarity(const Eigen::VectorXd& grad, const Eigen::VectorXd& theta, double pen, int exclude = -1) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < grad.size(); ++j) {
        if (j == exclude) continue;
        const double v = theta[j] == 0.0 ? std::max(0.0, std::abs(grad[j]) - pen)
                                         : std::abs(grad[j] - pen * (theta[j] > 0.0 ? 1.0 : -1.0));
        worst = std::max(worst, v);
    }
    return worst;
}

void check_inputs(Eigen::Index n, Eigen::Index d, Eigen::Index ylen, double lambda) {
    if (n < 1 || d < 1) throw Error("lasso needs n >= 1 and d >= 1");
    if (ylen != n) throw Error("lasso response length does not match design rows");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error("lasso lambda must be finite and >= 0");
}

LassoFit least_squares(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y) {
    if (Z.cols() > Z.rows()) throw Error("least squares needs d <= n");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    if (qr.rank() < Z.cols()) throw Error("design is rank deficient at lambda = 0");
    LassoFit fit;
    fit.theta_hat = qr.solve(Y);
    fit.lambda = 0.0;
    fit.iterations = 1;
    fit.kkt_violation = kkt_residual(Z, Y, fit.theta_hat, 0.0);
    return fit;
}

}  // namespace

double kkt_residual(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y, const Eigen::VectorXd& theta,
                    double lambda) {
    const Eigen::VectorXd grad = Z.transpose() * (Y - Z * theta);
    return stationarity(grad, theta, std::sqrt(static_cast<double>(Z.rows())) * lambda);
}

double lasso_objective(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y, const Eigen::VectorXd& theta,
                       double lambda) {
    return 0.5 * (Y - Z * theta).squaredNorm() +
           std::sqrt(static_cast<double>(Z.rows())) * lambda * theta.lpNorm<1>();
}

LassoFit fit_lasso(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y, double lambda, const LassoOptions& options,
                   const Eigen::VectorXd* warm_start) {
    check_inputs(Z.rows(), Z.cols(), Y.size(), lambda);
    if (lambda == 0.0) return least_squares(Z, Y);
    const Eigen::Index n = Z.rows();
    const Eigen::Index d = Z.cols();
    const double pen = std::sqrt(static_cast<double>(n)) * lambda;

    const Eigen::VectorXd zty = Z.transpose() * Y;
    const double tol = options.kkt_rel_tol * (1.0 + zty.lpNorm<Eigen::Infinity>());
    const Eigen::VectorXd norms = Z.colwise().squaredNorm().transpose();

    LassoFit fit;
    fit.lambda = lambda;
    fit.theta_hat = Eigen::VectorXd::Zero(d);
    if (zty.lpNorm<Eigen::Infinity>() <= pen) return fit;
    if (warm_start) {
        if (warm_start->size() != d) throw Error("warm start has the wrong length");
        fit.theta_hat = *warm_start;
    }
    Eigen::VectorXd& theta = fit.theta_hat;
    Eigen::VectorXd resid = Y - Z * theta;

    auto update = [&](Eigen::Index j) {
        if (norms[j] == 0.0) {
            theta[j] = 0.0;
            return 0.0;
        }
        const double old = theta[j];
        const double rho = Z.col(j).dot(resid) + norms[j] * old;
        const double next = shrink(rho, pen) / norms[j];
        const double delta = next - old;
        if (delta != 0.0) {
            resid.noalias() -= delta * Z.col(j);
            theta[j] = next;
        }
        return std::abs(delta);
    };

    std::vector<Eigen::Index> active;
    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) max_delta = std::max(max_delta, update(j));
        fit.iterations = sweep;
        if (options.on_sweep) options.on_sweep(theta);

        if (max_delta < options.update_tol) {
            resid = Y - Z * theta;
            const Eigen::VectorXd grad = Z.transpose() * resid;
            fit.kkt_violation = stationarity(grad, theta, pen);
            if (fit.kkt_violation <= tol) return fit;
        }
        active.clear();
        for (Eigen::Index j = 0; j < d; ++j)
            if (theta[j] != 0.0) active.push_back(j);
        for (int inner = 0; inner < options.max_sweeps; ++inner) {
            double inner_delta = 0.0;
            for (Eigen::Index j : active) inner_delta = std::max(inner_delta, update(j));
            if (inner_delta < options.update_tol) break;
        }
    }
    throw Error("lasso coordinate descent did not converge");
}

GramLasso::GramLasso(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y)
    : gram_(Eigen::MatrixXd::Zero(Z.cols(), Z.cols())),
      zty_(Z.transpose() * Y),
      yty_(Y.squaredNorm()),
      n_(static_cast<int>(Z.rows())) {
    check_inputs(Z.rows(), Z.cols(), Y.size(), 0.0);
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose());
    gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
}

GramLasso::GramLasso(Eigen::MatrixXd gram, Eigen::VectorXd zty, double yty, int n)
    : gram_(std::move(gram)), zty_(std::move(zty)), yty_(yty), n_(n) {
    if (gram_.rows() != gram_.cols() || gram_.rows() != zty_.size()) throw Error("Gram dimensions disagree");
    if (n_ < 1) throw Error("Gram lasso needs n >= 1");
}

double GramLasso::rss(const Eigen::VectorXd& theta) const {
    return yty_ - 2.0 * zty_.dot(theta) + theta.dot(gram_ * theta);
}

LassoFit GramLasso::solve(double lambda, const Eigen::VectorXd* warm_start, int exclude,
                          const LassoOptions& options) const {
    const Eigen::Index d = zty_.size();
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error("Gram lasso needs lambda > 0");
    if (exclude >= d) throw Error("excluded column out of range");
    const double pen = std::sqrt(static_cast<double>(n_)) * lambda;
    const double tol = options.kkt_rel_tol * (1.0 + zty_.lpNorm<Eigen::Infinity>());

    LassoFit fit;
    fit.lambda = lambda;
    fit.theta_hat = Eigen::VectorXd::Zero(d);
    if (warm_start) {
        if (warm_start->size() != d) throw Error("warm start has the wrong length");
        fit.theta_hat = *warm_start;
        if (exclude >= 0) fit.theta_hat[exclude] = 0.0;
    }
    Eigen::VectorXd& theta = fit.theta_hat;
    // grad = c - G theta, maintained incrementally.
    Eigen::VectorXd grad = zty_;
    for (Eigen::Index k = 0; k < d; ++k)
        if (theta[k] != 0.0) grad.noalias() -= theta[k] * gram_.col(k);

    auto update = [&](Eigen::Index j) {
        const double gjj = gram_(j, j);
        if (j == exclude || gjj == 0.0) return 0.0;
        const double old = theta[j];
        const double next = shrink(grad[j] + gjj * old, pen) / gjj;
        const double delta = next - old;
        if (delta != 0.0) {
            grad.noalias() -= delta * gram_.col(j);
            theta[j] = next;
        }
        return std::abs(delta);
    };

    std::vector<Eigen::Index> active;
    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) max_delta = std::max(max_delta, update(j));
        fit.iterations = sweep;
        if (options.on_sweep) options.on_sweep(theta);
        if (max_delta < options.update_tol) {
            grad = zty_;
            for (Eigen::Index k = 0; k < d; ++k)
                if (theta[k] != 0.0) grad.noalias() -= theta[k] * gram_.col(k);
            fit.kkt_violation = stationarity(grad, theta, pen, exclude);
            if (fit.kkt_violation <= tol) return fit;
        }
        active.clear();
        for (Eigen::Index j = 0; j < d; ++j)
            if (theta[j] != 0.0) active.push_back(j);
        for (int inner = 0; inner < options.max_sweeps; ++inner) {
            double inner_delta = 0.0;
            for (Eigen::Index j : active) inner_delta = std::max(inner_delta, update(j));
            if (inner_delta < options.update_tol) break;
        }
    }
    throw Error("Gram lasso did not converge");
}

}  // namespace mxpl
