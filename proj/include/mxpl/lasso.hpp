#pragma once

#include <functional>

#include <Eigen/Dense>

namespace mxpl {

/// Penalty convention: minimize 0.5 * ||Y - Z theta||^2 + sqrt(n) * lambda * ||theta||_1.
struct LassoOptions {
    /// Stop when the KKT residual drops below kkt_rel_tol * (1 + ||Z^T Y||_inf).
    double kkt_rel_tol = 1e-8;
    /// A full sweep with max coordinate change below this triggers a KKT check.
    double update_tol = 1e-10;
    int max_sweeps = 100000;
    /// Called with the current iterate after every full sweep.
    std::function<void(const Eigen::VectorXd&)> on_sweep;
};

struct LassoFit {
    Eigen::VectorXd theta_hat;
    double lambda = 0.0;
    int iterations = 0;
    double kkt_violation = 0.0;
};

/// Cyclic coordinate descent on the data matrix with an active-set inner loop.
/// lambda = 0 falls back to least squares and requires full column rank.
LassoFit fit_lasso(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y, double lambda,
                   const LassoOptions& options = {}, const Eigen::VectorXd* warm_start = nullptr);

/// Max stationarity violation of theta for the given lambda.
double kkt_residual(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y, const Eigen::VectorXd& theta,
                    double lambda);
inline double kkt_residual(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y, const LassoFit& fit) {
    return kkt_residual(Z, Y, fit.theta_hat, fit.lambda);
}

double lasso_objective(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y, const Eigen::VectorXd& theta,
                       double lambda);

/// Covariance-mode solver: works from G = Z^T Z and c = Z^T Y only, so many
/// related problems (a lambda path, leave-one-column-out fits) share one Gram.
class GramLasso {
public:
    GramLasso(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y);
    GramLasso(Eigen::MatrixXd gram, Eigen::VectorXd zty, double yty, int n);

    /// Solves with column `exclude` forced to zero (exclude < 0 keeps all columns).
    LassoFit solve(double lambda, const Eigen::VectorXd* warm_start = nullptr, int exclude = -1,
                   const LassoOptions& options = {}) const;

    /// ||Y - Z theta||^2 from the Gram quantities.
    double rss(const Eigen::VectorXd& theta) const;

    const Eigen::MatrixXd& gram() const noexcept { return gram_; }
    const Eigen::VectorXd& zty() const noexcept { return zty_; }
    double yty() const noexcept { return yty_; }
    int n() const noexcept { return n_; }

private:
    Eigen::MatrixXd gram_;
    Eigen::VectorXd zty_;
    double yty_;
    int n_;
};

}  // namespace mxpl
