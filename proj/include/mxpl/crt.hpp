#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "mxpl/model_gen.hpp"

namespace mxpl {

enum class StatKind { marginal_covariance, ols, distilled_lasso };

struct CrtStatKind {
    StatKind tag = StatKind::marginal_covariance;
    double lambda = 0.0;  // only used by distilled_lasso

    static CrtStatKind mc() { return {StatKind::marginal_covariance, 0.0}; }
    static CrtStatKind ols() { return {StatKind::ols, 0.0}; }
    static CrtStatKind distilled(double lambda) { return {StatKind::distilled_lasso, lambda}; }

    void validate() const;
    std::string name() const;
};

enum class Sided { one_sided_upper, two_sided };

enum class PMethod {
    analytic,        // closed-form conditional Gaussian null
    resampled,       // M draws of the focal column
    exact_integral,  // exact reduced null law of the OLS statistic by quadrature
};

struct PValue {
    double value = 1.0;
    Sided sided = Sided::one_sided_upper;
    PMethod method = PMethod::analytic;
    int M = 0;
    double statistic = 0.0;
    /// Set when the conditioning pins the focal column down and no test has power.
    bool degenerate = false;
};

double stat_mc(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
/// sqrt(n) times the OLS coefficient of x when y is regressed on [x, Z].
double stat_ols(const Eigen::VectorXd& x, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y);
/// (y - Z theta_hat_lambda)^T x / n.
double stat_distilled(const Eigen::VectorXd& x, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                      double lambda);

/// Gaussian tail p-value of t against N(0, s^2).
double gaussian_pvalue(double t, double s, Sided sided);

PValue crt_pvalue_analytic(const CrtStatKind& kind, const Dataset& data, Sided sided);

/// Resampling CRT: M fresh copies of the focal column from N(0, I_n).
PValue crt_pvalue_resampling(const CrtStatKind& kind, const Dataset& data, int M, Sided sided,
                             std::uint64_t seed, std::uint64_t stream = 0);

/// P(T >= t) for T = a g / (g^2 + C), g ~ N(0,1), C ~ chi^2_dof independent, a > 0.
double ols_null_upper_tail(double t, double a, int dof);

/// OLS CRT p-value from the exact null law of the statistic given (y, Z).
PValue crt_pvalue_ols_exact(const Dataset& data, Sided sided);

/// Conditional CRT using labeled plus unlabeled rows (focal dataset with
/// total_rows() = n_* >= labeled_n). Known variance gives the Gaussian law;
/// otherwise M sphere draws give an empirical p-value.
PValue conditional_crt_unlabeled(const Dataset& data, bool known_variance, Sided sided = Sided::one_sided_upper,
                                 int M = 999, std::uint64_t seed = 0, std::uint64_t stream = 0);

/// Exact tail of the unknown-variance conditional law, P(s R U_1 >= t).
double sphere_null_upper_tail(double t, double scale, int dim);

/// CRT p-values for every column of a full-design dataset. MC and distilled
/// use the analytic laws; OLS uses the exact integral.
Eigen::VectorXd crt_pvalues_all(const CrtStatKind& kind, const Dataset& data, Sided sided);

}  // namespace mxpl
