#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mxpl {

enum class KnockoffStat { mc, ols, lasso };
enum class Antisym { difference, abs_difference };

std::string to_string(KnockoffStat kind);
std::string to_string(Antisym f);

/// f(x, y): x - y or |x| - |y|.
double antisym_apply(Antisym f, double x, double y) noexcept;

struct WVector {
    Eigen::VectorXd w;
    /// Importance statistics of the originals and of the knockoffs.
    Eigen::VectorXd t;
    Eigen::VectorXd t_tilde;
    KnockoffStat kind = KnockoffStat::mc;
    Antisym antisym = Antisym::difference;
    double lambda = 0.0;
};

/// n x p matrix of i.i.d. N(0, 1) entries drawn from the knockoff stream.
Eigen::MatrixXd sample_knockoffs_iid(Eigen::Index n, Eigen::Index p, std::uint64_t seed, std::uint64_t stream = 0);
inline Eigen::MatrixXd sample_knockoffs_iid(const Eigen::MatrixXd& X, std::uint64_t seed, std::uint64_t stream = 0) {
    return sample_knockoffs_iid(X.rows(), X.cols(), seed, stream);
}

/// MC: T_j = X_j^T y / sqrt(n); OLS and lasso: sqrt(n) times the coefficient
/// from regressing y on [X, X_tilde] (lasso penalty sqrt(n) * lambda).
WVector w_statistics(const Eigen::MatrixXd& X, const Eigen::MatrixXd& X_tilde, const Eigen::VectorXd& y,
                     KnockoffStat kind, Antisym antisym, double lambda = 0.0);

struct KnockoffSelection {
    double w_hat = std::numeric_limits<double>::infinity();
    std::vector<int> selected;
};

/// Smallest candidate |W_j| (W_j != 0) whose estimated FDP
/// (1 + #{W <= -w}) / #{W >= w} is at most q; selects {W_j >= w_hat}.
KnockoffSelection knockoff_threshold(const Eigen::VectorXd& w, double q);

}  // namespace mxpl
