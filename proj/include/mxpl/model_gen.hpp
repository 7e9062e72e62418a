#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>

#include <Eigen/Dense>

#include "mxpl/signal_mixture.hpp"

namespace mxpl {

/// Which design the retrospective generator draws from.
enum class Design {
    focal,  // focal column X plus nuisance matrix Z
    full,   // n x p matrix of exchangeable covariates
};

/// A full generative scenario. Coefficients are on the sqrt(n) scale:
/// h = sqrt(n) * beta for the focal column, signal is the law of sqrt(n) * theta_j.
struct ModelConfig {
    int n = 1;
    int p = 1;
    double sigma2 = 1.0;
    double h = 0.0;
    SignalMixture signal = SignalMixture::point(0.0);
    int unlabeled_m = 0;
    /// Screening g(y) = 1{|y| > C}; unset means no screening.
    std::optional<double> screen_threshold;
    Design design = Design::focal;
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
    /// Retrospective guard: abort after max_raw_draws_factor * n raw rows.
    double max_raw_draws_factor = 1e6;

    void validate() const;
    /// kappa * E[B0^2], the variance Z * theta contributes to Y.
    double v_z2() const noexcept;
    double kappa() const noexcept { return static_cast<double>(p) / n; }
};

/// Realized data. Exactly one of the focal view (focal_x + Z) or the full
/// view (X) is populated. Rows beyond labeled_n are unlabeled.
struct Dataset {
    std::optional<Eigen::VectorXd> focal_x;
    Eigen::MatrixXd Z;
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    /// sqrt(n)-scale truth. Focal view: (h, sqrt(n) theta_1, ...); full view: sqrt(n) beta.
    Eigen::VectorXd beta_truth;
    int labeled_n = 0;
    /// Raw rows drawn before screening (equals labeled rows without screening).
    std::int64_t raw_draws = 0;

    bool is_focal() const noexcept { return focal_x.has_value(); }
    int total_rows() const noexcept;

    /// Labeled block of the focal column / nuisance matrix.
    Eigen::VectorXd labeled_x() const;
    Eigen::MatrixXd labeled_z() const;
};

Dataset generate_setting1(const ModelConfig& config);
Dataset generate_setting2(const ModelConfig& config);
Dataset generate_retrospective(const ModelConfig& config);
Dataset generate_with_unlabeled(const ModelConfig& config);

/// Dispatches on the config: screening, unlabeled rows, design.
Dataset generate(const ModelConfig& config);

/// Debug dump: one line per row, header x,z1,...,z{p-1},y (focal) or
/// x1,...,xp,y (full); unlabeled rows leave y empty.
void write_dataset_csv(const Dataset& data, std::ostream& out);

}  // namespace mxpl
