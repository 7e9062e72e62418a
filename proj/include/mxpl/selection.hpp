#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mxpl {

struct SelectionResult {
    std::vector<int> selected;
    double fdp = 0.0;
    double power = 0.0;
    /// BH/AdaPT: p-value cutoff (negative when nothing is rejected); knockoffs: w_hat.
    double threshold = -1.0;
};

/// Benjamini-Hochberg step-up at level q.
SelectionResult bh(const Eigen::VectorXd& pvals, double q);

/// Intercept-only AdaPT: largest candidate t with (1 + #{p >= 1 - t}) / #{p <= t} <= q.
/// Candidates are 0 and the p-values inside the domain [0, domain_end]
/// (or [0, domain_end) when open_end is set).
SelectionResult adapt(const Eigen::VectorXd& pvals, double q, double domain_end = 1.0, bool open_end = false);

/// (FDP, realized power) of a selection against the truth; non-nulls are the
/// nonzero entries of beta_truth. 0/0 is read as 0.
std::pair<double, double> evaluate(const std::vector<int>& selected, const Eigen::VectorXd& beta_truth);

/// Fills the fdp and power fields from the truth.
void score(SelectionResult& result, const Eigen::VectorXd& beta_truth);

}  // namespace mxpl
