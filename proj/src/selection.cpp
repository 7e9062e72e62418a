#include "mxpl/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "mxpl/signal_mixture.hpp"

namespace mxpl {

namespace {

void check_pvals(const Eigen::VectorXd& pvals, double q) {
    if (!(q > 0.0 && q < 1.0)) throw Error("FDR level q must lie in (0, 1)");
    for (Eigen::Index j = 0; j < pvals.size(); ++j)
        if (!(pvals[j] >= 0.0 && pvals[j] <= 1.0)) throw Error("p-values must lie in [0, 1]");
}

std::vector<int> at_or_below(const Eigen::VectorXd& pvals, double t) {
    std::vector<int> out;
    for (Eigen::Index j = 0; j < pvals.size(); ++j)
        if (pvals[j] <= t) out.push_back(static_cast<int>(j));
    return out;
}

}  // namespace

SelectionResult bh(const Eigen::VectorXd& pvals, double q) {
    check_pvals(pvals, q);
    const auto m = static_cast<std::size_t>(pvals.size());
    std::vector<double> sorted(pvals.data(), pvals.data() + m);
    std::sort(sorted.begin(), sorted.end());
    SelectionResult out;
    for (std::size_t k = m; k >= 1; --k) {
        if (sorted[k - 1] <= static_cast<double>(k) * q / static_cast<double>(m)) {
            out.threshold = sorted[k - 1];
            out.selected = at_or_below(pvals, out.threshold);
            break;
        }
    }
    return out;
}

SelectionResult adapt(const Eigen::VectorXd& pvals, double q, double domain_end, bool open_end) {
    check_pvals(pvals, q);
    if (!(domain_end > 0.0 && domain_end <= 1.0)) throw Error("AdaPT domain end must lie in (0, 1]");
    std::vector<double> sorted(pvals.data(), pvals.data() + pvals.size());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> candidates{0.0};
    for (double p : sorted)
        if (open_end ? p < domain_end : p <= domain_end) candidates.push_back(p);

    SelectionResult out;
    for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
        const double t = *it;
        const auto den = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
        const auto num =
            1.0 + static_cast<double>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), 1.0 - t));
        if (den > 0.0 && num / den <= q) {
            out.threshold = t;
            out.selected = at_or_below(pvals, t);
            break;
        }
    }
    return out;
}

std::pair<double, double> evaluate(const std::vector<int>& selected, const Eigen::VectorXd& beta_truth) {
    std::size_t false_hits = 0;
    std::size_t true_hits = 0;
    for (int j : selected) {
        if (j < 0 || j >= beta_truth.size()) throw Error("selected index out of range");
        (beta_truth[j] == 0.0 ? false_hits : true_hits) += 1;
    }
    std::size_t nonnull = 0;
    for (Eigen::Index j = 0; j < beta_truth.size(); ++j)
        if (beta_truth[j] != 0.0) ++nonnull;
    const double fdp = selected.empty() ? 0.0 : static_cast<double>(false_hits) / selected.size();
    const double power = nonnull == 0 ? 0.0 : static_cast<double>(true_hits) / nonnull;
    return {fdp, power};
}

void score(SelectionResult& result, const Eigen::VectorXd& beta_truth) {
    std::tie(result.fdp, result.power) = evaluate(result.selected, beta_truth);
}

}  // namespace mxpl
