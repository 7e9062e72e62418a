#pragma once

// Brute-force reference implementations shared by the unit and acceptance tests.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline std::vector<int> at_or_below(const Eigen::VectorXd& p, double t) {
    std::vector<int> out;
    for (Eigen::Index j = 0; j < p.size(); ++j)
        if (p[j] <= t) out.push_back(static_cast<int>(j));
    return out;
}

// Largest p-value t with t <= q R(t) / m, where R(t) counts p-values <= t.
inline std::vector<int> bh(const Eigen::VectorXd& p, double q) {
    const double m = static_cast<double>(p.size());
    double best = -1.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        double r = 0;
        for (Eigen::Index j = 0; j < p.size(); ++j) r += p[j] <= p[i];
        if (p[i] * m <= q * r && p[i] > best) best = p[i];
    }
    return best < 0.0 ? std::vector<int>{} : at_or_below(p, best);
}

// Largest candidate t in {0} and the p-values inside the domain with
// (1 + #{p >= 1 - t}) / #{p <= t} <= q.
inline std::vector<int> adapt(const Eigen::VectorXd& p, double q, double domain_end = 1.0, bool open_end = false) {
    std::vector<double> cands{0.0};
    for (Eigen::Index j = 0; j < p.size(); ++j)
        if (open_end ? p[j] < domain_end : p[j] <= domain_end) cands.push_back(p[j]);
    double best = -1.0;
    for (double t : cands) {
        double num = 1.0, den = 0.0;
        for (Eigen::Index j = 0; j < p.size(); ++j) {
            num += p[j] >= 1.0 - t;
            den += p[j] <= t;
        }
        if (den > 0.0 && num / den <= q && t > best) best = t;
    }
    return best < 0.0 ? std::vector<int>{} : at_or_below(p, best);
}

// Smallest candidate w among the nonzero |W_j| with
// (1 + #{W <= -w}) / #{W >= w} <= q; selects W_j >= w.
inline std::vector<int> knockoff(const Eigen::VectorXd& w, double q) {
    double best = INFINITY;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double c = std::abs(w[i]);
        if (c == 0.0) continue;
        double num = 1.0, den = 0.0;
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            num += w[j] <= -c;
            den += w[j] >= c;
        }
        if (den > 0.0 && num / den <= q && c < best) best = c;
    }
    std::vector<int> out;
    if (std::isfinite(best))
        for (Eigen::Index j = 0; j < w.size(); ++j)
            if (w[j] >= best) out.push_back(static_cast<int>(j));
    return out;
}

// Enumerates sign patterns s in {-1, 0, 1}^d; each candidate solves the
// restricted stationarity equations and is kept if its signs agree with s.
// Returns the candidate with the smallest objective 0.5 ||Y - Z theta||^2 + pen ||theta||_1.
inline Eigen::VectorXd lasso(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y, double pen) {
    const int d = static_cast<int>(Z.cols());
    int total = 1;
    for (int j = 0; j < d; ++j) total *= 3;
    Eigen::VectorXd best = Eigen::VectorXd::Zero(d);
    double best_obj = 0.5 * Y.squaredNorm();
    for (int code = 0; code < total; ++code) {
        std::vector<int> act;
        std::vector<double> sgn;
        int c = code;
        for (int j = 0; j < d; ++j) {
            const int s = c % 3 - 1;
            c /= 3;
            if (s != 0) {
                act.push_back(j);
                sgn.push_back(s);
            }
        }
        if (act.empty()) continue;
        const auto k = static_cast<Eigen::Index>(act.size());
        Eigen::MatrixXd ZA(Z.rows(), k);
        Eigen::VectorXd s(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            ZA.col(i) = Z.col(act[i]);
            s[i] = sgn[i];
        }
        const Eigen::VectorXd tA = (ZA.transpose() * ZA).ldlt().solve(ZA.transpose() * Y - pen * s);
        bool ok = true;
        for (Eigen::Index i = 0; i < k; ++i) ok = ok && tA[i] * s[i] > 0.0;
        if (!ok) continue;
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
        for (Eigen::Index i = 0; i < k; ++i) theta[act[i]] = tA[i];
        const double obj = 0.5 * (Y - Z * theta).squaredNorm() + pen * theta.lpNorm<1>();
        if (obj < best_obj) {
            best_obj = obj;
            best = theta;
        }
    }
    return best;
}

}  // namespace oracle
