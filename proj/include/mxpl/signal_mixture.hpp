#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mxpl {

/// Thrown for invalid inputs and numerical failures across the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Atom {
    double value;
    double weight;
};

/// Finite point mixture describing the law of sqrt(n) * coefficient,
/// i.e. gamma * delta_0 + (1 - gamma) * pi_1 with pi_1 a finite point mixture.
class SignalMixture {
public:
    /// Validates and canonicalizes: zero atoms are merged, weights must be
    /// nonnegative and sum to one within 1e-12.
    explicit SignalMixture(std::vector<Atom> atoms);

    static SignalMixture point(double value);
    /// gamma * delta_0 + (1 - gamma) * delta_h.
    static SignalMixture sparse(double gamma, double h);

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }

    /// Mass at zero (gamma).
    double null_weight() const noexcept;
    double second_moment() const noexcept;
    double max_abs_value() const noexcept;

    /// Law of c * B0.
    SignalMixture scaled(double c) const;
    /// Non-null part pi_1 (renormalized). Throws if there is no non-null mass.
    SignalMixture nonnull_part() const;
    /// 1/2 delta_0 + 1/2 * this: the coefficient law seen by a lasso on [X, X_tilde].
    SignalMixture doubled() const;

    /// Inverse-CDF draw from a uniform in (0, 1).
    double draw(double uniform) const noexcept;

    std::string describe() const;

private:
    std::vector<Atom> atoms_;
};

}  // namespace mxpl
