#include "mxpl/signal_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mxpl {

SignalMixture::SignalMixture(std::vector<Atom> atoms) {
    if (atoms.empty()) throw Error("signal mixture needs at least one atom");
    double total = 0.0;
    double zero_weight = 0.0;
    bool has_zero = false;
    for (const auto& a : atoms) {
        if (!std::isfinite(a.value) || !std::isfinite(a.weight)) throw Error("signal mixture atom is not finite");
        if (a.weight < 0.0) throw Error("signal mixture weight is negative");
        total += a.weight;
        if (a.value == 0.0) {
            zero_weight += a.weight;
            has_zero = true;
        } else if (a.weight > 0.0) {
            atoms_.push_back(a);
        }
    }
    if (std::abs(total - 1.0) > 1e-12) throw Error("signal mixture weights must sum to 1");
    if (has_zero && zero_weight > 0.0) atoms_.insert(atoms_.begin(), Atom{0.0, zero_weight});
    if (atoms_.empty()) atoms_.push_back(Atom{0.0, 1.0});
}

SignalMixture SignalMixture::point(double value) { return SignalMixture({{value, 1.0}}); }

SignalMixture SignalMixture::sparse(double gamma, double h) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error("gamma must lie in [0, 1]");
    return SignalMixture({{0.0, gamma}, {h, 1.0 - gamma}});
}

double SignalMixture::null_weight() const noexcept {
    double w = 0.0;
    for (const auto& a : atoms_)
        if (a.value == 0.0) w += a.weight;
    return w;
}

double SignalMixture::second_moment() const noexcept {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.weight * a.value * a.value;
    return m;
}

double SignalMixture::max_abs_value() const noexcept {
    double m = 0.0;
    for (const auto& a : atoms_) m = std::max(m, std::abs(a.value));
    return m;
}

SignalMixture SignalMixture::scaled(double c) const {
    if (!std::isfinite(c)) throw Error("mixture scale must be finite");
    std::vector<Atom> out;
    out.reserve(atoms_.size());
    for (const auto& a : atoms_) out.push_back({a.value * c, a.weight});
    return SignalMixture(std::move(out));
}

SignalMixture SignalMixture::nonnull_part() const {
    const double mass = 1.0 - null_weight();
    if (mass <= 0.0) throw Error("signal mixture has no non-null mass");
    std::vector<Atom> out;
    double total = 0.0;
    for (const auto& a : atoms_)
        if (a.value != 0.0) {
            out.push_back({a.value, a.weight / mass});
            total += a.weight / mass;
        }
    // Absorb rounding so the invariant holds exactly.
    out.back().weight += 1.0 - total;
    return SignalMixture(std::move(out));
}

SignalMixture SignalMixture::doubled() const {
    std::vector<Atom> out;
    out.push_back({0.0, 0.5});
    for (const auto& a : atoms_) out.push_back({a.value, 0.5 * a.weight});
    return SignalMixture(std::move(out));
}

double SignalMixture::draw(double uniform) const noexcept {
    double acc = 0.0;
    for (const auto& a : atoms_) {
        acc += a.weight;
        if (uniform < acc) return a.value;
    }
    return atoms_.back().value;
}

std::string SignalMixture::describe() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (i) os << " + ";
        os << atoms_[i].weight << "*delta(" << atoms_[i].value << ")";
    }
    return os.str();
}

}  // namespace mxpl
