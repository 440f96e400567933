#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "modmetric/extreal.hpp"

namespace modmetric {

/// Claims supplied at construction; sweeps verify them, nothing trusts
/// them blindly except operations whose formulas require them (d_w*,
/// the convex limit checks, the convex fundamental inequality).
struct ModularFlags {
    bool convex = false;
    bool strict = false;
    bool finite = false;
};

/// A metric modular: an evaluation rule (lambda, x, y) -> [0, inf]
/// over a carrier of points P, plus its declared flags. Evaluation must
/// be deterministic; lambda <= 0 is rejected before the rule runs.
template <class P>
class Modular {
public:
    using Point = P;
    using EvalFn = std::function<ExtReal(double, const P&, const P&)>;

    Modular() = default;
    Modular(std::string name, EvalFn eval, ModularFlags flags)
        : name_(std::move(name)), eval_(std::move(eval)), flags_(flags) {}

    ExtReal operator()(double lambda, const P& x, const P& y) const {
        require_lambda(lambda);
        return eval_(lambda, x, y);
    }

    static void require_lambda(double lambda) {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw std::invalid_argument(
                "modular evaluation requires a finite lambda > 0");
        }
    }

    const std::string& name() const { return name_; }
    const ModularFlags& flags() const { return flags_; }
    bool claimed_convex() const { return flags_.convex; }
    bool claimed_strict() const { return flags_.strict; }
    bool claimed_finite() const { return flags_.finite; }

private:
    std::string name_;
    EvalFn eval_;
    ModularFlags flags_;
};

/// v_lambda(x, y) = w_lambda(x, y) / lambda. For convex w this is again
/// a modular; strictness and finiteness carry over, convexity is not
/// claimed for the result.
template <class P>
Modular<P> scaled_modular(const Modular<P>& w) {
    ModularFlags f;
    f.convex = false;
    f.strict = w.claimed_strict();
    f.finite = w.claimed_finite();
    return Modular<P>(
        w.name() + "/lambda",
        [w](double lambda, const P& x, const P& y) {
            return scale(1.0 / lambda, w(lambda, x, y));
        },
        f);
}

}  // namespace modmetric
