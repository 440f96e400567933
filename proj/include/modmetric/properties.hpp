#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "modmetric/modular.hpp"
#include "modmetric/sampling.hpp"
#include "modmetric/spaces.hpp"

namespace modmetric {

/// Properties a modular can be swept for. axiom1 tests the weak reading
/// of the identity axiom (zero on the diagonal for every grid lambda,
/// and some grid lambda separating each distinct pair); the all-lambda
/// reading is exactly `strictness`, exposed separately.
enum class Property {
    axiom1,
    symmetry,
    triangle3,
    convexity,
    strictness,
    monotone_lambda,
    convex_limits,
};

inline std::string property_name(Property p) {
    switch (p) {
        case Property::axiom1: return "axiom1";
        case Property::symmetry: return "symmetry";
        case Property::triangle3: return "triangle3";
        case Property::convexity: return "convexity";
        case Property::strictness: return "strictness";
        case Property::monotone_lambda: return "monotone_lambda";
        case Property::convex_limits: return "convex_limits";
    }
    throw std::logic_error("unreachable");
}

inline Property property_from_name(const std::string& name) {
    for (Property p : {Property::axiom1, Property::symmetry, Property::triangle3,
                       Property::convexity, Property::strictness,
                       Property::monotone_lambda, Property::convex_limits}) {
        if (property_name(p) == name) return p;
    }
    throw std::invalid_argument("unknown property: " + name);
}

namespace detail {

// Sample shapes shared by triangle3/convexity. Every 8th sample takes
// the z=y, mu=lambda corner (the construction that separates convex
// from non-convex modulars); every 8th (offset 4) collapses x=y.
struct TripleSample {
    double lambda = 0.0;
    double mu = 0.0;
};

inline TripleSample draw_lambda_mu(const std::vector<double>& grid, std::size_t index,
                                   SplitMix64& rng) {
    TripleSample t;
    t.lambda = rng.log_uniform(grid.front(), grid.back());
    t.mu = (index % 8 == 0) ? t.lambda : rng.log_uniform(grid.front(), grid.back());
    return t;
}

}  // namespace detail

template <PointSpace S>
CheckReport check_property(const Modular<typename S::Point>& w, const S& space,
                           Property prop, const SamplingPlan& plan) {
    using P = typename S::Point;
    plan.validate();
    const std::vector<double>& grid = plan.lambda_grid;
    const double tol = plan.slack_tol;

    if (prop == Property::convex_limits && !w.claimed_convex()) {
        throw std::invalid_argument(
            "check_property(convex_limits) requires a modular claimed convex");
    }

    auto run = [&](auto&& per_sample) {
        return detail::run_sweep(property_name(prop), plan, per_sample);
    };

    switch (prop) {
        case Property::axiom1:
            return run([&](std::size_t, SplitMix64& rng) -> SampleResult {
                SampleResult res;
                P x = space.sample(rng);
                for (double lambda : grid) {
                    ExtReal v = w(lambda, x, x);
                    double slack = v.is_infinite()
                                       ? std::numeric_limits<double>::infinity()
                                       : v.value();
                    res.max_slack = std::max(res.max_slack, slack);
                    if (v.is_infinite() || v.value() > tol) {
                        Witness wit;
                        wit.tag = "identity";
                        wit.inputs = {{"lambda", lambda}, {"x", space.point_json(x)}};
                        wit.lhs = v;
                        wit.rhs = ExtReal(0.0);
                        wit.slack = slack;
                        res.witness = wit;
                        return res;
                    }
                }
                P y = sample_distinct_from(space, x, rng);
                ExtReal max_val(0.0);
                for (double lambda : grid) {
                    ExtReal v = w(lambda, x, y);
                    if (v > max_val) max_val = v;
                    if (max_val.is_infinite()) break;
                }
                if (!(max_val > ExtReal(tol))) {
                    Witness wit;
                    wit.tag = "separation";
                    wit.inputs = {{"x", space.point_json(x)}, {"y", space.point_json(y)}};
                    wit.lhs = max_val;
                    wit.rhs = ExtReal(tol);
                    wit.slack = tol - max_val.value();
                    res.witness = wit;
                }
                return res;
            });

        case Property::symmetry:
            return run([&](std::size_t index, SplitMix64& rng) -> SampleResult {
                SampleResult res;
                P x = space.sample(rng);
                P y = (index % 8 == 4) ? x : space.sample(rng);
                for (double lambda : grid) {
                    ExtReal a = w(lambda, x, y);
                    ExtReal b = w(lambda, y, x);
                    IneqOutcome out = check_eq(a, b, tol);
                    res.max_slack = std::max(res.max_slack, out.slack);
                    if (!out.holds) {
                        Witness wit;
                        wit.inputs = {{"lambda", lambda},
                                      {"x", space.point_json(x)},
                                      {"y", space.point_json(y)}};
                        wit.lhs = a;
                        wit.rhs = b;
                        wit.slack = out.slack;
                        res.witness = wit;
                        return res;
                    }
                }
                return res;
            });

        case Property::triangle3:
            return run([&](std::size_t index, SplitMix64& rng) -> SampleResult {
                SampleResult res;
                auto t = detail::draw_lambda_mu(grid, index, rng);
                P x = space.sample(rng);
                P y = (index % 8 == 4) ? x : space.sample(rng);
                P z = (index % 8 == 0) ? y : space.sample(rng);
                ExtReal lhs = w(t.lambda + t.mu, x, y);
                ExtReal rhs = w(t.lambda, x, z) + w(t.mu, y, z);
                IneqOutcome out = check_leq(lhs, rhs, tol);
                res.max_slack = out.slack;
                if (!out.holds) {
                    Witness wit;
                    wit.inputs = {{"lambda", t.lambda}, {"mu", t.mu},
                                  {"x", space.point_json(x)},
                                  {"y", space.point_json(y)},
                                  {"z", space.point_json(z)}};
                    wit.lhs = lhs;
                    wit.rhs = rhs;
                    wit.slack = out.slack;
                    res.witness = wit;
                }
                return res;
            });

        case Property::convexity:
            return run([&](std::size_t index, SplitMix64& rng) -> SampleResult {
                SampleResult res;
                auto t = detail::draw_lambda_mu(grid, index, rng);
                P x = space.sample(rng);
                P y = (index % 8 == 4) ? x : space.sample(rng);
                P z = (index % 8 == 0) ? y : space.sample(rng);
                double sum = t.lambda + t.mu;
                ExtReal lhs = w(sum, x, y);
                ExtReal rhs = scale(t.lambda / sum, w(t.lambda, x, z)) +
                              scale(t.mu / sum, w(t.mu, z, y));
                IneqOutcome out = check_leq(lhs, rhs, tol);
                res.max_slack = out.slack;
                if (!out.holds) {
                    Witness wit;
                    wit.inputs = {{"lambda", t.lambda}, {"mu", t.mu},
                                  {"x", space.point_json(x)},
                                  {"y", space.point_json(y)},
                                  {"z", space.point_json(z)}};
                    wit.lhs = lhs;
                    wit.rhs = rhs;
                    wit.slack = out.slack;
                    res.witness = wit;
                }
                return res;
            });

        case Property::strictness:
            return run([&](std::size_t, SplitMix64& rng) -> SampleResult {
                SampleResult res;
                P x = space.sample(rng);
                P y = sample_distinct_from(space, x, rng);
                for (double lambda : grid) {
                    ExtReal v = w(lambda, x, y);
                    if (v == ExtReal(0.0)) {
                        Witness wit;
                        wit.inputs = {{"lambda", lambda},
                                      {"x", space.point_json(x)},
                                      {"y", space.point_json(y)}};
                        wit.lhs = v;
                        wit.rhs = ExtReal(0.0);
                        wit.slack = 0.0;
                        res.witness = wit;
                        return res;
                    }
                }
                return res;
            });

        case Property::monotone_lambda:
            return run([&](std::size_t index, SplitMix64& rng) -> SampleResult {
                SampleResult res;
                P x = space.sample(rng);
                P y = (index % 8 == 4) ? x : space.sample(rng);
                ExtReal prev = w(grid.front(), x, y);
                for (std::size_t i = 1; i < grid.size(); ++i) {
                    ExtReal cur = w(grid[i], x, y);
                    IneqOutcome out = check_leq(cur, prev, tol);
                    res.max_slack = std::max(res.max_slack, out.slack);
                    if (!out.holds) {
                        Witness wit;
                        wit.inputs = {{"lambda1", grid[i - 1]}, {"lambda2", grid[i]},
                                      {"x", space.point_json(x)},
                                      {"y", space.point_json(y)}};
                        wit.lhs = cur;
                        wit.rhs = prev;
                        wit.slack = out.slack;
                        res.witness = wit;
                        return res;
                    }
                    prev = cur;
                }
                return res;
            });

        case Property::convex_limits:
            // Limit behavior of a convex modular: w must decay toward 0
            // as lambda grows and blow up as lambda -> 0+, at least as
            // fast as the bound w_{l'} <= (l/l') w_l that convexity
            // yields with z=y. The factor-10 headroom keeps this a
            // sanity bound rather than a tight decay-rate assertion.
            return run([&](std::size_t, SplitMix64& rng) -> SampleResult {
                SampleResult res;
                P x = space.sample(rng);
                P y = sample_distinct_from(space, x, rng);
                std::vector<ExtReal> values;
                values.reserve(grid.size());
                for (double lambda : grid) values.push_back(w(lambda, x, y));

                std::optional<std::size_t> ref;
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    if (values[i].is_finite() && values[i] > ExtReal(0.0)) {
                        ref = i;
                        break;
                    }
                }
                if (!ref) {
                    res.skip_tag = "no-finite-positive-value";
                    return res;
                }
                double lambda_ref = grid[*ref];
                ExtReal w_ref = values[*ref];

                ExtReal decay_bound = scale(10.0 * lambda_ref / grid.back(), w_ref);
                IneqOutcome decay = check_leq(values.back(), decay_bound, tol);
                res.max_slack = std::max(res.max_slack, decay.slack);
                if (!decay.holds) {
                    Witness wit;
                    wit.tag = "decay";
                    wit.inputs = {{"lambda_ref", lambda_ref},
                                  {"lambda_max", grid.back()},
                                  {"x", space.point_json(x)},
                                  {"y", space.point_json(y)}};
                    wit.lhs = values.back();
                    wit.rhs = decay_bound;
                    wit.slack = decay.slack;
                    res.witness = wit;
                    return res;
                }

                ExtReal growth_bound = scale(lambda_ref / grid.front() / 10.0, w_ref);
                IneqOutcome growth = check_leq(growth_bound, values.front(), tol);
                res.max_slack = std::max(res.max_slack, growth.slack);
                if (!growth.holds) {
                    Witness wit;
                    wit.tag = "growth";
                    wit.inputs = {{"lambda_ref", lambda_ref},
                                  {"lambda_min", grid.front()},
                                  {"x", space.point_json(x)},
                                  {"y", space.point_json(y)}};
                    wit.lhs = growth_bound;
                    wit.rhs = values.front();
                    wit.slack = growth.slack;
                    res.witness = wit;
                }
                return res;
            });
    }
    throw std::logic_error("unreachable");
}

}  // namespace modmetric
