#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "modmetric/modular.hpp"
#include "modmetric/sampling.hpp"
#include "modmetric/spaces.hpp"

namespace modmetric {

struct BisectionConfig {
    double lambda_min = 1e-9;
    double lambda_max = 1e12;
    double tol = 1e-6;  // absolute, on lambda

    void validate() const {
        if (!(lambda_min > 0.0) || !(lambda_max > lambda_min) ||
            !std::isfinite(lambda_max)) {
            throw std::invalid_argument(
                "bisection: need 0 < lambda_min < lambda_max < inf");
        }
        if (!(tol > 0.0) || !std::isfinite(tol)) {
            throw std::invalid_argument("bisection: tol must be positive");
        }
    }

    json to_json() const {
        return json{{"lambda_min", lambda_min}, {"lambda_max", lambda_max}, {"tol", tol}};
    }
};

/// inf{lambda : predicate(lambda)} for a predicate that is monotone
/// false-then-true on the bracket. The returned value is the right
/// bisection endpoint, so the predicate is guaranteed true there and
/// the one-sided error is at most tol. `at_floor` flags a predicate
/// already true at lambda_min: the true infimum may be smaller,
/// possibly 0.
struct InfimumResult {
    ExtReal value;
    bool at_floor = false;

    /// At-floor results collapse to 0 for downstream comparisons; the
    /// raw value stays available for reports.
    ExtReal effective() const { return at_floor ? ExtReal(0.0) : value; }

    json to_json() const {
        json j;
        j["value"] = ext_to_json(value);
        json flags = json::array();
        if (at_floor) flags.push_back("at_floor");
        j["flags"] = flags;
        return j;
    }
};

template <class Pred>
InfimumResult infimum_of_threshold(Pred&& inside, const BisectionConfig& cfg) {
    cfg.validate();
    if (!inside(cfg.lambda_max)) return {ExtReal::infinity(), false};
    if (inside(cfg.lambda_min)) return {ExtReal(cfg.lambda_min), true};
    double lo = cfg.lambda_min;  // predicate false here
    double hi = cfg.lambda_max;  // predicate true here
    while (hi - lo > cfg.tol) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // bracket hit floating-point resolution
        if (inside(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return {ExtReal(hi), false};
}

/// d_w(x,y) = inf{lambda > 0 : w_lambda(x,y) <= lambda}. The predicate
/// is monotone because w is non-increasing in lambda while the bound
/// grows.
template <class P>
InfimumResult d_w(const Modular<P>& w, const P& x, const P& y,
                  const BisectionConfig& cfg = {}) {
    return infimum_of_threshold(
        [&](double lambda) { return w(lambda, x, y) <= ExtReal(lambda); }, cfg);
}

/// d_w*(x,y) = inf{lambda > 0 : w_lambda(x,y) <= 1}, for convex w.
template <class P>
InfimumResult d_w_star(const Modular<P>& w, const P& x, const P& y,
                       const BisectionConfig& cfg = {}) {
    if (!w.claimed_convex()) {
        throw std::invalid_argument("d_w_star requires a modular claimed convex");
    }
    return infimum_of_threshold(
        [&](double lambda) { return w(lambda, x, y) <= ExtReal(1.0); }, cfg);
}

enum class InducedMetric { d_w, d_w_star };

inline std::string induced_metric_name(InducedMetric m) {
    return m == InducedMetric::d_w ? "d_w" : "d_w_star";
}

/// Samples identity, positivity (for strict modulars), symmetry and the
/// triangle inequality of the chosen induced metric. Per-value bisection
/// error is one-sided and at most cfg.tol, so the triangle check gets a
/// 3*tol allowance. Pairs in different modular sets evaluate to
/// infinity and pass the axioms in the extended sense.
template <PointSpace S>
CheckReport check_metric_axioms(InducedMetric kind, const Modular<typename S::Point>& w,
                                const S& space, const SamplingPlan& plan,
                                const BisectionConfig& cfg = {}) {
    using P = typename S::Point;
    cfg.validate();
    if (kind == InducedMetric::d_w_star && !w.claimed_convex()) {
        throw std::invalid_argument("d_w_star requires a modular claimed convex");
    }
    auto metric = [&](const P& a, const P& b) {
        return kind == InducedMetric::d_w ? d_w(w, a, b, cfg) : d_w_star(w, a, b, cfg);
    };
    const double tri_slack = 3.0 * cfg.tol;

    return detail::run_sweep(
        "metric_axioms(" + induced_metric_name(kind) + ")", plan,
        [&](std::size_t index, SplitMix64& rng) -> SampleResult {
            SampleResult res;
            P x = space.sample(rng);
            P y = (index % 8 == 4) ? x : space.sample(rng);
            P z = space.sample(rng);

            auto fail = [&](const char* tag, ExtReal lhs, ExtReal rhs, double slack) {
                Witness wit;
                wit.tag = tag;
                wit.inputs = {{"x", space.point_json(x)},
                              {"y", space.point_json(y)},
                              {"z", space.point_json(z)}};
                wit.lhs = lhs;
                wit.rhs = rhs;
                wit.slack = slack;
                res.witness = wit;
            };

            InfimumResult dxx = metric(x, x);
            ExtReal vxx = dxx.effective();
            if (vxx.is_infinite() || vxx.value() > cfg.tol) {
                fail("identity", vxx, ExtReal(0.0),
                     vxx.is_infinite() ? std::numeric_limits<double>::infinity()
                                       : vxx.value());
                return res;
            }
            res.max_slack = std::max(res.max_slack, vxx.value());

            InfimumResult dxy = metric(x, y);
            InfimumResult dyx = metric(y, x);
            IneqOutcome sym = check_eq(dxy.effective(), dyx.effective(), plan.slack_tol);
            res.max_slack = std::max(res.max_slack, sym.slack);
            if (!sym.holds) {
                fail("symmetry", dxy.effective(), dyx.effective(), sym.slack);
                return res;
            }

            if (w.claimed_strict() && !space.equal(x, y)) {
                ExtReal vxy = dxy.effective();
                if (!(vxy > ExtReal(cfg.tol))) {
                    fail("positivity", vxy, ExtReal(cfg.tol),
                         cfg.tol - vxy.value());
                    return res;
                }
            }

            InfimumResult dxz = metric(x, z);
            InfimumResult dzy = metric(z, y);
            IneqOutcome tri = check_leq_abs(dxy.effective(),
                                            dxz.effective() + dzy.effective(), tri_slack);
            res.max_slack = std::max(res.max_slack, tri.slack);
            if (!tri.holds) {
                fail("triangle", dxy.effective(), dxz.effective() + dzy.effective(),
                     tri.slack);
            }
            return res;
        });
}

/// Evaluates the chain d_w <= d_w* <= 2 d_w per sampled pair and reports
/// each side that fails. The chain is reported, not asserted: it does
/// not hold for every convex modular (the average-speed modular breaks
/// the first inequality whenever d(x,y) < 1).
template <PointSpace S>
CheckReport check_equivalence_claim(const Modular<typename S::Point>& w, const S& space,
                                    const SamplingPlan& plan,
                                    const BisectionConfig& cfg = {}) {
    using P = typename S::Point;
    cfg.validate();
    if (!w.claimed_convex()) {
        throw std::invalid_argument("check_equivalence_claim requires a convex modular");
    }
    const double slack = 3.0 * cfg.tol;

    return detail::run_sweep(
        "equivalence_claim", plan,
        [&](std::size_t index, SplitMix64& rng) -> SampleResult {
            SampleResult res;
            P x = space.sample(rng);
            P y = (index % 8 == 4) ? x : space.sample(rng);
            ExtReal a = d_w(w, x, y, cfg).effective();
            ExtReal b = d_w_star(w, x, y, cfg).effective();

            auto fail = [&](const char* tag, ExtReal lhs, ExtReal rhs, double amount) {
                Witness wit;
                wit.tag = tag;
                wit.inputs = {{"x", space.point_json(x)},
                              {"y", space.point_json(y)},
                              {"d_w", ext_to_json(a)},
                              {"d_w_star", ext_to_json(b)}};
                wit.lhs = lhs;
                wit.rhs = rhs;
                wit.slack = amount;
                res.witness = wit;
            };

            IneqOutcome first = check_leq_abs(a, b, slack);
            res.max_slack = std::max(res.max_slack, first.slack);
            if (!first.holds) {
                fail("d_w<=d_w_star", a, b, first.slack);
                return res;
            }
            ExtReal twice = scale(2.0, a);
            IneqOutcome second = check_leq_abs(b, twice, slack);
            res.max_slack = std::max(res.max_slack, second.slack);
            if (!second.holds) {
                fail("d_w_star<=2*d_w", b, twice, second.slack);
            }
            return res;
        });
}

}  // namespace modmetric
