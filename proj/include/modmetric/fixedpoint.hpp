#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "modmetric/induced.hpp"
#include "modmetric/modular.hpp"
#include "modmetric/sampling.hpp"
#include "modmetric/spaces.hpp"

namespace modmetric {

/// A self-map of the carrier. Closedness is checked on every
/// application through apply_checked.
template <class P>
struct SelfMap {
    std::string name;
    std::function<P(const P&)> apply;
};

template <PointSpace S>
typename S::Point apply_checked(const S& space, const SelfMap<typename S::Point>& map,
                                const typename S::Point& x) {
    auto y = map.apply(x);
    if (!space.contains(y)) {
        throw std::domain_error("self-map '" + map.name + "' left the carrier at " +
                                space.point_json(x).dump());
    }
    return y;
}

struct ContractionParams {
    double k = 0.5;
    double lambda0 = 1.0;

    void validate() const {
        if (!(k > 0.0) || !(k < 1.0)) {
            throw std::invalid_argument("contraction: k must lie in (0,1)");
        }
        if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) {
            throw std::invalid_argument("contraction: lambda0 must be positive");
        }
    }
};

namespace detail {

// lambda in (0, lambda0], log-uniform with the endpoint injected every
// 8th sample; pairs where w has no finite value at the drawn lambda are
// skipped and tagged, they constrain nothing.
inline double draw_contraction_lambda(double lambda0, std::size_t index, SplitMix64& rng) {
    if (index % 8 == 0) return lambda0;
    return rng.log_uniform(lambda0 * 1e-6, lambda0);
}

}  // namespace detail

/// Definition of a w-contraction: w_{k lambda}(Tx, Ty) <= w_lambda(x, y)
/// for all 0 < lambda <= lambda0.
template <PointSpace S>
CheckReport verify_contraction(const Modular<typename S::Point>& w, const S& space,
                               const SelfMap<typename S::Point>& map,
                               const ContractionParams& p, const SamplingPlan& plan,
                               bool strong = false) {
    using P = typename S::Point;
    p.validate();
    return detail::run_sweep(
        strong ? "strong_contraction" : "contraction", plan,
        [&](std::size_t index, SplitMix64& rng) -> SampleResult {
            SampleResult res;
            double lambda = detail::draw_contraction_lambda(p.lambda0, index, rng);
            P x = space.sample(rng);
            P y = (index % 8 == 4) ? x : space.sample(rng);
            ExtReal wxy = w(lambda, x, y);
            if (wxy.is_infinite()) {
                res.skip_tag = "no-finite-value";
                return res;
            }
            P tx = apply_checked(space, map, x);
            P ty = apply_checked(space, map, y);
            ExtReal lhs = w(p.k * lambda, tx, ty);
            ExtReal rhs = strong ? scale(p.k, wxy) : wxy;
            IneqOutcome out = check_leq(lhs, rhs, plan.slack_tol);
            res.max_slack = out.slack;
            if (!out.holds) {
                Witness wit;
                wit.inputs = {{"lambda", lambda}, {"k", p.k},
                              {"x", space.point_json(x)}, {"y", space.point_json(y)},
                              {"Tx", space.point_json(tx)}, {"Ty", space.point_json(ty)}};
                wit.lhs = lhs;
                wit.rhs = rhs;
                wit.slack = out.slack;
                res.witness = wit;
            }
            return res;
        });
}

template <PointSpace S>
CheckReport verify_strong_contraction(const Modular<typename S::Point>& w, const S& space,
                                      const SelfMap<typename S::Point>& map,
                                      const ContractionParams& p,
                                      const SamplingPlan& plan) {
    return verify_contraction(w, space, map, p, plan, /*strong=*/true);
}

enum class ContractionMode { plain, strong };

/// Bisects k over (0,1) against the sampled contraction check on a
/// fixed sample set drawn once from the plan. Returns the smallest
/// passing k within tol, or nothing if even k = 1 - tol fails. The
/// passing predicate is monotone in k because w is non-increasing in
/// lambda.
template <PointSpace S>
std::optional<double> estimate_min_k(const Modular<typename S::Point>& w, const S& space,
                                     const SelfMap<typename S::Point>& map, double lambda0,
                                     ContractionMode mode, const SamplingPlan& plan,
                                     double tol = 1e-4) {
    using P = typename S::Point;
    plan.validate();
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) {
        throw std::invalid_argument("estimate_min_k: lambda0 must be positive");
    }
    if (!(tol > 0.0) || !(tol < 0.5)) {
        throw std::invalid_argument("estimate_min_k: tol must lie in (0, 0.5)");
    }

    struct Draw {
        double lambda;
        P x, y, tx, ty;
        ExtReal wxy;
    };
    std::vector<Draw> draws;
    draws.reserve(plan.n_samples);
    for (std::size_t i = 0; i < plan.n_samples; ++i) {
        SplitMix64 rng = sample_stream(plan.seed, i);
        double lambda = detail::draw_contraction_lambda(lambda0, i, rng);
        P x = space.sample(rng);
        P y = (i % 8 == 4) ? x : space.sample(rng);
        ExtReal wxy = w(lambda, x, y);
        if (wxy.is_infinite()) continue;
        draws.push_back(Draw{lambda, x, y, apply_checked(space, map, x),
                             apply_checked(space, map, y), wxy});
    }

    auto passes = [&](double k) {
        for (const Draw& d : draws) {
            ExtReal lhs = w(k * d.lambda, d.tx, d.ty);
            ExtReal rhs = mode == ContractionMode::strong ? scale(k, d.wxy) : d.wxy;
            if (!check_leq(lhs, rhs, plan.slack_tol).holds) return false;
        }
        return true;
    };

    double hi = 1.0 - tol;
    if (!passes(hi)) return std::nullopt;
    double lo = 0.0;  // conceptual open endpoint, never evaluated
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (passes(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

namespace detail {

// Shared shape of the fundamental-inequality sweeps: draw lambda in
// (0, lambda0), split (1-k)*lambda into lambda1 + lambda2, skip
// samples where w_lambda(x,y) is infinite (both bounds assume a finite
// left side). A zero split endpoint stands for the limit from the
// right: the displacement term is evaluated at the lambda floor and,
// if infinite there, the sample is tagged boundary-indeterminate.
constexpr double kLambdaFloor = 1e-9;

struct SplitSample {
    double lambda = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

inline SplitSample draw_split(double lambda0, double k, std::size_t index,
                              SplitMix64& rng) {
    SplitSample s;
    double u = rng.unit();
    if (u <= 0.0) u = 0.5;
    s.lambda = lambda0 * u;
    double budget = (1.0 - k) * s.lambda;
    switch (index % 8) {
        case 0: s.lambda1 = 0.5 * budget; break;
        case 2: s.lambda1 = 0.0; break;
        case 6: s.lambda1 = budget; break;
        default: s.lambda1 = budget * rng.unit(); break;
    }
    s.lambda2 = budget - s.lambda1;
    return s;
}

}  // namespace detail

/// Fundamental inequality for w-contractions on a convex modular:
///   w_lambda(x,y) <= (lambda1 w_{lambda1}(x,Tx) + lambda2 w_{lambda2}(y,Ty))
///                    / (lambda (1-k)).
template <PointSpace S>
CheckReport check_fund1(const Modular<typename S::Point>& w, const S& space,
                        const SelfMap<typename S::Point>& map, const ContractionParams& p,
                        const SamplingPlan& plan) {
    using P = typename S::Point;
    p.validate();
    if (!w.claimed_convex()) {
        throw std::invalid_argument("check_fund1 requires a convex modular");
    }
    return detail::run_sweep(
        "fundamental_inequality", plan,
        [&](std::size_t index, SplitMix64& rng) -> SampleResult {
            SampleResult res;
            auto s = detail::draw_split(p.lambda0, p.k, index, rng);
            P x = space.sample(rng);
            P y = (index % 8 == 4) ? x : space.sample(rng);
            ExtReal lhs = w(s.lambda, x, y);
            if (lhs.is_infinite()) {
                res.skip_tag = "nonfinite-lhs";
                return res;
            }
            P tx = apply_checked(space, map, x);
            P ty = apply_checked(space, map, y);

            // lambda_i * w_{lambda_i}(a, b); at lambda_i = 0 the term is
            // its limit from the right, approximated at the lambda
            // floor (for w ~ d/lambda this limit is d, not 0). An
            // infinite value at the floor leaves 0 * inf indeterminate
            // and the sample is tagged instead of judged.
            auto weighted_term = [&](double li, const P& a,
                                     const P& b) -> std::optional<ExtReal> {
                double l = li > 0.0 ? li : detail::kLambdaFloor;
                ExtReal v = w(l, a, b);
                if (li == 0.0 && v.is_infinite()) return std::nullopt;
                return scale(l, v);
            };
            auto t1 = weighted_term(s.lambda1, x, tx);
            auto t2 = weighted_term(s.lambda2, y, ty);
            if (!t1 || !t2) {
                res.skip_tag = "boundary-indeterminate";
                return res;
            }
            ExtReal rhs = scale(1.0 / (s.lambda * (1.0 - p.k)), *t1 + *t2);
            IneqOutcome out = check_leq(lhs, rhs, plan.slack_tol);
            res.max_slack = out.slack;
            if (!out.holds) {
                Witness wit;
                wit.inputs = {{"lambda", s.lambda}, {"lambda1", s.lambda1},
                              {"lambda2", s.lambda2}, {"k", p.k},
                              {"x", space.point_json(x)}, {"y", space.point_json(y)}};
                wit.lhs = lhs;
                wit.rhs = rhs;
                wit.slack = out.slack;
                res.witness = wit;
            }
            return res;
        });
}

/// Fundamental inequality for strong w-contractions (no convexity
/// needed):
///   w_lambda(x,y) <= (w_{lambda1}(x,Tx) + w_{lambda2}(y,Ty)) / (1-k).
/// The map must pass the strong contraction check at (k, lambda0) on
/// this plan first.
template <PointSpace S>
CheckReport check_fund2(const Modular<typename S::Point>& w, const S& space,
                        const SelfMap<typename S::Point>& map, const ContractionParams& p,
                        const SamplingPlan& plan) {
    using P = typename S::Point;
    p.validate();
    CheckReport pre = verify_strong_contraction(w, space, map, p, plan);
    if (!pre.passed()) {
        throw std::invalid_argument(
            "check_fund2: map fails the strong contraction check at (k=" +
            std::to_string(p.k) + ", lambda0=" + std::to_string(p.lambda0) + ") with " +
            std::to_string(pre.violations.size()) + " violation(s)");
    }
    return detail::run_sweep(
        "fundamental_inequality_strong", plan,
        [&](std::size_t index, SplitMix64& rng) -> SampleResult {
            SampleResult res;
            auto s = detail::draw_split(p.lambda0, p.k, index, rng);
            P x = space.sample(rng);
            P y = (index % 8 == 4) ? x : space.sample(rng);
            ExtReal lhs = w(s.lambda, x, y);
            if (lhs.is_infinite()) {
                res.skip_tag = "nonfinite-lhs";
                return res;
            }
            P tx = apply_checked(space, map, x);
            P ty = apply_checked(space, map, y);
            auto term = [&](double li, const P& a, const P& b) {
                return w(li > 0.0 ? li : detail::kLambdaFloor, a, b);
            };
            ExtReal t1 = term(s.lambda1, x, tx);
            ExtReal t2 = term(s.lambda2, y, ty);
            if ((s.lambda1 == 0.0 && t1.is_infinite()) ||
                (s.lambda2 == 0.0 && t2.is_infinite())) {
                res.skip_tag = "boundary-indeterminate";
                return res;
            }
            ExtReal rhs = scale(1.0 / (1.0 - p.k), t1 + t2);
            IneqOutcome out = check_leq(lhs, rhs, plan.slack_tol);
            res.max_slack = out.slack;
            if (!out.holds) {
                Witness wit;
                wit.inputs = {{"lambda", s.lambda}, {"lambda1", s.lambda1},
                              {"lambda2", s.lambda2}, {"k", p.k},
                              {"x", space.point_json(x)}, {"y", space.point_json(y)}};
                wit.lhs = lhs;
                wit.rhs = rhs;
                wit.slack = out.slack;
                res.witness = wit;
            }
            return res;
        });
}

/// Palais's metric inequality d(x,y) <= (d(x,Tx) + d(y,Ty)) / (1-k),
/// for a metric contraction with constant k. Contraction is verified on
/// the same sample set first; pairs at infinite distance are skipped.
template <MetricSpace S>
CheckReport check_palais(const S& space, const SelfMap<typename S::Point>& map, double k,
                         const SamplingPlan& plan) {
    using P = typename S::Point;
    if (!(k > 0.0) || !(k < 1.0)) {
        throw std::invalid_argument("check_palais: k must lie in (0,1)");
    }
    plan.validate();

    for (std::size_t i = 0; i < plan.n_samples; ++i) {
        SplitMix64 rng = sample_stream(plan.seed, i);
        P x = space.sample(rng);
        P y = (i % 8 == 4) ? x : space.sample(rng);
        ExtReal dxy = space.distance(x, y);
        if (dxy.is_infinite()) continue;
        ExtReal lhs = space.distance(apply_checked(space, map, x),
                                     apply_checked(space, map, y));
        if (!check_leq(lhs, scale(k, dxy), plan.slack_tol).holds) {
            throw std::invalid_argument(
                "check_palais: map is not a metric contraction with constant k=" +
                std::to_string(k) + " (violated at sample " + std::to_string(i) + ")");
        }
    }

    return detail::run_sweep(
        "palais_inequality", plan, [&](std::size_t index, SplitMix64& rng) -> SampleResult {
            SampleResult res;
            P x = space.sample(rng);
            P y = (index % 8 == 4) ? x : space.sample(rng);
            ExtReal dxy = space.distance(x, y);
            if (dxy.is_infinite()) {
                res.skip_tag = "nonfinite-distance";
                return res;
            }
            ExtReal disp = space.distance(x, apply_checked(space, map, x)) +
                           space.distance(y, apply_checked(space, map, y));
            ExtReal rhs = scale(1.0 / (1.0 - k), disp);
            IneqOutcome out = check_leq(dxy, rhs, plan.slack_tol);
            res.max_slack = out.slack;
            if (!out.holds) {
                Witness wit;
                wit.inputs = {{"k", k}, {"x", space.point_json(x)},
                              {"y", space.point_json(y)}};
                wit.lhs = dxy;
                wit.rhs = rhs;
                wit.slack = out.slack;
                res.witness = wit;
            }
            return res;
        });
}

/// For each grid lambda, hunts the sampled points for one whose
/// displacement w_lambda(x, Tx) is finite; a lambda with no witness is
/// a violation. Also reports whether every sampled value was finite, in
/// which case the displacement condition is redundant.
template <PointSpace S>
CheckReport verify_theorem_conditions(const Modular<typename S::Point>& w, const S& space,
                                      const SelfMap<typename S::Point>& map,
                                      const std::vector<double>& grid,
                                      const SamplingPlan& plan) {
    using P = typename S::Point;
    plan.validate();
    if (grid.empty()) {
        throw std::invalid_argument("verify_theorem_conditions: empty lambda grid");
    }

    std::vector<P> xs;
    std::vector<P> txs;
    xs.reserve(plan.n_samples);
    for (std::size_t i = 0; i < plan.n_samples; ++i) {
        SplitMix64 rng = sample_stream(plan.seed, i);
        xs.push_back(space.sample(rng));
        txs.push_back(apply_checked(space, map, xs.back()));
    }

    CheckReport report;
    report.property = "theorem_conditions";
    report.samples_tested = plan.n_samples;
    bool all_finite = true;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        double lambda = grid[gi];
        std::optional<std::size_t> witness;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            ExtReal v = w(lambda, xs[i], txs[i]);
            if (v.is_infinite()) {
                all_finite = false;
            } else if (!witness) {
                witness = i;
            }
        }
        if (!witness) {
            Witness wit;
            wit.tag = "no-finite-displacement";
            wit.sample_index = gi;
            wit.inputs = {{"lambda", lambda}, {"points_checked", xs.size()}};
            wit.lhs = ExtReal::infinity();
            wit.rhs = ExtReal::infinity();
            wit.slack = std::numeric_limits<double>::infinity();
            report.violations.push_back(std::move(wit));
        }
    }
    report.notes["finite_valued"] = all_finite ? "true" : "false";
    report.notes["displacement_condition"] =
        all_finite ? "redundant (modular finite on all samples)" : "required";
    report.notes["claimed_strict"] = w.claimed_strict() ? "true" : "false";
    report.notes["claimed_convex"] = w.claimed_convex() ? "true" : "false";
    return report;
}

enum class StopReason { residual_met, max_iter, nonfinite_residual };

inline std::string stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::residual_met: return "residual_met";
        case StopReason::max_iter: return "max_iter";
        case StopReason::nonfinite_residual: return "nonfinite_residual";
    }
    throw std::logic_error("unreachable");
}

/// Record of a fixed-point run. Iterates are capped at 10000 entries
/// with head/tail retention; the residual trace is kept in full.
template <class P>
struct SolveReport {
    std::vector<P> iterates;
    bool iterates_truncated = false;
    std::size_t n_iters = 0;
    StopReason stop_reason = StopReason::max_iter;
    std::vector<ExtReal> residuals;
    std::vector<ExtReal> dstar_residuals;  // filled when w is convex
    std::optional<P> approx_fixed_point;
    double lambda_star = 0.0;
    double tol = 0.0;
    std::map<std::string, std::string> notes;

    template <PointSpace S>
    json to_json(const S& space) const {
        json j;
        j["n_iters"] = n_iters;
        j["stop_reason"] = stop_reason_name(stop_reason);
        json rs = json::array();
        for (const ExtReal& r : residuals) rs.push_back(ext_to_json(r));
        j["residuals"] = rs;
        if (!dstar_residuals.empty()) {
            json ds = json::array();
            for (const ExtReal& r : dstar_residuals) ds.push_back(ext_to_json(r));
            j["dstar_residuals"] = ds;
        }
        j["fixed_point"] = approx_fixed_point ? space.point_json(*approx_fixed_point)
                                              : json(nullptr);
        json its = json::array();
        for (const P& p : iterates) its.push_back(space.point_json(p));
        j["iterates"] = its;
        j["iterates_truncated"] = iterates_truncated;
        j["lambda_star"] = lambda_star;
        j["tol"] = tol;
        if (!notes.empty()) j["notes"] = notes;
        return j;
    }
};

namespace detail {

constexpr std::size_t kIterateCap = 10000;

template <class P>
void push_iterate(std::vector<P>& iterates, bool& truncated, const P& p) {
    if (iterates.size() < kIterateCap) {
        iterates.push_back(p);
        return;
    }
    // Keep the first half of the cap and roll the second half.
    truncated = true;
    std::size_t head = kIterateCap / 2;
    std::move(iterates.begin() + static_cast<std::ptrdiff_t>(head) + 1, iterates.end(),
              iterates.begin() + static_cast<std::ptrdiff_t>(head));
    iterates.back() = p;
}

}  // namespace detail

/// Iterates x_{n+1} = T(x_n) from x0, stopping when the successive
/// residual w_{lambda*}(x_n, x_{n+1}) drops to tol, when max_iter steps
/// have run, or when the residual has been infinite for max_iter
/// consecutive steps. When w is convex the d_w* residual is recorded
/// alongside (metric convergence data for the same run).
template <PointSpace S>
SolveReport<typename S::Point> solve(const Modular<typename S::Point>& w, const S& space,
                                     const SelfMap<typename S::Point>& map,
                                     const typename S::Point& x0, double lambda_star,
                                     double tol, std::size_t max_iter,
                                     const BisectionConfig& dstar_cfg = {}) {
    using P = typename S::Point;
    Modular<P>::require_lambda(lambda_star);
    if (!(tol > 0.0) || !std::isfinite(tol)) {
        throw std::invalid_argument("solve: tol must be positive");
    }
    if (max_iter == 0) throw std::invalid_argument("solve: max_iter must be >= 1");
    if (!space.contains(x0)) {
        throw std::invalid_argument("solve: x0 is not in the carrier");
    }

    SolveReport<P> report;
    report.lambda_star = lambda_star;
    report.tol = tol;
    const bool track_dstar = w.claimed_convex();

    P x = x0;
    detail::push_iterate(report.iterates, report.iterates_truncated, x);
    std::size_t consecutive_inf = 0;
    report.stop_reason = StopReason::max_iter;
    for (std::size_t n = 0; n < max_iter; ++n) {
        P next = apply_checked(space, map, x);
        detail::push_iterate(report.iterates, report.iterates_truncated, next);
        ExtReal r = w(lambda_star, x, next);
        report.residuals.push_back(r);
        if (track_dstar) {
            report.dstar_residuals.push_back(d_w_star(w, x, next, dstar_cfg).effective());
        }
        if (r.is_infinite()) {
            if (++consecutive_inf >= max_iter) {
                report.stop_reason = StopReason::nonfinite_residual;
                x = next;
                break;
            }
        } else {
            consecutive_inf = 0;
            if (r <= ExtReal(tol)) {
                report.stop_reason = StopReason::residual_met;
                report.approx_fixed_point = next;
                x = next;
                break;
            }
        }
        x = next;
    }
    report.n_iters = report.residuals.size();

    ExtReal start_to_end = w(lambda_star, x0, x);
    report.notes["w_lambda_star(x0,last)"] = start_to_end.to_string();
    report.notes["same_modular_set_at_lambda_star"] =
        start_to_end.is_finite() ? "true" : "false";
    return report;
}

}  // namespace modmetric
