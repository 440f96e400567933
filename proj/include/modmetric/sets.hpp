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

/// Increasing lambda schedule 10^1 .. 10^8, used to probe the
/// lambda -> infinity limit in modular-set membership.
inline std::vector<double> default_tail_schedule() {
    std::vector<double> s(8);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = std::pow(10.0, static_cast<double>(i) + 1.0);
    }
    return s;
}

/// x in X*_w(x0): some grid lambda gives a finite value. A negative
/// verdict means "no finite value found on the grid".
template <class P>
bool member_star(const Modular<P>& w, const P& x0, const P& x,
                 const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("member_star: empty lambda grid");
    for (double lambda : grid) {
        if (w(lambda, x, x0).is_finite()) return true;
    }
    return false;
}

/// x in X_w(x0): the values along the increasing schedule fall and stay
/// below tol at its tail (the last three entries, guarding against
/// noise right at the tolerance floor).
template <class P>
bool member_zero(const Modular<P>& w, const P& x0, const P& x,
                 const std::vector<double>& schedule, double tol) {
    if (schedule.empty()) throw std::invalid_argument("member_zero: empty schedule");
    for (std::size_t i = 1; i < schedule.size(); ++i) {
        if (!(schedule[i] > schedule[i - 1])) {
            throw std::invalid_argument("member_zero: schedule must be increasing");
        }
    }
    std::size_t tail = std::min<std::size_t>(3, schedule.size());
    for (std::size_t i = schedule.size() - tail; i < schedule.size(); ++i) {
        ExtReal v = w(schedule[i], x, x0);
        if (!(v <= ExtReal(tol))) return false;
    }
    return true;
}

/// Classes of the relation x ~ y iff member_star holds, on a finite
/// carrier. Signals if the relation sampled at this grid is not an
/// equivalence (should not happen for a valid modular).
template <EnumerableSpace S>
std::vector<std::vector<std::size_t>> partition_star(const Modular<typename S::Point>& w,
                                                     const S& space,
                                                     const std::vector<double>& grid) {
    const auto& pts = space.points();
    const std::size_t n = pts.size();
    std::vector<std::vector<bool>> rel(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        rel[i][i] = true;
        for (std::size_t j = i + 1; j < n; ++j) {
            rel[i][j] = member_star(w, pts[i], pts[j], grid);
            rel[j][i] = member_star(w, pts[j], pts[i], grid);
            if (rel[i][j] != rel[j][i]) {
                throw std::runtime_error("partition_star: relation not symmetric at (" +
                                         std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!rel[i][j]) continue;
            for (std::size_t k = 0; k < n; ++k) {
                if (rel[j][k] && !rel[i][k]) {
                    throw std::runtime_error(
                        "partition_star: relation not transitive at (" + std::to_string(i) +
                        "," + std::to_string(j) + "," + std::to_string(k) + ")");
                }
            }
        }
    }
    std::vector<std::vector<std::size_t>> classes;
    std::vector<bool> seen(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (seen[i]) continue;
        std::vector<std::size_t> cls;
        for (std::size_t j = 0; j < n; ++j) {
            if (rel[i][j]) {
                cls.push_back(j);
                seen[j] = true;
            }
        }
        classes.push_back(std::move(cls));
    }
    return classes;
}

template <EnumerableSpace S>
json partition_to_json(const S& space, const std::vector<std::vector<std::size_t>>& classes) {
    json out = json::array();
    for (const auto& cls : classes) {
        json c = json::array();
        for (std::size_t i : cls) c.push_back(space.point_json(space.points()[i]));
        out.push_back(c);
    }
    return json{{"classes", out}};
}

/// For convex w the two modular sets coincide; sweeps sampled pairs and
/// reports every (x0, x) where the star and zero verdicts disagree.
/// `require_convex=false` allows contrast runs on non-convex modulars,
/// where disagreement is expected.
template <PointSpace S>
CheckReport check_prop2(const Modular<typename S::Point>& w, const S& space,
                        const SamplingPlan& plan,
                        const std::vector<double>& schedule = default_tail_schedule(),
                        double tol = 1e-4, bool require_convex = true) {
    using P = typename S::Point;
    if (require_convex && !w.claimed_convex()) {
        throw std::invalid_argument("check_prop2 requires a convex modular");
    }
    return detail::run_sweep(
        "modular_sets_agree", plan, [&](std::size_t index, SplitMix64& rng) -> SampleResult {
            SampleResult res;
            P x0 = space.sample(rng);
            P x = (index % 8 == 4) ? x0 : space.sample(rng);
            bool star = member_star(w, x0, x, plan.lambda_grid);
            bool zero = member_zero(w, x0, x, schedule, tol);
            if (star != zero) {
                Witness wit;
                wit.inputs = {{"x0", space.point_json(x0)},
                              {"x", space.point_json(x)},
                              {"member_star", star},
                              {"member_zero", zero}};
                wit.lhs = ExtReal(star ? 1.0 : 0.0);
                wit.rhs = ExtReal(zero ? 1.0 : 0.0);
                wit.slack = 1.0;
                res.witness = wit;
            }
            return res;
        });
}

/// A finite stretch of a sequence: points x_1 .. x_N.
template <class P>
struct SequenceSpec {
    std::function<P(std::size_t)> at;  // n = 1..length
    std::size_t length = 0;

    void validate() const {
        if (length == 0) throw std::invalid_argument("sequence: length must be >= 1");
        if (!at) throw std::invalid_argument("sequence: missing generator");
    }
};

struct ConvergenceVerdict {
    bool converged = false;
    std::optional<double> witness_lambda;
    std::vector<std::pair<std::size_t, ExtReal>> residual_trace;

    json to_json() const {
        json j;
        j["converged"] = converged;
        j["witness_lambda"] = witness_lambda ? json(*witness_lambda) : json(nullptr);
        json tr = json::array();
        for (const auto& [n, v] : residual_trace) {
            tr.push_back(json::array({n, ext_to_json(v)}));
        }
        j["trace"] = tr;
        return j;
    }
};

namespace detail {

inline std::size_t tail_window(std::size_t n) { return (n + 3) / 4; }  // ceil(N/4)

}  // namespace detail

/// Searches the grid (ascending) for a lambda whose residuals
/// w_lambda(x_n, limit) sit below tol on the tail window; the recorded
/// trace is for the witness lambda, or for the largest grid lambda when
/// nothing converged.
template <class P>
ConvergenceVerdict is_w_convergent(const Modular<P>& w, const SequenceSpec<P>& seq,
                                   const P& limit, const std::vector<double>& grid,
                                   double tol) {
    seq.validate();
    if (grid.empty()) throw std::invalid_argument("is_w_convergent: empty lambda grid");
    const std::size_t window = detail::tail_window(seq.length);
    ConvergenceVerdict verdict;
    for (double lambda : grid) {
        std::vector<std::pair<std::size_t, ExtReal>> trace;
        trace.reserve(seq.length);
        ExtReal tail_max(0.0);
        for (std::size_t n = 1; n <= seq.length; ++n) {
            ExtReal r = w(lambda, seq.at(n), limit);
            trace.emplace_back(n, r);
            if (n > seq.length - window && r > tail_max) tail_max = r;
        }
        verdict.residual_trace = std::move(trace);
        if (tail_max <= ExtReal(tol)) {
            verdict.converged = true;
            verdict.witness_lambda = lambda;
            return verdict;
        }
    }
    return verdict;
}

/// Cauchy variant: max over all pairs among the last ceil(N/4) terms.
/// The trace records, for each tail index n, the worst w-value against
/// any earlier tail term.
template <class P>
ConvergenceVerdict is_w_cauchy(const Modular<P>& w, const SequenceSpec<P>& seq,
                               const std::vector<double>& grid, double tol) {
    seq.validate();
    if (grid.empty()) throw std::invalid_argument("is_w_cauchy: empty lambda grid");
    const std::size_t window = detail::tail_window(seq.length);
    const std::size_t first = seq.length - window + 1;
    std::vector<P> tail;
    tail.reserve(window);
    for (std::size_t n = first; n <= seq.length; ++n) tail.push_back(seq.at(n));

    ConvergenceVerdict verdict;
    for (double lambda : grid) {
        std::vector<std::pair<std::size_t, ExtReal>> trace;
        ExtReal overall(0.0);
        for (std::size_t j = 1; j < tail.size(); ++j) {
            ExtReal worst(0.0);
            for (std::size_t i = 0; i < j; ++i) {
                ExtReal r = w(lambda, tail[i], tail[j]);
                if (r > worst) worst = r;
            }
            trace.emplace_back(first + j, worst);
            if (worst > overall) overall = worst;
        }
        verdict.residual_trace = std::move(trace);
        if (overall <= ExtReal(tol)) {
            verdict.converged = true;
            verdict.witness_lambda = lambda;
            return verdict;
        }
    }
    return verdict;
}

/// For convex w on one modular set, metric convergence in d_w* is
/// equivalent to w_lambda(x_n, x) -> 0 for every lambda. Compares the
/// two verdicts on the supplied sequence at the given grid.
template <class P>
CheckReport check_prop3(const Modular<P>& w, const SequenceSpec<P>& seq, const P& limit,
                        const std::vector<double>& grid, const BisectionConfig& cfg,
                        double tol) {
    seq.validate();
    if (!w.claimed_convex()) {
        throw std::invalid_argument("check_prop3 requires a convex modular");
    }
    if (grid.empty()) throw std::invalid_argument("check_prop3: empty lambda grid");
    const std::size_t window = detail::tail_window(seq.length);

    ExtReal metric_tail_max(0.0);
    for (std::size_t n = seq.length - window + 1; n <= seq.length; ++n) {
        ExtReal v = d_w_star(w, seq.at(n), limit, cfg).effective();
        if (v > metric_tail_max) metric_tail_max = v;
    }
    bool metric_verdict = metric_tail_max <= ExtReal(tol);

    bool modular_verdict = true;
    double failing_lambda = 0.0;
    for (double lambda : grid) {
        ExtReal tail_max(0.0);
        for (std::size_t n = seq.length - window + 1; n <= seq.length; ++n) {
            ExtReal r = w(lambda, seq.at(n), limit);
            if (r > tail_max) tail_max = r;
        }
        if (!(tail_max <= ExtReal(tol))) {
            modular_verdict = false;
            failing_lambda = lambda;
            break;
        }
    }

    CheckReport report;
    report.property = "metric_vs_modular_convergence";
    report.samples_tested = 1;
    report.notes["d_star_tail_max"] = metric_tail_max.to_string();
    report.notes["metric_verdict"] = metric_verdict ? "true" : "false";
    report.notes["modular_verdict"] = modular_verdict ? "true" : "false";
    if (metric_verdict != modular_verdict) {
        Witness wit;
        wit.inputs = {{"metric_verdict", metric_verdict},
                      {"modular_verdict", modular_verdict},
                      {"limit_tol", tol}};
        if (!modular_verdict) wit.inputs["failing_lambda"] = failing_lambda;
        wit.lhs = ExtReal(metric_verdict ? 1.0 : 0.0);
        wit.rhs = ExtReal(modular_verdict ? 1.0 : 0.0);
        wit.slack = 1.0;
        report.violations.push_back(std::move(wit));
    }
    return report;
}

}  // namespace modmetric
