#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "modmetric/extreal.hpp"

namespace modmetric {

using json = nlohmann::json;

inline json ext_to_json(const ExtReal& v) {
    return v.is_infinite() ? json("inf") : json(v.value());
}

inline ExtReal ext_from_json(const json& j) {
    if (j.is_string()) return ExtReal::from_string(j.get<std::string>());
    return ExtReal(j.get<double>());
}

inline json slack_to_json(double s) {
    return std::isinf(s) ? json("inf") : json(s);
}

/// One failed check, with everything needed to replay it: the sampled
/// inputs, both sides of the inequality, and how far it was exceeded.
struct Witness {
    std::size_t sample_index = 0;
    json inputs = json::object();
    ExtReal lhs;
    ExtReal rhs;
    double slack = 0.0;
    std::string tag;

    json to_json() const {
        json j;
        j["sample"] = sample_index;
        j["inputs"] = inputs;
        j["lhs"] = ext_to_json(lhs);
        j["rhs"] = ext_to_json(rhs);
        j["slack"] = slack_to_json(slack);
        if (!tag.empty()) j["tag"] = tag;
        return j;
    }
};

/// Outcome of a property sweep.
struct CheckReport {
    std::string property;
    std::size_t samples_tested = 0;
    std::vector<Witness> violations;
    double max_slack = 0.0;
    std::map<std::string, std::string> notes;

    bool passed() const { return violations.empty(); }

    json to_json() const {
        json j;
        j["property"] = property;
        j["samples"] = samples_tested;
        j["status"] = passed() ? "pass" : "fail";
        j["max_slack"] = slack_to_json(max_slack);
        json arr = json::array();
        for (const Witness& w : violations) arr.push_back(w.to_json());
        j["violations"] = arr;
        if (!notes.empty()) j["notes"] = notes;
        return j;
    }

    std::string to_text() const {
        std::string line = "property=" + property +
                           " samples=" + std::to_string(samples_tested) +
                           " status=" + (passed() ? "pass" : "fail") +
                           " max_slack=" + slack_to_json(max_slack).dump() +
                           " violations=" + std::to_string(violations.size());
        return line;
    }
};

/// Result of comparing lhs <= rhs. `slack` is the amount by which lhs
/// exceeded rhs (0 when it did not), +inf for a finite bound beaten by
/// an infinite left side.
struct IneqOutcome {
    bool holds = true;
    double slack = 0.0;
};

/// lhs <= rhs within a slack relative to the larger finite side.
/// Comparisons with an infinite side are exact.
inline IneqOutcome check_leq(const ExtReal& lhs, const ExtReal& rhs, double rel_tol) {
    if (rhs.is_infinite()) return {true, 0.0};
    if (lhs.is_infinite()) return {false, std::numeric_limits<double>::infinity()};
    double margin = lhs.value() - rhs.value();
    double tol = rel_tol * std::max(lhs.value(), rhs.value());
    return {margin <= tol, std::max(0.0, margin)};
}

/// lhs <= rhs + abs_tol, absolute slack variant.
inline IneqOutcome check_leq_abs(const ExtReal& lhs, const ExtReal& rhs, double abs_tol) {
    if (rhs.is_infinite()) return {true, 0.0};
    if (lhs.is_infinite()) return {false, std::numeric_limits<double>::infinity()};
    double margin = lhs.value() - rhs.value();
    return {margin <= abs_tol, std::max(0.0, margin)};
}

/// |a - b| within a slack relative to the larger finite side.
inline IneqOutcome check_eq(const ExtReal& a, const ExtReal& b, double rel_tol) {
    if (a.is_infinite() && b.is_infinite()) return {true, 0.0};
    if (a.is_infinite() || b.is_infinite()) {
        return {false, std::numeric_limits<double>::infinity()};
    }
    double diff = std::abs(a.value() - b.value());
    double tol = rel_tol * std::max(a.value(), b.value());
    return {diff <= tol, diff};
}

}  // namespace modmetric
