#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "modmetric/report.hpp"
#include "modmetric/rng.hpp"
#include "modmetric/spaces.hpp"

namespace modmetric {

/// Raised when a sweep cannot draw the points it needs (for example a
/// distinct pair from a single-point carrier).
class sampling_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 33 log-spaced points on [1e-6, 1e6].
inline std::vector<double> default_lambda_grid() {
    std::vector<double> grid(33);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = std::pow(10.0, -6.0 + 12.0 * static_cast<double>(i) / 32.0);
    }
    return grid;
}

struct SamplingPlan {
    std::uint64_t seed = 0;
    std::size_t n_samples = 1000;
    std::vector<double> lambda_grid = default_lambda_grid();
    double slack_tol = 1e-9;

    // Execution detail only: a sweep's report is identical for every
    // worker count, so this is not part of the serialized plan.
    std::size_t workers = 1;

    void validate() const {
        if (n_samples == 0) throw std::invalid_argument("plan: n_samples must be >= 1");
        if (lambda_grid.empty()) throw std::invalid_argument("plan: empty lambda grid");
        double prev = 0.0;
        for (double l : lambda_grid) {
            if (!(l > 0.0) || !std::isfinite(l)) {
                throw std::invalid_argument("plan: lambda grid entries must be positive finite");
            }
            if (!(l > prev)) {
                throw std::invalid_argument("plan: lambda grid must be strictly ascending");
            }
            prev = l;
        }
        if (!(slack_tol >= 0.0) || !std::isfinite(slack_tol)) {
            throw std::invalid_argument("plan: slack_tol must be a nonnegative real");
        }
        if (workers == 0) throw std::invalid_argument("plan: workers must be >= 1");
    }

    json to_json() const {
        json j;
        j["seed"] = seed;
        j["n_samples"] = n_samples;
        j["lambda_grid"] = lambda_grid;
        j["slack_tol"] = slack_tol;
        return j;
    }
};

/// What one sample contributed to a sweep.
struct SampleResult {
    std::optional<Witness> witness;  // set when the sample violated
    double max_slack = 0.0;          // largest margin seen by this sample's checks
    std::string skip_tag;            // set when the sample was skipped
};

namespace detail {

/// Runs `fn(index, rng)` for every sample index and merges results in
/// index order, so the report is independent of the worker count.
template <class Fn>
CheckReport run_sweep(std::string property, const SamplingPlan& plan, Fn&& fn) {
    plan.validate();
    std::vector<SampleResult> results(plan.n_samples);

    auto worker = [&](std::size_t worker_id, std::size_t stride) {
        for (std::size_t i = worker_id; i < plan.n_samples; i += stride) {
            SplitMix64 rng = sample_stream(plan.seed, i);
            results[i] = fn(i, rng);
        }
    };

    if (plan.workers <= 1) {
        worker(0, 1);
    } else {
        std::vector<std::exception_ptr> errors(plan.workers);
        std::vector<std::thread> pool;
        pool.reserve(plan.workers);
        for (std::size_t t = 0; t < plan.workers; ++t) {
            pool.emplace_back([&, t] {
                try {
                    worker(t, plan.workers);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (std::thread& t : pool) t.join();
        for (const std::exception_ptr& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    CheckReport report;
    report.property = std::move(property);
    report.samples_tested = plan.n_samples;
    std::size_t skipped = 0;
    std::map<std::string, std::size_t> skip_tags;
    for (std::size_t i = 0; i < plan.n_samples; ++i) {
        SampleResult& r = results[i];
        report.max_slack = std::max(report.max_slack, r.max_slack);
        if (r.witness) {
            r.witness->sample_index = i;
            report.violations.push_back(std::move(*r.witness));
        }
        if (!r.skip_tag.empty()) {
            ++skipped;
            ++skip_tags[r.skip_tag];
        }
    }
    if (skipped > 0) {
        report.notes["skipped"] = std::to_string(skipped);
        for (const auto& [tag, count] : skip_tags) {
            report.notes["skipped_" + tag] = std::to_string(count);
        }
    }
    return report;
}

}  // namespace detail

template <PointSpace S>
typename S::Point sample_distinct_from(const S& space, const typename S::Point& x,
                                       SplitMix64& rng) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        auto y = space.sample(rng);
        if (!space.equal(x, y)) return y;
    }
    throw sampling_error(
        "sampler cannot produce distinct points (single-point carrier?)");
}

}  // namespace modmetric
