#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "modmetric/induced.hpp"
#include "modmetric/spaces.hpp"

using namespace modmetric;

namespace {

using RealPoint = EuclideanSpace::Point;

RealPoint pt(double x) { return RealPoint{x}; }

}  // namespace

TEST_CASE("infimum of a monotone threshold predicate") {
    BisectionConfig cfg;

    InfimumResult step = infimum_of_threshold([](double l) { return l >= 2.0; }, cfg);
    CHECK_FALSE(step.at_floor);
    CHECK(step.value.value() == Catch::Approx(2.0).margin(1e-6));
    CHECK(step.value.value() >= 2.0);  // right endpoint: predicate holds there

    InfimumResult empty = infimum_of_threshold([](double) { return false; }, cfg);
    CHECK(empty.value.is_infinite());

    InfimumResult floor = infimum_of_threshold([](double) { return true; }, cfg);
    CHECK(floor.at_floor);
    CHECK(floor.value == ExtReal(1e-9));
    CHECK(floor.effective() == ExtReal(0.0));

    CHECK_THROWS_AS(infimum_of_threshold([](double) { return true; },
                                         BisectionConfig{1.0, 0.5, 1e-6}),
                    std::invalid_argument);
}

TEST_CASE("induced metrics of the average-speed modular have closed forms") {
    EuclideanSpace line(1);
    Modular<RealPoint> speed = builtin_modular(line, BuiltinModular::average_speed);
    BisectionConfig cfg;

    for (double d : {0.25, 1.0, 4.0, 100.0}) {
        InfimumResult dw = d_w(speed, pt(0.0), pt(d), cfg);
        InfimumResult dws = d_w_star(speed, pt(0.0), pt(d), cfg);
        CHECK(std::abs(dw.value.value() - std::sqrt(d)) <= 1e-6);
        CHECK(std::abs(dws.value.value() - d) <= 1e-6);
    }

    InfimumResult same = d_w(speed, pt(3.0), pt(3.0), cfg);
    CHECK(same.at_floor);
    CHECK(same.effective() == ExtReal(0.0));
    CHECK(d_w_star(speed, pt(3.0), pt(3.0), cfg).at_floor);
}

TEST_CASE("induced metrics of the step modular equal the base distance") {
    EuclideanSpace line(1);
    Modular<RealPoint> step = builtin_modular(line, BuiltinModular::step);
    for (double d : {0.25, 1.0, 4.0, 100.0}) {
        CHECK(std::abs(d_w(step, pt(0.0), pt(d)).value.value() - d) <= 1e-6);
        CHECK(std::abs(d_w_star(step, pt(0.0), pt(d)).value.value() - d) <= 1e-6);
    }
}

TEST_CASE("d_w_star rejects non-convex modulars") {
    EuclideanSpace line(1);
    Modular<RealPoint> constant = builtin_modular(line, BuiltinModular::metric_as_modular);
    CHECK_THROWS_AS(d_w_star(constant, pt(0.0), pt(1.0)), std::invalid_argument);
}

TEST_CASE("d_w of the constant modular is computable (no convexity needed)") {
    EuclideanSpace line(1);
    Modular<RealPoint> constant = builtin_modular(line, BuiltinModular::metric_as_modular);
    // w = d everywhere, so the threshold set is {lambda >= d}
    CHECK(std::abs(d_w(constant, pt(0.0), pt(4.0)).value.value() - 4.0) <= 1e-6);
}

TEST_CASE("threshold predicate stays true past its flip on the grid") {
    EuclideanSpace line(1);
    SplitMix64 rng(21);
    std::vector<double> grid = default_lambda_grid();
    for (BuiltinModular kind : {BuiltinModular::metric_as_modular,
                                BuiltinModular::average_speed, BuiltinModular::step}) {
        Modular<RealPoint> w = builtin_modular(line, kind);
        for (int i = 0; i < 200; ++i) {
            RealPoint x = line.sample(rng), y = line.sample(rng);
            bool seen_true = false;
            for (double lambda : grid) {
                bool inside = leq(w(lambda, x, y), ExtReal(lambda));
                if (seen_true) CHECK(inside);
                seen_true |= inside;
            }
        }
    }
}

TEST_CASE("shrinking tol never worsens the bisection error") {
    EuclideanSpace line(1);
    Modular<RealPoint> speed = builtin_modular(line, BuiltinModular::average_speed);
    for (double d : {0.25, 4.0, 100.0}) {
        double analytic = std::sqrt(d);
        double prev_err = std::numeric_limits<double>::infinity();
        for (double tol : {1e-2, 1e-4, 1e-6}) {
            BisectionConfig cfg;
            cfg.tol = tol;
            double err = std::abs(d_w(speed, pt(0.0), pt(d), cfg).value.value() - analytic);
            CHECK(err <= tol);
            CHECK(err <= prev_err);
            prev_err = err;
        }
    }
}

TEST_CASE("metric axiom sweeps pass for both induced metrics") {
    EuclideanSpace line(1);
    SamplingPlan plan;
    plan.seed = 42;
    plan.n_samples = 300;

    for (BuiltinModular kind : {BuiltinModular::average_speed, BuiltinModular::step}) {
        Modular<RealPoint> w = builtin_modular(line, kind);
        for (InducedMetric m : {InducedMetric::d_w, InducedMetric::d_w_star}) {
            CheckReport report = check_metric_axioms(m, w, line, plan);
            INFO(w.name() << " / " << induced_metric_name(m));
            CHECK(report.passed());
        }
    }
}

TEST_CASE("equivalence claim: passes at d=4, violated at d=0.25") {
    // 3-point space carrying both distances
    FiniteSpace space = FiniteSpace::from_doubles({{0, 0.25, 4}, {0.25, 0, 4}, {4, 4, 0}});
    Modular<std::size_t> speed = builtin_modular(space, BuiltinModular::average_speed);
    BisectionConfig cfg;

    // direct values: d=4 satisfies the chain, d=0.25 breaks d_w <= d_w*
    double dw_4 = d_w(speed, std::size_t{0}, std::size_t{2}, cfg).value.value();
    double dws_4 = d_w_star(speed, std::size_t{0}, std::size_t{2}, cfg).value.value();
    CHECK(dw_4 == Catch::Approx(2.0).margin(1e-6));
    CHECK(dws_4 == Catch::Approx(4.0).margin(1e-6));
    CHECK(dw_4 <= dws_4 + 3e-6);
    CHECK(dws_4 <= 2 * dw_4 + 3e-6);

    double dw_q = d_w(speed, std::size_t{0}, std::size_t{1}, cfg).value.value();
    double dws_q = d_w_star(speed, std::size_t{0}, std::size_t{1}, cfg).value.value();
    CHECK(dw_q == Catch::Approx(0.5).margin(1e-6));
    CHECK(dws_q == Catch::Approx(0.25).margin(1e-6));
    CHECK(dw_q > dws_q);  // the claimed chain fails here

    SamplingPlan plan;
    plan.seed = 42;
    CheckReport report = check_equivalence_claim(speed, space, plan, cfg);
    REQUIRE_FALSE(report.passed());
    bool quarter_witness = false;
    for (const Witness& wit : report.violations) {
        CHECK(wit.tag == "d_w<=d_w_star");
        double a = wit.inputs.at("d_w").get<double>();
        double b = wit.inputs.at("d_w_star").get<double>();
        if (std::abs(a - 0.5) <= 1e-5 && std::abs(b - 0.25) <= 1e-5) quarter_witness = true;
    }
    CHECK(quarter_witness);
}

TEST_CASE("equivalence claim passes on pairs at distance >= 1") {
    FiniteSpace space = FiniteSpace::from_doubles({{0, 1, 4}, {1, 0, 4}, {4, 4, 0}});
    Modular<std::size_t> speed = builtin_modular(space, BuiltinModular::average_speed);
    SamplingPlan plan;
    plan.seed = 3;
    CheckReport report = check_equivalence_claim(speed, space, plan);
    CHECK(report.passed());
}
