// Acceptance suite: runs every release criterion at its pinned
// tolerance and prints one pass/fail line per criterion. The last
// criterion re-runs everything and demands byte-identical output.
//
// Usage: acceptance [path-to-modmetric-cli]

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "modmetric/modmetric.hpp"

using namespace modmetric;

namespace {

namespace fs = std::filesystem;

using RealPoint = EuclideanSpace::Point;

RealPoint pt(double x) { return RealPoint{x}; }

std::string g_cli_path;
fs::path g_tmp_dir;

struct Criterion {
    int id;
    std::string name;
    std::function<bool(std::string& transcript, std::string& detail)> fn;
};

SamplingPlan plan_with(std::uint64_t seed, std::size_t n = 1000) {
    SamplingPlan plan;
    plan.seed = seed;
    plan.n_samples = n;
    return plan;
}

void append(std::string& transcript, const json& j) {
    transcript += j.dump();
    transcript += '\n';
}

std::string two_island_grid_16() {
    // 16x16, water column at col 7: two 16x7-ish islands
    std::string text;
    for (int r = 0; r < 16; ++r) {
        for (int c = 0; c < 16; ++c) text.push_back(c == 7 ? '.' : '#');
        text.push_back('\n');
    }
    return text;
}

int run_cli(const std::string& args) {
    std::string cmd = g_cli_path + " " + args + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    if (status == -1) return -1;
#ifdef _WIN32
    return status;
#else
    return WEXITSTATUS(status);
#endif
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// independent flood-fill oracle over the raw mask text
std::map<std::pair<int, int>, int> oracle_components(const std::string& map_text) {
    std::vector<std::string> rows;
    std::string cur;
    for (char c : map_text) {
        if (c == '\n') {
            rows.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) rows.push_back(cur);
    std::map<std::pair<int, int>, int> comp;
    int next = 0;
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
        for (int c = 0; c < static_cast<int>(rows[r].size()); ++c) {
            if (rows[r][c] != '#' || comp.count({r, c})) continue;
            std::vector<std::pair<int, int>> stack{{r, c}};
            comp[{r, c}] = next;
            while (!stack.empty()) {
                auto [cr, cc] = stack.back();
                stack.pop_back();
                const std::pair<int, int> nbrs[4] = {
                    {cr - 1, cc}, {cr + 1, cc}, {cr, cc - 1}, {cr, cc + 1}};
                for (auto [nr, nc] : nbrs) {
                    if (nr < 0 || nr >= static_cast<int>(rows.size())) continue;
                    if (nc < 0 || nc >= static_cast<int>(rows[nr].size())) continue;
                    if (rows[nr][nc] != '#' || comp.count({nr, nc})) continue;
                    comp[{nr, nc}] = next;
                    stack.push_back({nr, nc});
                }
            }
            ++next;
        }
    }
    return comp;
}

SelfMap<RealPoint> halving_map() {
    return {"halving", [](const RealPoint& x) {
                RealPoint y = x;
                for (double& c : y) c *= 0.5;
                return y;
            }};
}

SelfMap<RealPoint> shift_map() {
    return {"shift", [](const RealPoint& x) {
                RealPoint y = x;
                for (double& c : y) c += 1.0;
                return y;
            }};
}

// --- criteria ----------------------------------------------------------

bool criterion_axiom_suite(std::string& transcript, std::string& detail) {
    bool ok = true;
    SamplingPlan plan = plan_with(42, 1000);
    plan.slack_tol = 1e-9;

    EuclideanSpace line(1);
    LandmassSpace grid = LandmassSpace::parse(two_island_grid_16());
    if (grid.component_count() != 2 || grid.rows() != 16 || grid.cols() != 16) {
        detail = "grid construction is off";
        return false;
    }

    auto sweep = [&](const auto& space, const auto& w) {
        for (Property p : {Property::axiom1, Property::symmetry, Property::triangle3,
                           Property::monotone_lambda}) {
            CheckReport report = check_property(w, space, p, plan);
            append(transcript, report.to_json());
            if (!report.passed() || report.samples_tested < 1000) {
                ok = false;
                detail += w.name() + "/" + property_name(p) + " failed; ";
            }
        }
    };
    sweep(line, builtin_modular(line, BuiltinModular::metric_as_modular));
    sweep(line, builtin_modular(line, BuiltinModular::average_speed));
    sweep(line, builtin_modular(line, BuiltinModular::step));
    sweep(grid, builtin_modular(grid, BuiltinModular::average_speed));
    return ok;
}

bool criterion_convexity(std::string& transcript, std::string& detail) {
    EuclideanSpace line(1);
    SamplingPlan plan = plan_with(42, 1000);

    CheckReport speed = check_property(builtin_modular(line, BuiltinModular::average_speed),
                                       line, Property::convexity, plan);
    CheckReport step = check_property(builtin_modular(line, BuiltinModular::step), line,
                                      Property::convexity, plan);
    CheckReport constant =
        check_property(builtin_modular(line, BuiltinModular::metric_as_modular), line,
                       Property::convexity, plan);
    append(transcript, speed.to_json());
    append(transcript, step.to_json());
    append(transcript, constant.to_json());

    if (!speed.passed() || !step.passed()) {
        detail = "a convex example failed the convexity sweep";
        return false;
    }
    if (constant.passed()) {
        detail = "the non-convex example produced no violation";
        return false;
    }
    for (const Witness& wit : constant.violations) {
        if (wit.inputs.at("z") == wit.inputs.at("y") &&
            wit.inputs.at("mu") == wit.inputs.at("lambda")) {
            return true;
        }
    }
    detail = "no witness used the z=y, mu=lambda construction";
    return false;
}

bool criterion_scaled_modular(std::string& transcript, std::string& detail) {
    EuclideanSpace line(1);
    Modular<RealPoint> scaled =
        scaled_modular(builtin_modular(line, BuiltinModular::metric_as_modular));
    Modular<RealPoint> speed = builtin_modular(line, BuiltinModular::average_speed);

    SplitMix64 rng(42);
    for (int i = 0; i < 1000; ++i) {
        double lambda = rng.log_uniform(1e-6, 1e6);
        RealPoint x = line.sample(rng);
        RealPoint y = line.sample(rng);
        ExtReal a = scaled(lambda, x, y);
        ExtReal b = speed(lambda, x, y);
        if (!(a == b)) {
            detail = "mismatch at lambda=" + detail::format_double(lambda);
            return false;
        }
        if (i % 100 == 0) {
            append(transcript,
                   json{{"lambda", lambda}, {"scaled", ext_to_json(a)}, {"speed", ext_to_json(b)}});
        }
    }
    return true;
}

bool criterion_induced_metrics(std::string& transcript, std::string& detail) {
    EuclideanSpace line(1);
    Modular<RealPoint> speed = builtin_modular(line, BuiltinModular::average_speed);
    Modular<RealPoint> step = builtin_modular(line, BuiltinModular::step);
    BisectionConfig cfg;
    bool ok = true;

    for (double d : {0.25, 1.0, 4.0, 100.0}) {
        double dw = d_w(speed, pt(0.0), pt(d), cfg).value.value();
        double dws = d_w_star(speed, pt(0.0), pt(d), cfg).value.value();
        double dw3 = d_w(step, pt(0.0), pt(d), cfg).value.value();
        double dws3 = d_w_star(step, pt(0.0), pt(d), cfg).value.value();
        append(transcript, json{{"d", d}, {"d_w", dw}, {"d_w_star", dws},
                                {"step_d_w", dw3}, {"step_d_w_star", dws3}});
        if (std::abs(dw - std::sqrt(d)) > 1e-6 || std::abs(dws - d) > 1e-6 ||
            std::abs(dw3 - d) > 1e-6 || std::abs(dws3 - d) > 1e-6) {
            ok = false;
            detail += "closed form missed at d=" + detail::format_double(d) + "; ";
        }
    }

    SamplingPlan plan = plan_with(42, 400);
    for (InducedMetric m : {InducedMetric::d_w, InducedMetric::d_w_star}) {
        for (const auto& w : {speed, step}) {
            CheckReport report = check_metric_axioms(m, w, line, plan, cfg);
            append(transcript, report.to_json());
            if (!report.passed()) {
                ok = false;
                detail += w.name() + "/" + induced_metric_name(m) + " axioms failed; ";
            }
        }
    }
    return ok;
}

bool criterion_equivalence(std::string& transcript, std::string& detail) {
    FiniteSpace space = FiniteSpace::from_doubles({{0, 0.25, 4}, {0.25, 0, 4}, {4, 4, 0}});
    Modular<std::size_t> speed = builtin_modular(space, BuiltinModular::average_speed);
    BisectionConfig cfg;

    double dw4 = d_w(speed, std::size_t{0}, std::size_t{2}, cfg).value.value();
    double dws4 = d_w_star(speed, std::size_t{0}, std::size_t{2}, cfg).value.value();
    if (dw4 > dws4 + 3e-6 || dws4 > 2 * dw4 + 3e-6) {
        detail = "chain failed at d=4";
        return false;
    }

    double dwq = d_w(speed, std::size_t{0}, std::size_t{1}, cfg).value.value();
    double dwsq = d_w_star(speed, std::size_t{0}, std::size_t{1}, cfg).value.value();
    if (std::abs(dwq - 0.5) > 1e-6 || std::abs(dwsq - 0.25) > 1e-6 || dwq <= dwsq) {
        detail = "expected d_w=0.5 > d_w_star=0.25 at d=0.25";
        return false;
    }

    CheckReport report = check_equivalence_claim(speed, space, plan_with(42, 500), cfg);
    append(transcript, report.to_json());
    bool quarter_witness = false;
    for (const Witness& wit : report.violations) {
        double a = wit.inputs.at("d_w").get<double>();
        double b = wit.inputs.at("d_w_star").get<double>();
        if (std::abs(a - 0.5) <= 1e-5 && std::abs(b - 0.25) <= 1e-5) quarter_witness = true;
    }
    if (!quarter_witness) {
        detail = "sweep produced no witness at the d=0.25 pair";
        return false;
    }

    // the CLI surfaces the violation with exit code 1
    fs::path cfg_path = g_tmp_dir / "equivalence.json";
    fs::path out_path = g_tmp_dir / "equivalence_report.json";
    {
        std::ofstream out(cfg_path);
        out << R"({
  "space": {"kind": "finite", "matrix": [[0, 0.25, 4], [0.25, 0, 4], [4, 4, 0]]},
  "modular": {"kind": "average_speed"},
  "task": {"op": "metric", "check": "equivalence"},
  "plan": {"seed": 42, "n_samples": 500}
})";
    }
    int code = run_cli("metric --config " + cfg_path.string() + " --out " + out_path.string());
    std::string body = read_file(out_path);
    transcript += body;
    if (code != 1) {
        detail = "CLI exit code was " + std::to_string(code) + ", expected 1";
        return false;
    }
    json cli_report = json::parse(body);
    if (cli_report.at("violations_total").get<std::size_t>() < 1) {
        detail = "CLI report carries no witness";
        return false;
    }

    // the other side of the exit-code contract: broken input is 2
    fs::path bad_cfg = g_tmp_dir / "bad_map.json";
    {
        std::ofstream out(bad_cfg);
        out << R"({"space": {"kind": "landmass", "map": "##x##"},
                   "modular": {"kind": "average_speed"},
                   "task": {"op": "partition"}})";
    }
    int bad_code = run_cli("partition --config " + bad_cfg.string());
    transcript += "bad_map_exit=" + std::to_string(bad_code) + "\n";
    if (bad_code != 2) {
        detail = "malformed map gave exit " + std::to_string(bad_code) + ", expected 2";
        return false;
    }
    return true;
}

bool criterion_modular_sets(std::string& transcript, std::string& detail) {
    EuclideanSpace line(1);
    bool ok = true;

    // member_zero implies member_star on every sample, all built-ins
    SplitMix64 rng(42);
    for (BuiltinModular kind : {BuiltinModular::metric_as_modular,
                                BuiltinModular::average_speed, BuiltinModular::step}) {
        Modular<RealPoint> w = builtin_modular(line, kind);
        for (int i = 0; i < 500; ++i) {
            RealPoint x0 = line.sample(rng), x = line.sample(rng);
            bool zero = member_zero(w, x0, x, default_tail_schedule(), 1e-4);
            bool star = member_star(w, x0, x, default_lambda_grid());
            if (zero && !star) {
                ok = false;
                detail += "inclusion violated for " + w.name() + "; ";
            }
        }
    }

    // strictness of the inclusion on the constant modular
    CheckReport contrast =
        check_prop2(builtin_modular(line, BuiltinModular::metric_as_modular), line,
                    plan_with(42, 300), default_tail_schedule(), 1e-4,
                    /*require_convex=*/false);
    append(transcript, contrast.to_json());
    bool strict_witness = false;
    for (const Witness& wit : contrast.violations) {
        if (wit.inputs.at("member_star").get<bool>() &&
            !wit.inputs.at("member_zero").get<bool>()) {
            strict_witness = true;
        }
    }
    if (!strict_witness) {
        ok = false;
        detail += "no star-without-zero witness on the constant modular; ";
    }

    // partitions equal breadth-first components: every 3x3 mask, plus
    // seeded masks up to 8x8
    std::vector<std::string> masks;
    for (unsigned bits = 1; bits < 512; ++bits) {
        std::string text;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                text.push_back((bits >> (r * 3 + c)) & 1 ? '#' : '.');
            }
            text.push_back('\n');
        }
        masks.push_back(text);
    }
    SplitMix64 mask_rng(7);
    for (int t = 0; t < 25; ++t) {
        std::string text;
        for (int r = 0; r < 8; ++r) {
            for (int c = 0; c < 8; ++c) text.push_back(mask_rng.unit() < 0.5 ? '#' : '.');
            text.push_back('\n');
        }
        if (text.find('#') == std::string::npos) text[0] = '#';
        masks.push_back(text);
    }

    std::size_t partitions_checked = 0;
    for (const std::string& text : masks) {
        LandmassSpace grid = LandmassSpace::parse(text);
        Modular<Cell> speed = builtin_modular(grid, BuiltinModular::average_speed);
        auto classes = partition_star(speed, grid, default_lambda_grid());
        auto oracle = oracle_components(text);

        std::set<std::size_t> covered;
        bool match = true;
        for (const auto& cls : classes) {
            if (cls.empty()) match = false;
            int label = -2;
            for (std::size_t idx : cls) {
                const Cell& cell = grid.points()[idx];
                if (!covered.insert(idx).second) match = false;
                int o = oracle.at({cell.row, cell.col});
                if (label == -2) label = o;
                if (o != label) match = false;
            }
        }
        match = match && covered.size() == grid.land_count() &&
                classes.size() == static_cast<std::size_t>(oracle.empty() ? 0 : 1 +
                    std::max_element(oracle.begin(), oracle.end(),
                                     [](const auto& a, const auto& b) {
                                         return a.second < b.second;
                                     })->second);
        if (!match) {
            ok = false;
            detail += "partition mismatch on a mask; ";
            break;
        }
        ++partitions_checked;
    }
    append(transcript, json{{"partitions_checked", partitions_checked}});

    // two modular-set notions agree for the convex examples
    for (BuiltinModular kind : {BuiltinModular::average_speed, BuiltinModular::step}) {
        CheckReport report = check_prop2(builtin_modular(line, kind), line, plan_with(42, 500));
        append(transcript, report.to_json());
        if (!report.passed()) {
            ok = false;
            detail += std::string(builtin_modular_name(kind)) + " prop2 failed; ";
        }
    }
    return ok;
}

bool criterion_convergence(std::string& transcript, std::string& detail) {
    EuclideanSpace line(1);
    Modular<RealPoint> speed = builtin_modular(line, BuiltinModular::average_speed);
    std::vector<double> grid = {0.1, 1.0, 10.0};
    const double tol = 1e-3;
    bool ok = true;

    SequenceSpec<RealPoint> harmonic{
        [](std::size_t n) { return pt(1.0 / static_cast<double>(n)); }, 2000};
    SequenceSpec<RealPoint> ramp{[](std::size_t n) { return pt(static_cast<double>(n)); },
                                 2000};
    SequenceSpec<RealPoint> alternating{
        [](std::size_t n) { return pt(n % 2 == 0 ? 1.0 : 0.0); }, 2000};
    SequenceSpec<RealPoint> still{[](std::size_t) { return pt(0.5); }, 200};

    ConvergenceVerdict conv = is_w_convergent(speed, harmonic, pt(0.0), grid, tol);
    ConvergenceVerdict cauchy = is_w_cauchy(speed, harmonic, grid, tol);
    ConvergenceVerdict not_cauchy = is_w_cauchy(speed, ramp, grid, tol);
    append(transcript, conv.to_json());
    append(transcript, cauchy.to_json());
    append(transcript, not_cauchy.to_json());
    if (!conv.converged || !cauchy.converged) {
        ok = false;
        detail += "1/n verdicts wrong; ";
    }
    if (not_cauchy.converged) {
        ok = false;
        detail += "x_n=n wrongly Cauchy; ";
    }

    BisectionConfig cfg;
    std::vector<double> p3_grid = {1.0, 10.0};
    for (const auto& [seq, limit] :
         std::vector<std::pair<SequenceSpec<RealPoint>, RealPoint>>{
             {harmonic, pt(0.0)}, {alternating, pt(0.0)}, {still, pt(0.5)}}) {
        CheckReport report = check_prop3(speed, seq, limit, p3_grid, cfg, tol);
        append(transcript, report.to_json());
        if (!report.passed()) {
            ok = false;
            detail += "prop3 disagreement; ";
        }
    }
    return ok;
}

bool criterion_contractions(std::string& transcript, std::string& detail) {
    EuclideanSpace line(1);
    Modular<RealPoint> speed = builtin_modular(line, BuiltinModular::average_speed);
    SamplingPlan plan = plan_with(42, 400);
    bool ok = true;

    auto plain = estimate_min_k(speed, line, halving_map(), 1.0, ContractionMode::plain,
                                plan, 1e-4);
    auto strong = estimate_min_k(speed, line, halving_map(), 1.0, ContractionMode::strong,
                                 plan, 1e-4);
    SelfMap<RealPoint> identity{"identity", [](const RealPoint& x) { return x; }};
    auto none = estimate_min_k(speed, line, identity, 1.0, ContractionMode::plain, plan, 1e-4);

    append(transcript, json{{"plain", plain ? json(*plain) : json(nullptr)},
                            {"strong", strong ? json(*strong) : json(nullptr)},
                            {"identity", none ? json(*none) : json(nullptr)}});

    if (!plain || std::abs(*plain - 0.5) > 1e-3) {
        ok = false;
        detail += "plain threshold off; ";
    }
    if (!strong || std::abs(*strong - 1.0 / std::sqrt(2.0)) > 1e-3) {
        ok = false;
        detail += "strong threshold off; ";
    }
    if (none) {
        ok = false;
        detail += "identity map wrongly admits a contraction constant; ";
    }
    return ok;
}

bool criterion_fundamental(std::string& transcript, std::string& detail) {
    EuclideanSpace line(1);
    Modular<RealPoint> speed = builtin_modular(line, BuiltinModular::average_speed);
    SamplingPlan plan = plan_with(42, 1000);
    bool ok = true;

    CheckReport fund1 = check_fund1(speed, line, halving_map(), {0.5, 1.0}, plan);
    CheckReport fund2 = check_fund2(speed, line, halving_map(), {0.75, 1.0}, plan);
    CheckReport palais = check_palais(line, halving_map(), 0.5, plan);
    append(transcript, fund1.to_json());
    append(transcript, fund2.to_json());
    append(transcript, palais.to_json());
    if (!fund1.passed() || fund1.samples_tested < 1000) {
        ok = false;
        detail += "fund1 failed; ";
    }
    if (!fund2.passed()) {
        ok = false;
        detail += "fund2 failed; ";
    }
    if (!palais.passed()) {
        ok = false;
        detail += "palais failed; ";
    }

    // hand equality case: lambda=1, lambda1=lambda2=1/4, k=1/2, x=1, y=0
    double lhs = speed(1.0, pt(1.0), pt(0.0)).value();
    double rhs = (0.25 * speed(0.25, pt(1.0), pt(0.5)).value() +
                  0.25 * speed(0.25, pt(0.0), pt(0.0)).value()) /
                 (1.0 * 0.5);
    append(transcript, json{{"hand_lhs", lhs}, {"hand_rhs", rhs}});
    if (std::abs(lhs - 1.0) > 1e-12 || std::abs(rhs - 1.0) > 1e-12 || lhs > rhs + 1e-12) {
        ok = false;
        detail += "hand equality case off; ";
    }
    return ok;
}

bool criterion_fixed_point(std::string& transcript, std::string& detail) {
    EuclideanSpace line(1);
    Modular<RealPoint> speed = builtin_modular(line, BuiltinModular::average_speed);
    const double tol = 1e-8;
    bool ok = true;

    auto report = solve(speed, line, halving_map(), pt(1.0), 1.0, tol, 10000);
    append(transcript, report.to_json(line));
    if (report.stop_reason != StopReason::residual_met || report.n_iters > 28 ||
        !report.approx_fixed_point || std::abs((*report.approx_fixed_point)[0]) > tol) {
        ok = false;
        detail += "halving solve off; ";
    }

    SplitMix64 rng(42);
    std::vector<double> finals;
    for (int i = 0; i < 100; ++i) {
        auto r = solve(speed, line, halving_map(), line.sample(rng), 1.0, tol, 10000);
        if (r.stop_reason != StopReason::residual_met) {
            ok = false;
            detail += "a seeded start failed to converge; ";
            break;
        }
        finals.push_back((*r.approx_fixed_point)[0]);
    }
    double spread = 0.0;
    for (double a : finals)
        for (double b : finals) spread = std::max(spread, std::abs(a - b));
    append(transcript, json{{"starts", finals.size()}, {"spread", spread}});
    if (spread > 2 * tol) {
        ok = false;
        detail += "seeded starts disagree beyond 2 tol; ";
    }

    auto stuck = solve(speed, line, shift_map(), pt(0.0), 1.0, tol, 200);
    append(transcript, stuck.to_json(line));
    if (stuck.stop_reason != StopReason::max_iter) {
        ok = false;
        detail += "shift did not stop at max_iter; ";
    }
    for (const ExtReal& r : stuck.residuals) {
        if (!(r == ExtReal(1.0))) {
            ok = false;
            detail += "shift residual drifted from 1; ";
            break;
        }
    }
    return ok;
}

std::vector<Criterion> criteria() {
    return {
        {1, "axiom suite on the classical examples and the two-island grid",
         criterion_axiom_suite},
        {2, "convexity discrimination with the z=y, mu=lambda witness", criterion_convexity},
        {3, "scaled constant modular coincides with the speed modular exactly",
         criterion_scaled_modular},
        {4, "induced metrics match their closed forms and the metric axioms",
         criterion_induced_metrics},
        {5, "equivalence chain holds at d=4 and is refuted at d=0.25 (CLI exit 1)",
         criterion_equivalence},
        {6, "modular sets: inclusion, strictness witness, component partitions",
         criterion_modular_sets},
        {7, "convergence verdicts for 1/n, n, and the alternating sequence",
         criterion_convergence},
        {8, "minimal contraction constants: 0.5 plain, 0.7071 strong, none for identity",
         criterion_contractions},
        {9, "fundamental inequalities with the hand-computed equality case",
         criterion_fundamental},
        {10, "fixed-point iteration: convergence, uniqueness spread, stall detection",
         criterion_fixed_point},
    };
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) {
        g_cli_path = argv[1];
    } else {
        g_cli_path = (fs::path(argv[0]).parent_path().parent_path() / "modmetric").string();
    }
    if (!fs::exists(g_cli_path)) {
        std::fprintf(stderr, "acceptance: CLI binary not found at %s\n", g_cli_path.c_str());
        return 2;
    }
    g_tmp_dir = fs::temp_directory_path() / "modmetric_acceptance";
    fs::create_directories(g_tmp_dir);

    int failures = 0;
    std::vector<std::string> transcripts;
    for (const Criterion& c : criteria()) {
        std::string transcript;
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(transcript, detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        transcripts.push_back(transcript);
        std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", c.id,
                    c.name.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }

    // criterion 11: every criterion, re-run with the same seeds, must
    // reproduce its transcript byte for byte
    {
        bool ok = true;
        std::string detail;
        auto list = criteria();
        for (std::size_t i = 0; i < list.size(); ++i) {
            std::string transcript;
            std::string ignored;
            try {
                list[i].fn(transcript, ignored);
            } catch (const std::exception&) {
                transcript = "<exception>";
            }
            if (transcript != transcripts[i]) {
                ok = false;
                detail += "criterion " + std::to_string(list[i].id) + " not reproducible; ";
            }
        }
        std::printf("[%s] criterion 11: identical seeds reproduce byte-identical reports%s%s\n",
                    ok ? "PASS" : "FAIL", detail.empty() ? "" : " -- ", detail.c_str());
        if (!ok) ++failures;
    }

    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
