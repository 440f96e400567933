#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "modmetric/fixedpoint.hpp"
#include "modmetric/induced.hpp"
#include "modmetric/properties.hpp"
#include "modmetric/sets.hpp"
#include "modmetric/spaces.hpp"

namespace modmetric {

inline constexpr std::string_view kToolName = "modmetric";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Configuration or input problem; maps to exit code 2.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace cfg {

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
    throw config_error(path + ": " + msg);
}

inline void require_object(const json& j, const std::string& path,
                           std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) fail(path + "." + item.key(), "unknown key");
    }
}

inline const json* find(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

inline double positive(const json& j, const std::string& path) {
    double v = number(j, path);
    if (!(v > 0.0) || !std::isfinite(v)) fail(path, "must be positive");
    return v;
}

inline std::size_t count(const json& j, const std::string& path) {
    if (!j.is_number_unsigned()) fail(path, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

inline std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

inline bool flag(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

inline std::vector<double> ascending_grid(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of positive reals");
    std::vector<double> grid;
    double prev = 0.0;
    for (std::size_t i = 0; i < j.size(); ++i) {
        double v = positive(j[i], path + "[" + std::to_string(i) + "]");
        if (!(v > prev)) fail(path, "must be strictly ascending");
        grid.push_back(v);
        prev = v;
    }
    return grid;
}

}  // namespace cfg

using SpaceVariant = std::variant<FiniteSpace, EuclideanSpace, LandmassSpace>;

/// Piecewise-constant user-supplied modular over a finite carrier:
/// w_lambda = values[i] for the largest grid lambda_i <= lambda (the
/// first slab below the grid). Property sweeps are the tool for
/// checking whether such a table is actually a modular.
struct TableModular {
    std::vector<double> lambda_grid;
    std::vector<std::vector<std::vector<ExtReal>>> values;  // per lambda: n x n
    ModularFlags flags;
};

struct ModularSpec {
    std::optional<BuiltinModular> builtin;
    std::optional<TableModular> table;
};

struct CheckTask {
    std::vector<Property> properties;
};

struct MetricTask {
    InducedMetric metric = InducedMetric::d_w;
    enum class Check { none, axioms, equivalence } check = Check::none;
    std::vector<std::pair<json, json>> pairs;
};

struct PartitionTask {};

struct ConvergeTask {
    enum class Mode { convergent, cauchy, prop3 } mode = Mode::convergent;
    std::string sequence_kind;  // harmonic | ramp | alternating | constant | explicit
    std::size_t length = 0;
    json base;                  // scale point for generated kinds
    std::vector<json> points;   // explicit kind
    json limit;                 // null when unused
    std::vector<double> grid;
    double tol = 1e-4;
};

struct MapSpec {
    std::string kind;  // halving | shift | affine | table
    double a = 0.0;
    double b = 0.0;
    std::vector<std::size_t> table;
};

struct ContractTask {
    enum class Mode {
        plain, strong, estimate_plain, estimate_strong, fund1, fund2, palais, theorem
    } mode = Mode::plain;
    MapSpec map;
    double k = 0.5;
    double lambda0 = 1.0;
    double estimate_tol = 1e-4;
    std::vector<double> grid;  // theorem mode
};

struct FixpointTask {
    MapSpec map;
    json x0;
    double lambda_star = 1.0;
    double tol = 1e-8;
    std::size_t max_iter = 10000;
};

using TaskVariant =
    std::variant<CheckTask, MetricTask, PartitionTask, ConvergeTask, ContractTask,
                 FixpointTask>;

enum class ReportFormat { json_fmt, text_fmt };

struct RunConfig {
    SpaceVariant space;
    ModularSpec modular;
    TaskVariant task;
    SamplingPlan plan;
    BisectionConfig bisection;
    std::string out_path;  // empty: stdout
    ReportFormat format = ReportFormat::json_fmt;
    json resolved;  // full config echo with every default filled in
};

namespace cfg {

// --- space ------------------------------------------------------------

inline SpaceVariant parse_space(const json& j, json& echo) {
    require_object(j, "space", {"kind", "matrix", "path", "dim", "box", "map", "cell_size"});
    const json* kind = find(j, "kind");
    if (!kind) fail("space.kind", "missing required field");
    std::string k = text(*kind, "space.kind");
    echo["kind"] = k;

    if (k == "finite") {
        require_object(j, "space", {"kind", "matrix", "path"});
        const json* matrix = find(j, "matrix");
        const json* path = find(j, "path");
        if (!!matrix == !!path) {
            fail("space", "finite spaces need exactly one of \"matrix\" or \"path\"");
        }
        try {
            if (matrix) {
                echo["matrix"] = *matrix;
                return finite_space_from_json(*matrix);
            }
            std::ifstream in(text(*path, "space.path"));
            if (!in) fail("space.path", "cannot open file");
            json doc = json::parse(in);
            echo["path"] = *path;
            return finite_space_from_json(doc);
        } catch (const std::invalid_argument& e) {
            fail("space", e.what());
        } catch (const json::exception& e) {
            fail("space.path", std::string("invalid JSON: ") + e.what());
        }
    }
    if (k == "euclidean") {
        require_object(j, "space", {"kind", "dim", "box"});
        const json* dim = find(j, "dim");
        if (!dim) fail("space.dim", "missing required field");
        std::size_t d = count(*dim, "space.dim");
        double lo = -10.0, hi = 10.0;
        if (const json* box = find(j, "box")) {
            if (!box->is_array() || box->size() != 2) {
                fail("space.box", "expected [lo, hi]");
            }
            lo = number((*box)[0], "space.box[0]");
            hi = number((*box)[1], "space.box[1]");
        }
        echo["dim"] = d;
        echo["box"] = json::array({lo, hi});
        try {
            return EuclideanSpace(d, lo, hi);
        } catch (const std::invalid_argument& e) {
            fail("space", e.what());
        }
    }
    if (k == "landmass") {
        require_object(j, "space", {"kind", "map", "path", "cell_size"});
        const json* map = find(j, "map");
        const json* path = find(j, "path");
        if (!!map == !!path) {
            fail("space", "landmass spaces need exactly one of \"map\" or \"path\"");
        }
        try {
            if (map) {
                double cs = 1.0;
                if (const json* c = find(j, "cell_size")) cs = positive(*c, "space.cell_size");
                echo["map"] = *map;
                echo["cell_size"] = cs;
                return LandmassSpace::parse(text(*map, "space.map"), cs);
            }
            if (find(j, "cell_size")) {
                fail("space.cell_size", "use the map-file sidecar when loading from a path");
            }
            LandmassSpace space = load_landmass_file(text(*path, "space.path"));
            echo["path"] = *path;
            echo["cell_size"] = space.cell_size();
            return space;
        } catch (const std::invalid_argument& e) {
            fail("space", e.what());
        } catch (const json::exception& e) {
            fail("space.path", std::string("invalid sidecar JSON: ") + e.what());
        }
    }
    fail("space.kind", "unknown value '" + k + "' (expected finite|euclidean|landmass)");
}

// --- modular ----------------------------------------------------------

inline ModularSpec parse_modular(const json& j, const SpaceVariant& space, json& echo) {
    require_object(j, "modular", {"kind", "lambda_grid", "values", "flags"});
    const json* kind = find(j, "kind");
    if (!kind) fail("modular.kind", "missing required field");
    std::string k = text(*kind, "modular.kind");
    echo["kind"] = k;

    ModularSpec spec;
    if (k == "metric_as_modular") {
        spec.builtin = BuiltinModular::metric_as_modular;
        return spec;
    }
    if (k == "average_speed") {
        spec.builtin = BuiltinModular::average_speed;
        return spec;
    }
    if (k == "step") {
        spec.builtin = BuiltinModular::step;
        return spec;
    }
    if (k == "table") {
        const auto* finite = std::get_if<FiniteSpace>(&space);
        if (!finite) fail("modular.kind", "table modulars require a finite space");
        const json* grid = find(j, "lambda_grid");
        const json* values = find(j, "values");
        if (!grid) fail("modular.lambda_grid", "missing required field");
        if (!values) fail("modular.values", "missing required field");

        TableModular table;
        table.lambda_grid = ascending_grid(*grid, "modular.lambda_grid");
        if (!values->is_array() || values->size() != table.lambda_grid.size()) {
            fail("modular.values", "expected one matrix per lambda grid entry");
        }
        std::size_t n = finite->size();
        for (std::size_t vi = 0; vi < values->size(); ++vi) {
            const json& m = (*values)[vi];
            std::string mpath = "modular.values[" + std::to_string(vi) + "]";
            if (!m.is_array() || m.size() != n) fail(mpath, "expected an n x n matrix");
            std::vector<std::vector<ExtReal>> rows;
            for (std::size_t r = 0; r < n; ++r) {
                if (!m[r].is_array() || m[r].size() != n) {
                    fail(mpath + "[" + std::to_string(r) + "]", "expected n entries");
                }
                std::vector<ExtReal> row;
                for (std::size_t c = 0; c < n; ++c) {
                    try {
                        row.push_back(ext_from_json(m[r][c]));
                    } catch (const std::exception& e) {
                        fail(mpath, e.what());
                    }
                }
                rows.push_back(std::move(row));
            }
            table.values.push_back(std::move(rows));
        }
        if (const json* flags = find(j, "flags")) {
            require_object(*flags, "modular.flags", {"convex", "strict", "finite"});
            if (const json* c = find(*flags, "convex"))
                table.flags.convex = flag(*c, "modular.flags.convex");
            if (const json* s = find(*flags, "strict"))
                table.flags.strict = flag(*s, "modular.flags.strict");
            if (const json* f = find(*flags, "finite"))
                table.flags.finite = flag(*f, "modular.flags.finite");
        }
        echo["lambda_grid"] = table.lambda_grid;
        echo["values"] = *values;
        echo["flags"] = json{{"convex", table.flags.convex},
                             {"strict", table.flags.strict},
                             {"finite", table.flags.finite}};
        spec.table = std::move(table);
        return spec;
    }
    fail("modular.kind",
         "unknown value '" + k + "' (expected metric_as_modular|average_speed|step|table)");
}

// --- points -----------------------------------------------------------

inline json validate_point(const SpaceVariant& space, const json& j, const std::string& path) {
    if (const auto* finite = std::get_if<FiniteSpace>(&space)) {
        std::size_t idx = count(j, path);
        if (idx >= finite->size()) fail(path, "point index out of range");
        return json(idx);
    }
    if (const auto* euclid = std::get_if<EuclideanSpace>(&space)) {
        if (j.is_number()) {
            if (euclid->dim() != 1) fail(path, "scalar point in a multi-dimensional space");
            return json::array({j.get<double>()});
        }
        if (!j.is_array() || j.size() != euclid->dim()) {
            fail(path, "expected a coordinate array of length " +
                           std::to_string(euclid->dim()));
        }
        json out = json::array();
        for (std::size_t i = 0; i < j.size(); ++i) {
            out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
        }
        return out;
    }
    const auto& land = std::get<LandmassSpace>(space);
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
        !j[1].is_number_integer()) {
        fail(path, "expected a land cell [row, col]");
    }
    Cell c{j[0].get<int>(), j[1].get<int>()};
    if (!land.contains(c)) fail(path, "cell is not land or out of bounds");
    return j;
}

template <PointSpace S>
typename S::Point point_from_json([[maybe_unused]] const S& space, const json& j) {
    if constexpr (std::is_same_v<S, FiniteSpace>) {
        return j.get<std::size_t>();
    } else if constexpr (std::is_same_v<S, EuclideanSpace>) {
        return j.get<std::vector<double>>();
    } else {
        return Cell{j[0].get<int>(), j[1].get<int>()};
    }
}

// --- maps and sequences ------------------------------------------------

inline MapSpec parse_map(const json& j, const SpaceVariant& space, const std::string& path,
                         json& echo) {
    MapSpec spec;
    if (j.is_string()) {
        spec.kind = j.get<std::string>();
    } else {
        require_object(j, path, {"kind", "a", "b", "values"});
        const json* kind = find(j, "kind");
        if (!kind) fail(path + ".kind", "missing required field");
        spec.kind = text(*kind, path + ".kind");
    }

    const bool euclidean = std::holds_alternative<EuclideanSpace>(space);
    const auto* finite = std::get_if<FiniteSpace>(&space);
    json e;
    e["kind"] = spec.kind;
    if (spec.kind == "halving" || spec.kind == "shift") {
        if (!euclidean) fail(path + ".kind", "'" + spec.kind + "' requires a euclidean space");
    } else if (spec.kind == "affine") {
        if (!euclidean) fail(path + ".kind", "'affine' requires a euclidean space");
        const json* a = find(j, "a");
        const json* b = find(j, "b");
        if (!a) fail(path + ".a", "missing required field");
        if (!b) fail(path + ".b", "missing required field");
        spec.a = number(*a, path + ".a");
        spec.b = number(*b, path + ".b");
        e["a"] = spec.a;
        e["b"] = spec.b;
    } else if (spec.kind == "table") {
        if (!finite) fail(path + ".kind", "'table' maps require a finite space");
        const json* values = find(j, "values");
        if (!values || !values->is_array() || values->size() != finite->size()) {
            fail(path + ".values", "expected one target index per point");
        }
        for (std::size_t i = 0; i < values->size(); ++i) {
            std::size_t t = count((*values)[i], path + ".values[" + std::to_string(i) + "]");
            if (t >= finite->size()) {
                fail(path + ".values[" + std::to_string(i) + "]", "target index out of range");
            }
            spec.table.push_back(t);
        }
        e["values"] = *values;
    } else {
        fail(path + ".kind",
             "unknown value '" + spec.kind + "' (expected halving|shift|affine|table)");
    }
    echo = e;
    return spec;
}

template <PointSpace S>
SelfMap<typename S::Point> build_map(const S& space, const MapSpec& spec) {
    using P = typename S::Point;
    if constexpr (std::is_same_v<S, EuclideanSpace>) {
        if (spec.kind == "halving") {
            return {"halving", [](const P& x) {
                        P y = x;
                        for (double& c : y) c *= 0.5;
                        return y;
                    }};
        }
        if (spec.kind == "shift") {
            return {"shift", [](const P& x) {
                        P y = x;
                        for (double& c : y) c += 1.0;
                        return y;
                    }};
        }
        if (spec.kind == "affine") {
            double a = spec.a, b = spec.b;
            return {"affine", [a, b](const P& x) {
                        P y = x;
                        for (double& c : y) c = a * c + b;
                        return y;
                    }};
        }
    } else if constexpr (std::is_same_v<S, FiniteSpace>) {
        if (spec.kind == "table") {
            auto table = spec.table;
            return {"table", [table](const P& x) { return table[x]; }};
        }
    }
    (void)space;
    throw config_error("map kind '" + spec.kind + "' is not supported on this space");
}

template <PointSpace S>
SequenceSpec<typename S::Point> build_sequence(const S& space, const ConvergeTask& task) {
    using P = typename S::Point;
    SequenceSpec<P> seq;
    seq.length = task.length;
    if (task.sequence_kind == "explicit") {
        std::vector<P> pts;
        pts.reserve(task.points.size());
        for (const json& p : task.points) pts.push_back(point_from_json(space, p));
        seq.at = [pts](std::size_t n) { return pts[n - 1]; };
        return seq;
    }
    if constexpr (std::is_same_v<S, EuclideanSpace>) {
        P base = point_from_json(space, task.base);
        std::string kind = task.sequence_kind;
        seq.at = [base, kind](std::size_t n) {
            P p = base;
            if (kind == "harmonic") {
                for (double& c : p) c /= static_cast<double>(n);
            } else if (kind == "ramp") {
                for (double& c : p) c *= static_cast<double>(n);
            } else if (kind == "alternating") {
                if (n % 2 == 1) {
                    for (double& c : p) c = 0.0;
                }
            }  // constant: p = base
            return p;
        };
        return seq;
    }
    (void)space;
    throw config_error("sequence kind '" + task.sequence_kind +
                       "' is not supported on this space");
}

// --- plan / bisection ---------------------------------------------------

inline SamplingPlan parse_plan(const json* j, json& echo) {
    SamplingPlan plan;
    if (j) {
        require_object(*j, "plan", {"seed", "n_samples", "lambda_grid", "slack_tol"});
        if (const json* seed = find(*j, "seed")) {
            if (!seed->is_number_unsigned()) fail("plan.seed", "expected a nonnegative integer");
            plan.seed = seed->get<std::uint64_t>();
        }
        if (const json* n = find(*j, "n_samples")) {
            plan.n_samples = count(*n, "plan.n_samples");
            if (plan.n_samples == 0) fail("plan.n_samples", "must be >= 1");
        }
        if (const json* grid = find(*j, "lambda_grid")) {
            plan.lambda_grid = ascending_grid(*grid, "plan.lambda_grid");
        }
        if (const json* tol = find(*j, "slack_tol")) {
            double v = number(*tol, "plan.slack_tol");
            if (!(v >= 0.0) || !std::isfinite(v)) fail("plan.slack_tol", "must be >= 0");
            plan.slack_tol = v;
        }
    }
    echo = plan.to_json();
    return plan;
}

inline BisectionConfig parse_bisection(const json* j, json& echo) {
    BisectionConfig cfg;
    if (j) {
        require_object(*j, "bisection", {"lambda_min", "lambda_max", "tol"});
        if (const json* v = find(*j, "lambda_min")) cfg.lambda_min = positive(*v, "bisection.lambda_min");
        if (const json* v = find(*j, "lambda_max")) cfg.lambda_max = positive(*v, "bisection.lambda_max");
        if (const json* v = find(*j, "tol")) cfg.tol = positive(*v, "bisection.tol");
        try {
            cfg.validate();
        } catch (const std::invalid_argument& e) {
            fail("bisection", e.what());
        }
    }
    echo = cfg.to_json();
    return cfg;
}

// --- tasks ---------------------------------------------------------------

inline TaskVariant parse_task(const json& j, const std::string& op,
                              const SpaceVariant& space, const ModularSpec& modular,
                              const SamplingPlan& plan, json& echo) {
    echo["op"] = op;
    const bool table_modular = modular.table.has_value();
    const bool convex_modular =
        modular.builtin ? *modular.builtin != BuiltinModular::metric_as_modular
                        : modular.table->flags.convex;

    if (op == "check") {
        require_object(j, "task", {"op", "properties"});
        CheckTask task;
        if (const json* props = find(j, "properties")) {
            if (!props->is_array() || props->empty()) {
                fail("task.properties", "expected a nonempty array of property names");
            }
            for (std::size_t i = 0; i < props->size(); ++i) {
                std::string name = text((*props)[i], "task.properties[" + std::to_string(i) + "]");
                try {
                    task.properties.push_back(property_from_name(name));
                } catch (const std::invalid_argument& e) {
                    fail("task.properties[" + std::to_string(i) + "]", e.what());
                }
            }
        } else {
            task.properties = {Property::axiom1, Property::symmetry, Property::triangle3,
                               Property::monotone_lambda};
        }
        for (Property p : task.properties) {
            if (p == Property::convex_limits && !convex_modular) {
                fail("task.properties", "convex_limits requires a convex modular");
            }
        }
        json names = json::array();
        for (Property p : task.properties) names.push_back(property_name(p));
        echo["properties"] = names;
        return task;
    }

    if (op == "metric") {
        require_object(j, "task", {"op", "metric", "check", "pairs"});
        MetricTask task;
        if (const json* m = find(j, "metric")) {
            std::string name = text(*m, "task.metric");
            if (name == "d_w") {
                task.metric = InducedMetric::d_w;
            } else if (name == "d_w_star") {
                task.metric = InducedMetric::d_w_star;
            } else {
                fail("task.metric", "unknown value '" + name + "' (expected d_w|d_w_star)");
            }
        }
        if (const json* c = find(j, "check")) {
            std::string name = text(*c, "task.check");
            if (name == "none") {
                task.check = MetricTask::Check::none;
            } else if (name == "axioms") {
                task.check = MetricTask::Check::axioms;
            } else if (name == "equivalence") {
                task.check = MetricTask::Check::equivalence;
            } else {
                fail("task.check", "unknown value '" + name + "' (expected none|axioms|equivalence)");
            }
        }
        json pairs_echo = json::array();
        if (const json* pairs = find(j, "pairs")) {
            if (!pairs->is_array()) fail("task.pairs", "expected an array of [x, y] pairs");
            for (std::size_t i = 0; i < pairs->size(); ++i) {
                const json& pr = (*pairs)[i];
                std::string ppath = "task.pairs[" + std::to_string(i) + "]";
                if (!pr.is_array() || pr.size() != 2) fail(ppath, "expected [x, y]");
                json px = validate_point(space, pr[0], ppath + "[0]");
                json py = validate_point(space, pr[1], ppath + "[1]");
                pairs_echo.push_back(json::array({px, py}));
                task.pairs.emplace_back(px, py);
            }
        }
        if ((task.metric == InducedMetric::d_w_star ||
             task.check == MetricTask::Check::equivalence) &&
            !convex_modular) {
            fail("task", "d_w_star and the equivalence claim require a convex modular");
        }
        echo["metric"] = induced_metric_name(task.metric);
        echo["check"] = task.check == MetricTask::Check::none        ? "none"
                        : task.check == MetricTask::Check::axioms    ? "axioms"
                                                                     : "equivalence";
        echo["pairs"] = pairs_echo;
        return task;
    }

    if (op == "partition") {
        require_object(j, "task", {"op"});
        if (std::holds_alternative<EuclideanSpace>(space)) {
            fail("task", "partition requires an enumerable space (finite or landmass)");
        }
        return PartitionTask{};
    }

    if (op == "converge") {
        require_object(j, "task", {"op", "mode", "sequence", "limit", "grid", "tol"});
        ConvergeTask task;
        const json* mode = find(j, "mode");
        if (!mode) fail("task.mode", "missing required field");
        std::string mname = text(*mode, "task.mode");
        if (mname == "convergent") {
            task.mode = ConvergeTask::Mode::convergent;
        } else if (mname == "cauchy") {
            task.mode = ConvergeTask::Mode::cauchy;
        } else if (mname == "prop3") {
            task.mode = ConvergeTask::Mode::prop3;
        } else {
            fail("task.mode", "unknown value '" + mname + "' (expected convergent|cauchy|prop3)");
        }

        const json* seq = find(j, "sequence");
        if (!seq) fail("task.sequence", "missing required field");
        require_object(*seq, "task.sequence", {"kind", "length", "base", "points"});
        const json* kind = find(*seq, "kind");
        if (!kind) fail("task.sequence.kind", "missing required field");
        task.sequence_kind = text(*kind, "task.sequence.kind");

        json seq_echo;
        seq_echo["kind"] = task.sequence_kind;
        if (task.sequence_kind == "explicit") {
            const json* points = find(*seq, "points");
            if (!points || !points->is_array() || points->empty()) {
                fail("task.sequence.points", "expected a nonempty point array");
            }
            json pts_echo = json::array();
            for (std::size_t i = 0; i < points->size(); ++i) {
                json p = validate_point(space, (*points)[i],
                                        "task.sequence.points[" + std::to_string(i) + "]");
                task.points.push_back(p);
                pts_echo.push_back(p);
            }
            task.length = task.points.size();
            if (const json* len = find(*seq, "length")) {
                task.length = count(*len, "task.sequence.length");
                if (task.length == 0 || task.length > task.points.size()) {
                    fail("task.sequence.length", "must lie in [1, #points]");
                }
            }
            seq_echo["points"] = pts_echo;
        } else if (task.sequence_kind == "harmonic" || task.sequence_kind == "ramp" ||
                   task.sequence_kind == "alternating" || task.sequence_kind == "constant") {
            if (!std::holds_alternative<EuclideanSpace>(space)) {
                fail("task.sequence.kind",
                     "generated sequences require a euclidean space; use kind 'explicit'");
            }
            const json* len = find(*seq, "length");
            if (!len) fail("task.sequence.length", "missing required field");
            task.length = count(*len, "task.sequence.length");
            if (task.length == 0) fail("task.sequence.length", "must be >= 1");
            const auto& euclid = std::get<EuclideanSpace>(space);
            if (const json* base = find(*seq, "base")) {
                task.base = validate_point(space, *base, "task.sequence.base");
            } else {
                task.base = json::array();
                for (std::size_t i = 0; i < euclid.dim(); ++i) task.base.push_back(1.0);
            }
            seq_echo["base"] = task.base;
        } else {
            fail("task.sequence.kind",
                 "unknown value '" + task.sequence_kind +
                     "' (expected harmonic|ramp|alternating|constant|explicit)");
        }
        seq_echo["length"] = task.length;
        echo["sequence"] = seq_echo;

        if (task.mode != ConvergeTask::Mode::cauchy) {
            if (const json* limit = find(j, "limit")) {
                task.limit = validate_point(space, *limit, "task.limit");
            } else if (const auto* euclid = std::get_if<EuclideanSpace>(&space)) {
                task.limit = json::array();
                for (std::size_t i = 0; i < euclid->dim(); ++i) task.limit.push_back(0.0);
            } else {
                fail("task.limit", "missing required field");
            }
            echo["limit"] = task.limit;
        } else if (find(j, "limit")) {
            fail("task.limit", "cauchy mode takes no limit");
        }

        task.grid = plan.lambda_grid;
        if (const json* grid = find(j, "grid")) {
            task.grid = ascending_grid(*grid, "task.grid");
        }
        echo["grid"] = task.grid;
        if (const json* tol = find(j, "tol")) task.tol = positive(*tol, "task.tol");
        echo["tol"] = task.tol;

        if (task.mode == ConvergeTask::Mode::prop3 && !convex_modular) {
            fail("task.mode", "prop3 requires a convex modular");
        }
        return task;
    }

    if (op == "contract") {
        require_object(j, "task", {"op", "mode", "map", "k", "lambda0", "estimate_tol", "grid"});
        ContractTask task;
        const json* mode = find(j, "mode");
        if (!mode) fail("task.mode", "missing required field");
        std::string mname = text(*mode, "task.mode");
        if (mname == "plain") {
            task.mode = ContractTask::Mode::plain;
        } else if (mname == "strong") {
            task.mode = ContractTask::Mode::strong;
        } else if (mname == "estimate_plain") {
            task.mode = ContractTask::Mode::estimate_plain;
        } else if (mname == "estimate_strong") {
            task.mode = ContractTask::Mode::estimate_strong;
        } else if (mname == "fund1") {
            task.mode = ContractTask::Mode::fund1;
        } else if (mname == "fund2") {
            task.mode = ContractTask::Mode::fund2;
        } else if (mname == "palais") {
            task.mode = ContractTask::Mode::palais;
        } else if (mname == "theorem") {
            task.mode = ContractTask::Mode::theorem;
        } else {
            fail("task.mode",
                 "unknown value '" + mname +
                     "' (expected plain|strong|estimate_plain|estimate_strong|fund1|fund2|"
                     "palais|theorem)");
        }

        const json* map = find(j, "map");
        if (!map) fail("task.map", "missing required field");
        json map_echo;
        task.map = parse_map(*map, space, "task.map", map_echo);
        echo["mode"] = mname;
        echo["map"] = map_echo;

        bool needs_k = mname == "plain" || mname == "strong" || mname == "fund1" ||
                       mname == "fund2" || mname == "palais";
        if (const json* k = find(j, "k")) {
            task.k = number(*k, "task.k");
            if (!(task.k > 0.0) || !(task.k < 1.0)) fail("task.k", "must lie in (0,1)");
        } else if (needs_k) {
            fail("task.k", "missing required field");
        }
        if (needs_k) echo["k"] = task.k;

        if (const json* l0 = find(j, "lambda0")) task.lambda0 = positive(*l0, "task.lambda0");
        echo["lambda0"] = task.lambda0;

        if (mname == "estimate_plain" || mname == "estimate_strong") {
            if (const json* et = find(j, "estimate_tol")) {
                task.estimate_tol = positive(*et, "task.estimate_tol");
                if (!(task.estimate_tol < 0.5)) fail("task.estimate_tol", "must be < 0.5");
            }
            echo["estimate_tol"] = task.estimate_tol;
        } else if (find(j, "estimate_tol")) {
            fail("task.estimate_tol", "only valid in estimate modes");
        }

        task.grid = plan.lambda_grid;
        if (mname == "theorem") {
            if (const json* grid = find(j, "grid")) {
                task.grid = ascending_grid(*grid, "task.grid");
            }
            echo["grid"] = task.grid;
        } else if (find(j, "grid")) {
            fail("task.grid", "only valid in theorem mode");
        }

        if (mname == "fund1" && !convex_modular) {
            fail("task.mode", "fund1 requires a convex modular");
        }
        if (table_modular && mname == "palais") {
            fail("task.mode", "palais runs on the base metric; table modulars do not define one");
        }
        return task;
    }

    if (op == "fixpoint") {
        require_object(j, "task", {"op", "map", "x0", "lambda", "tol", "max_iter"});
        FixpointTask task;
        const json* map = find(j, "map");
        if (!map) fail("task.map", "missing required field");
        json map_echo;
        task.map = parse_map(*map, space, "task.map", map_echo);
        echo["map"] = map_echo;

        const json* x0 = find(j, "x0");
        if (!x0) fail("task.x0", "missing required field");
        task.x0 = validate_point(space, *x0, "task.x0");
        echo["x0"] = task.x0;

        if (const json* l = find(j, "lambda")) task.lambda_star = positive(*l, "task.lambda");
        echo["lambda"] = task.lambda_star;
        if (const json* t = find(j, "tol")) task.tol = positive(*t, "task.tol");
        echo["tol"] = task.tol;
        if (const json* m = find(j, "max_iter")) {
            task.max_iter = count(*m, "task.max_iter");
            if (task.max_iter == 0) fail("task.max_iter", "must be >= 1");
        }
        echo["max_iter"] = task.max_iter;
        return task;
    }

    fail("task.op", "unknown value '" + op +
                        "' (expected check|metric|partition|converge|contract|fixpoint)");
}

}  // namespace cfg

/// Parses and fully validates a config document. `expected_op` names the
/// CLI subcommand; the config's task.op, when present, must agree. The
/// returned config carries a `resolved` echo with every default filled
/// in, which run() embeds in the report header.
inline RunConfig parse_config(const json& doc, const std::string& expected_op = "") {
    cfg::require_object(doc, "config",
                        {"space", "modular", "task", "plan", "bisection", "output"});
    const json* space_j = cfg::find(doc, "space");
    const json* modular_j = cfg::find(doc, "modular");
    const json* task_j = cfg::find(doc, "task");
    if (!space_j) cfg::fail("space", "missing required field");
    if (!modular_j) cfg::fail("modular", "missing required field");
    if (!task_j) cfg::fail("task", "missing required field");

    json space_echo, modular_echo, plan_echo, bisection_echo, task_echo;
    RunConfig config{
        .space = cfg::parse_space(*space_j, space_echo),
        .modular = {},
        .task = CheckTask{},
        .plan = {},
        .bisection = {},
        .out_path = {},
        .format = ReportFormat::json_fmt,
        .resolved = {},
    };
    config.modular = cfg::parse_modular(*modular_j, config.space, modular_echo);
    config.plan = cfg::parse_plan(cfg::find(doc, "plan"), plan_echo);
    config.bisection = cfg::parse_bisection(cfg::find(doc, "bisection"), bisection_echo);

    if (!task_j->is_object()) cfg::fail("task", "expected an object");
    std::string op = expected_op;
    if (const json* op_j = cfg::find(*task_j, "op")) {
        std::string declared = cfg::text(*op_j, "task.op");
        if (!expected_op.empty() && declared != expected_op) {
            cfg::fail("task.op", "config says '" + declared + "' but the subcommand is '" +
                                     expected_op + "'");
        }
        op = declared;
    } else if (expected_op.empty()) {
        cfg::fail("task.op", "missing required field");
    }
    config.task = cfg::parse_task(*task_j, op, config.space, config.modular, config.plan,
                                  task_echo);

    json output_echo;
    output_echo["format"] = "json";
    output_echo["path"] = "";
    if (const json* output = cfg::find(doc, "output")) {
        cfg::require_object(*output, "output", {"path", "format"});
        if (const json* p = cfg::find(*output, "path")) {
            config.out_path = cfg::text(*p, "output.path");
            output_echo["path"] = config.out_path;
        }
        if (const json* f = cfg::find(*output, "format")) {
            std::string fmt = cfg::text(*f, "output.format");
            if (fmt == "json") {
                config.format = ReportFormat::json_fmt;
            } else if (fmt == "text") {
                config.format = ReportFormat::text_fmt;
            } else {
                cfg::fail("output.format", "unknown value '" + fmt + "' (expected json|text)");
            }
            output_echo["format"] = fmt;
        }
    }

    config.resolved = json{{"space", space_echo},
                           {"modular", modular_echo},
                           {"task", task_echo},
                           {"plan", plan_echo},
                           {"bisection", bisection_echo},
                           {"output", output_echo}};
    return config;
}

inline RunConfig parse_config_text(const std::string& body, const std::string& expected_op = "") {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw config_error(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_config(doc, expected_op);
}

namespace detail {

inline std::string fnv1a_hex(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

template <PointSpace S>
Modular<typename S::Point> build_modular(const S& space, const ModularSpec& spec) {
    using P = typename S::Point;
    if (spec.builtin) {
        if constexpr (MetricSpace<S>) {
            return builtin_modular(space, *spec.builtin);
        } else {
            throw config_error("builtin modulars require a space with a base metric");
        }
    }
    if constexpr (std::is_same_v<S, FiniteSpace>) {
        const TableModular& t = *spec.table;
        auto grid = t.lambda_grid;
        auto values = t.values;
        return Modular<P>(
            "table",
            [grid, values](double lambda, const P& x, const P& y) {
                std::size_t slab = 0;
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    if (grid[i] <= lambda) slab = i;
                }
                return values[slab][x][y];
            },
            t.flags);
    }
    throw config_error("table modulars require a finite space");
}

}  // namespace detail

struct RunResult {
    int exit_code = 0;
    json report;
    std::string text;
};

/// Dispatches a validated config, assembles the report, and returns the
/// exit code: 0 when every check passed (and a solve converged), 1 when
/// violations were found or the solver stopped without converging.
/// Configuration problems throw config_error (exit code 2 at the CLI).
inline RunResult run(const RunConfig& config) {
    json results = json::array();
    std::vector<std::string> text_lines;
    std::size_t violations_total = 0;
    bool failed = false;

    auto add_check = [&](const CheckReport& report) {
        results.push_back(report.to_json());
        text_lines.push_back(report.to_text());
        violations_total += report.violations.size();
        if (!report.passed()) failed = true;
    };

    std::visit(
        [&](const auto& space) {
            using S = std::decay_t<decltype(space)>;
            Modular<typename S::Point> w = detail::build_modular(space, config.modular);

            std::visit(
                [&](const auto& task) {
                    using T = std::decay_t<decltype(task)>;
                    if constexpr (std::is_same_v<T, CheckTask>) {
                        for (Property p : task.properties) {
                            add_check(check_property(w, space, p, config.plan));
                        }
                    } else if constexpr (std::is_same_v<T, MetricTask>) {
                        json pair_values = json::array();
                        for (const auto& [px, py] : task.pairs) {
                            auto x = cfg::point_from_json(space, px);
                            auto y = cfg::point_from_json(space, py);
                            InfimumResult r = task.metric == InducedMetric::d_w
                                                  ? d_w(w, x, y, config.bisection)
                                                  : d_w_star(w, x, y, config.bisection);
                            json entry = r.to_json();
                            entry["pair"] = json::array({px, py});
                            entry["metric"] = induced_metric_name(task.metric);
                            entry["tol"] = config.bisection.tol;
                            pair_values.push_back(entry);
                            text_lines.push_back(
                                "metric=" + induced_metric_name(task.metric) + " pair=" +
                                px.dump() + "," + py.dump() + " value=" +
                                ext_to_json(r.value).dump() +
                                (r.at_floor ? " at_floor" : ""));
                        }
                        if (!task.pairs.empty()) {
                            results.push_back(json{{"pair_values", pair_values}});
                        }
                        if (task.check == MetricTask::Check::axioms) {
                            add_check(check_metric_axioms(task.metric, w, space, config.plan,
                                                          config.bisection));
                        } else if (task.check == MetricTask::Check::equivalence) {
                            add_check(check_equivalence_claim(w, space, config.plan,
                                                              config.bisection));
                        }
                    } else if constexpr (std::is_same_v<T, PartitionTask>) {
                        if constexpr (EnumerableSpace<S>) {
                            auto classes =
                                partition_star(w, space, config.plan.lambda_grid);
                            results.push_back(partition_to_json(space, classes));
                            text_lines.push_back("partition classes=" +
                                                 std::to_string(classes.size()));
                        } else {
                            throw config_error("partition requires an enumerable space");
                        }
                    } else if constexpr (std::is_same_v<T, ConvergeTask>) {
                        auto seq = cfg::build_sequence(space, task);
                        if (task.mode == ConvergeTask::Mode::cauchy) {
                            ConvergenceVerdict v = is_w_cauchy(w, seq, task.grid, task.tol);
                            json out = v.to_json();
                            out["mode"] = "cauchy";
                            results.push_back(out);
                            text_lines.push_back(std::string("cauchy converged=") +
                                                 (v.converged ? "true" : "false"));
                            if (!v.converged) failed = true;
                        } else {
                            auto limit = cfg::point_from_json(space, task.limit);
                            if (task.mode == ConvergeTask::Mode::convergent) {
                                ConvergenceVerdict v =
                                    is_w_convergent(w, seq, limit, task.grid, task.tol);
                                json out = v.to_json();
                                out["mode"] = "convergent";
                                results.push_back(out);
                                text_lines.push_back(std::string("convergent converged=") +
                                                     (v.converged ? "true" : "false"));
                                if (!v.converged) failed = true;
                            } else {
                                add_check(check_prop3(w, seq, limit, task.grid,
                                                      config.bisection, task.tol));
                            }
                        }
                    } else if constexpr (std::is_same_v<T, ContractTask>) {
                        auto map = cfg::build_map(space, task.map);
                        ContractionParams params{task.k, task.lambda0};
                        switch (task.mode) {
                            case ContractTask::Mode::plain:
                                add_check(verify_contraction(w, space, map, params,
                                                             config.plan));
                                break;
                            case ContractTask::Mode::strong:
                                add_check(verify_strong_contraction(w, space, map, params,
                                                                    config.plan));
                                break;
                            case ContractTask::Mode::estimate_plain:
                            case ContractTask::Mode::estimate_strong: {
                                auto mode = task.mode == ContractTask::Mode::estimate_plain
                                                ? ContractionMode::plain
                                                : ContractionMode::strong;
                                auto min_k =
                                    estimate_min_k(w, space, map, task.lambda0, mode,
                                                   config.plan, task.estimate_tol);
                                json out;
                                out["estimate"] = json{
                                    {"mode", mode == ContractionMode::plain ? "plain"
                                                                            : "strong"},
                                    {"min_k", min_k ? json(*min_k) : json(nullptr)},
                                    {"tol", task.estimate_tol}};
                                results.push_back(out);
                                text_lines.push_back(
                                    "estimate_min_k=" +
                                    (min_k ? modmetric::detail::format_double(*min_k)
                                           : std::string("none")));
                                break;
                            }
                            case ContractTask::Mode::fund1:
                                add_check(check_fund1(w, space, map, params, config.plan));
                                break;
                            case ContractTask::Mode::fund2:
                                add_check(check_fund2(w, space, map, params, config.plan));
                                break;
                            case ContractTask::Mode::palais:
                                add_check(check_palais(space, map, task.k, config.plan));
                                break;
                            case ContractTask::Mode::theorem:
                                add_check(verify_theorem_conditions(w, space, map, task.grid,
                                                                    config.plan));
                                break;
                        }
                    } else if constexpr (std::is_same_v<T, FixpointTask>) {
                        auto map = cfg::build_map(space, task.map);
                        auto x0 = cfg::point_from_json(space, task.x0);
                        auto report = solve(w, space, map, x0, task.lambda_star, task.tol,
                                            task.max_iter, config.bisection);
                        results.push_back(report.to_json(space));
                        text_lines.push_back(
                            "fixpoint stop=" + stop_reason_name(report.stop_reason) +
                            " n_iters=" + std::to_string(report.n_iters));
                        if (report.stop_reason != StopReason::residual_met) failed = true;
                    }
                },
                config.task);
        },
        config.space);

    std::string config_hash = detail::fnv1a_hex(config.resolved.dump());
    json report;
    report["tool"] = std::string(kToolName);
    report["version"] = std::string(kToolVersion);
    report["config_hash"] = config_hash;
    report["config"] = config.resolved;
    report["results"] = results;
    report["violations_total"] = violations_total;
    report["status"] = failed ? "fail" : "pass";

    std::string text = "tool=" + std::string(kToolName) + " version=" +
                       std::string(kToolVersion) + " config=" + config_hash + "\n";
    for (const std::string& line : text_lines) text += line + "\n";
    text += std::string("status=") + (failed ? "fail" : "pass") + "\n";

    return RunResult{failed ? 1 : 0, std::move(report), std::move(text)};
}

}  // namespace modmetric
