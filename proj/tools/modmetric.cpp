// modmetric: evaluate metric modulars, check their defining properties
// by seeded sampling, compute the induced metrics, partition carriers
// into modular sets, test sequence convergence, verify contractions and
// solve fixed points. Reports are deterministic for a fixed config.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "modmetric/modmetric.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::size_t> workers;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "path to the JSON config")->required();
    cmd->add_option("--seed", flags.seed, "override plan.seed");
    cmd->add_option("--out", flags.out, "write the report to this path (default stdout)");
    cmd->add_option("--format", flags.format, "report format: json or text")
        ->check(CLI::IsMember({"json", "text"}));
    cmd->add_option("--workers", flags.workers, "worker pool size for sweeps")
        ->check(CLI::PositiveNumber);
}

int run_command(const std::string& op, const CommonFlags& flags) {
    std::ifstream in(flags.config_path);
    if (!in) {
        std::cerr << "error: cannot open config file: " << flags.config_path << "\n";
        return 2;
    }
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    modmetric::RunConfig config = modmetric::parse_config_text(body, op);
    if (flags.seed) {
        config.plan.seed = *flags.seed;
        config.resolved["plan"]["seed"] = *flags.seed;
    }
    if (flags.workers) config.plan.workers = *flags.workers;
    if (flags.out) {
        config.out_path = *flags.out;
        config.resolved["output"]["path"] = *flags.out;
    }
    if (flags.format) {
        config.format = *flags.format == "text" ? modmetric::ReportFormat::text_fmt
                                                : modmetric::ReportFormat::json_fmt;
        config.resolved["output"]["format"] = *flags.format;
    }

    modmetric::RunResult result = modmetric::run(config);
    std::string body_out = config.format == modmetric::ReportFormat::text_fmt
                               ? result.text
                               : result.report.dump(2) + "\n";
    if (config.out_path.empty()) {
        std::cout << body_out;
    } else {
        std::ofstream out(config.out_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write report to " << config.out_path << "\n";
            return 2;
        }
        out << body_out;
    }
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"modular metric space toolkit"};
    app.require_subcommand(1);

    const char* ops[] = {"check", "metric", "partition", "converge", "contract", "fixpoint"};
    const char* descriptions[] = {
        "sweep modular properties (axioms, convexity, strictness, monotonicity)",
        "evaluate and check the induced metrics d_w / d_w*",
        "partition a finite carrier into modular sets",
        "test sequences for w-convergence / w-Cauchy behavior",
        "verify (strong) contractions and the fundamental inequalities",
        "run the fixed-point iteration",
    };

    CommonFlags flags;
    std::string selected;
    for (std::size_t i = 0; i < 6; ++i) {
        CLI::App* cmd = app.add_subcommand(ops[i], descriptions[i]);
        add_common_flags(cmd, flags);
        cmd->callback([&selected, op = std::string(ops[i])]() { selected = op; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        return run_command(selected, flags);
    } catch (const modmetric::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
