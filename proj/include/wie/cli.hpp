#pragma once

// Command-line front end:
//   wie solve  --config PATH --h INT
//   wie sweep  --config PATH
//   wie verify [--seed INT]
// WIE_OUTPUT_DIR, when set, overrides the scenario's output directory.
//
// Exit codes: 0 success, 1 verify found a failing check, 2 bad configuration
// or usage, 3 solver failure.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "wie/lab.hpp"
#include "wie/report.hpp"
#include "wie/scenario.hpp"
#include "wie/verify.hpp"

namespace wie::cli {

enum ExitCode : int { ok = 0, check_failed = 1, bad_config = 2, solver_failed = 3 };

namespace detail {

inline std::filesystem::path output_dir(const Scenario& sc) {
    if (const char* env = std::getenv("WIE_OUTPUT_DIR"); env && *env) return env;
    return sc.output_directory;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

/// Loads a scenario, mapping every configuration problem to a diagnostic.
inline bool load(const std::string& path, Scenario& sc, std::ostream& err) {
    try {
        sc = load_scenario(path);
        return true;
    } catch (const ParseError& e) {
        err << "error: " << path << ": " << e.what() << '\n';
    } catch (const YAML::Exception& e) {
        err << "error: " << path << ": line " << e.mark.line + 1 << ": " << e.msg << '\n';
    } catch (const std::exception& e) {
        err << "error: " << path << ": " << e.what() << '\n';
    }
    return false;
}

}  // namespace detail

inline int cmd_solve(const std::string& config_path, int h, std::ostream& out, std::ostream& err) {
    Scenario sc;
    if (!detail::load(config_path, sc, err)) return bad_config;
    try {
        sc.solver.validate(h);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return bad_config;
    }
    RunResult run;
    try {
        run = run_single(sc.problem, sc.sequence, h, sc.solver);
    } catch (const std::exception& e) {
        err << "solver failure: " << e.what() << '\n';
        return solver_failed;
    }
    const auto checks = run_checks(run, sc.problem, sc.solver);
    try {
        const auto dir = detail::output_dir(sc);
        std::filesystem::create_directories(dir);
        const std::string stem = sc.name + "_h" + std::to_string(h);
        if (sc.wants("csv")) {
            std::ostringstream csv;
            write_trajectory_csv(csv, run.trajectory, sc.solver.T_view);
            detail::write_file(dir / (stem + "_trajectory.csv"), csv.str());
            out << "wrote " << (dir / (stem + "_trajectory.csv")).string() << '\n';
        }
        if (sc.wants("json")) {
            detail::write_file(dir / (stem + "_metrics.json"), solve_summary_json(sc.name, run, checks));
            out << "wrote " << (dir / (stem + "_metrics.json")).string() << '\n';
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return solver_failed;
    }
    out << "scenario " << sc.name << " h=" << h << " sup_err_y=" << format_real(run.metrics.sup_err_y)
        << " sup_err_dy=" << format_real(run.metrics.sup_err_dy)
        << " weakstar_gap_ypp=" << format_real(run.metrics.weakstar_gap_ypp)
        << " el_residual=" << format_real(run.metrics.el_residual) << '\n';
    for (const auto& c : checks)
        if (!c.passed) out << "check failed: " << c.name << '\n';
    return ok;
}

inline int cmd_sweep(const std::string& config_path, std::ostream& out, std::ostream& err) {
    Scenario sc;
    if (!detail::load(config_path, sc, err)) return bad_config;
    if (sc.h_values.empty()) {
        err << "error: " << config_path << ": sweep section with a nonempty h list is required\n";
        return bad_config;
    }
    try {
        for (int h : sc.h_values) sc.solver.validate(h);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return bad_config;
    }
    SweepReport report;
    try {
        report = run_sweep(sc.problem, sc.sequence, sc.h_values, sc.solver);
    } catch (const std::exception& e) {
        err << "solver failure: " << e.what() << '\n';
        return solver_failed;
    }
    std::vector<CheckRecord> checks;
    for (const auto& run : report.runs) {
        const auto more = run_checks(run, sc.problem, sc.solver);
        checks.insert(checks.end(), more.begin(), more.end());
    }
    try {
        const auto dir = detail::output_dir(sc);
        std::filesystem::create_directories(dir);
        if (sc.wants("csv")) {
            std::ostringstream csv;
            write_sweep_csv(csv, report);
            detail::write_file(dir / (sc.name + "_sweep.csv"), csv.str());
            out << "wrote " << (dir / (sc.name + "_sweep.csv")).string() << '\n';
        }
        if (sc.wants("json")) {
            detail::write_file(dir / (sc.name + "_sweep.json"), sweep_summary_json(sc.name, report, checks));
            out << "wrote " << (dir / (sc.name + "_sweep.json")).string() << '\n';
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return solver_failed;
    }
    out << "scenario " << sc.name << " empirical_rate="
        << (report.empirical_rate ? format_real(*report.empirical_rate) : std::string("undefined")) << '\n';
    for (const auto& c : checks)
        if (!c.passed) out << "check failed: " << c.name << '\n';
    return ok;
}

/// Runs the self-check suite; prints a JSON report on `out`.
inline int cmd_verify(std::uint64_t seed, const FaultInjection& fault, std::ostream& out, std::ostream& err) {
    std::vector<CheckRecord> checks;
    try {
        checks = run_verify(seed, fault);
    } catch (const std::exception& e) {
        err << "verify aborted: " << e.what() << '\n';
        return check_failed;
    }
    bool all = true;
    for (const auto& c : checks) all = all && c.passed;
    out << fmt::format("{{\n  \"seed\": {},\n  \"passed\": {},\n  \"checks\": {}\n}}\n", seed, all ? "true" : "false",
                       checks_json(checks));
    for (const auto& c : checks)
        if (!c.passed) err << "FAILED: " << c.name << '\n';
    return all ? ok : check_failed;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Weighted inertia-energy minimizers for m y'' = f"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "Print this help message and exit");

    std::string config_path;
    int h = 0;
    auto* solve = app.add_subcommand("solve", "Minimize for one h and write the rescaled trajectory");
    solve->set_help_flag("--help", "Print this help message and exit");
    solve->add_option("--config", config_path, "Scenario file")->required();
    solve->add_option("--h", h, "Weight steepness (positive integer)")->required()->check(CLI::PositiveNumber);

    auto* sweep = app.add_subcommand("sweep", "Run the scenario's h sweep and write CSV and JSON reports");
    sweep->add_option("--config", config_path, "Scenario file")->required();

    std::uint64_t seed = 20240611;
    std::string fault_name;
    auto* verify = app.add_subcommand("verify", "Run the invariant self-check suite");
    verify->add_option("--seed", seed, "Seed for the randomized checks");
    verify->add_option("--inject-fault", fault_name, "Test hook: deliberately break one check")
        ->check(CLI::IsMember({"lemma21-first"}))
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : bad_config;
    }
    if (*solve) return cmd_solve(config_path, h, out, err);
    if (*sweep) return cmd_sweep(config_path, out, err);
    FaultInjection fault;
    fault.lemma21_first_sign = fault_name == "lemma21-first";
    return cmd_verify(seed, fault, out, err);
}

}  // namespace wie::cli
