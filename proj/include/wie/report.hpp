#pragma once

// CSV and JSON serialization. Every real is written with 17 significant
// digits so files round-trip doubles exactly and reruns are byte-identical.

#include <fmt/format.h>

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wie/lab.hpp"
#include "wie/model.hpp"

namespace wie {

/// Named pass/fail outcome with the two sides that were compared.
struct CheckRecord {
    std::string name;
    bool passed = true;
    double lhs = 0.0;
    double rhs = 0.0;
};

inline std::string format_real(double v) { return fmt::format("{:.17g}", v); }

inline std::string json_real(double v) { return std::isfinite(v) ? format_real(v) : std::string("null"); }

inline std::string json_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20)
                    out += fmt::format("\\u{:04x}", static_cast<int>(c));
                else
                    out += c;
        }
    }
    return out + "\"";
}

inline std::string checks_json(const std::vector<CheckRecord>& checks) {
    std::string out = "[";
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto& c = checks[i];
        out += fmt::format("{}\n    {{\"name\": {}, \"passed\": {}, \"lhs\": {}, \"rhs\": {}}}", i ? "," : "",
                           json_string(c.name), c.passed ? "true" : "false", json_real(c.lhs), json_real(c.rhs));
    }
    return out + (checks.empty() ? "]" : "\n  ]");
}

/// Invariant checks attached to one run: sup-norm bounds, scaling identity,
/// stationarity residual and exact initial conditions.
inline std::vector<CheckRecord> run_checks(const RunResult& run, const CauchyProblem& problem,
                                           const SolverConfig& config) {
    const std::string tag = "@h=" + std::to_string(run.h);
    const double ic_tol = 1e-12 * (1.0 + problem.u0.lpNorm<Eigen::Infinity>() + problem.v0.lpNorm<Eigen::Infinity>());
    auto from = [&](const std::string& name, const LemmaReport& r) { return CheckRecord{name + tag, r.passed, r.lhs, r.rhs}; };
    return {from("supnorm-acceleration", run.supnorm.acceleration),
            from("supnorm-velocity", run.supnorm.velocity),
            from("supnorm-position", run.supnorm.position),
            from("scaling-identity", run.scaling),
            {"first-order-relation" + tag, run.metrics.el_residual <= 10.0 * config.solve_tol, run.metrics.el_residual,
             10.0 * config.solve_tol},
            {"initial-conditions" + tag, run.initial_deviation <= ic_tol, run.initial_deviation, ic_tol}};
}

/// Header "t,y_1..y_N,dy_1..dy_N,d2y_1..d2y_N"; rows at t = k T_view / 400.
inline void write_trajectory_csv(std::ostream& out, const HermiteTrajectory& y, double T_view) {
    const Eigen::Index n = y.dim();
    out << "t";
    for (const char* prefix : {"y_", "dy_", "d2y_"})
        for (Eigen::Index c = 1; c <= n; ++c) out << ',' << prefix << c;
    out << '\n';
    constexpr int rows = 400;
    for (int k = 0; k <= rows; ++k) {
        const double t = T_view * k / rows;
        const auto p = eval_trajectory(y, t);
        out << format_real(t);
        for (const Vector* v : {&p.value, &p.slope, &p.curvature})
            for (Eigen::Index c = 0; c < n; ++c) out << ',' << format_real((*v)[c]);
        out << '\n';
    }
}

inline void write_sweep_csv(std::ostream& out, const SweepReport& report) {
    out << "h,sup_err_y,sup_err_dy,weakstar_gap_ypp,el_residual\n";
    for (const auto& run : report.runs) {
        const auto& m = run.metrics;
        out << run.h << ',' << format_real(m.sup_err_y) << ',' << format_real(m.sup_err_dy) << ','
            << format_real(m.weakstar_gap_ypp) << ',' << format_real(m.el_residual) << '\n';
    }
}

inline std::string sweep_summary_json(const std::string& scenario, const SweepReport& report,
                                      const std::vector<CheckRecord>& checks) {
    std::string hs = "[";
    for (std::size_t i = 0; i < report.h_values.size(); ++i) hs += (i ? ", " : "") + std::to_string(report.h_values[i]);
    hs += "]";
    return fmt::format("{{\n  \"scenario\": {},\n  \"h_values\": {},\n  \"empirical_rate\": {},\n  \"checks\": {}\n}}\n",
                       json_string(scenario), hs,
                       report.empirical_rate ? json_real(*report.empirical_rate) : std::string("null"),
                       checks_json(checks));
}

inline std::string solve_summary_json(const std::string& scenario, const RunResult& run,
                                      const std::vector<CheckRecord>& checks) {
    const auto& m = run.metrics;
    return fmt::format(
        "{{\n  \"scenario\": {},\n  \"h\": {},\n  \"sup_err_y\": {},\n  \"sup_err_dy\": {},\n"
        "  \"weakstar_gap_ypp\": {},\n  \"el_residual\": {},\n  \"energy\": {},\n  \"condition_estimate\": {},\n"
        "  \"checks\": {}\n}}\n",
        json_string(scenario), run.h, json_real(m.sup_err_y), json_real(m.sup_err_dy), json_real(m.weakstar_gap_ypp),
        json_real(m.el_residual), json_real(run.energy), json_real(run.condition_estimate), checks_json(checks));
}

}  // namespace wie
