#pragma once

// Scenario files: YAML with a fixed schema. Every key outside the schema is
// rejected with the line it appears on.
//
//   scenario: sin-fixed
//   problem: {m: 1.0, u0: [1.0], v0: [0.0]}
//   force:
//     kind: sinusoid          # zero | constant | polynomial | sinusoid | piecewise_constant | sampled
//     amplitude: [1.0]
//     omega: 1.0
//     family: fixed           # fixed | oscillatory | square_wave
//   solver: {T_view: 2.0, s_tail: 40.0, ds: 0.25, quad_order: 6, solve_tol: 1.0e-10}
//   sweep: {h: [4, 8, 16, 32, 64]}
//   output: {directory: out, formats: [csv, json]}

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <set>
#include <string>
#include <vector>

#include "wie/errors.hpp"
#include "wie/forces.hpp"
#include "wie/model.hpp"

namespace wie {

struct Scenario {
    std::string name = "scenario";
    CauchyProblem problem;  // force is the weak-* limit
    ForceSequence sequence;
    SolverConfig solver;
    std::vector<int> h_values;
    std::string output_directory = ".";
    std::vector<std::string> formats{"csv", "json"};

    bool wants(const std::string& format) const {
        return std::find(formats.begin(), formats.end(), format) != formats.end();
    }
};

namespace detail {

inline std::size_t line_of(const YAML::Node& node) { return static_cast<std::size_t>(node.Mark().line + 1); }

inline void require_map(const YAML::Node& node, const std::string& where) {
    if (!node.IsMap()) throw ParseError("'" + where + "' must be a mapping", line_of(node));
}

inline void reject_unknown(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) throw ParseError("unknown key '" + key + "' in '" + where + "'", line_of(kv.first));
    }
}

inline YAML::Node require(const YAML::Node& parent, const std::string& key, const std::string& where) {
    const YAML::Node node = parent[key];
    if (!node) throw ParseError("missing key '" + key + "' in '" + where + "'", line_of(parent));
    return node;
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) throw ParseError("'" + key + "' must be a scalar", line_of(node));
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ParseError("'" + key + "' has an invalid value '" + node.Scalar() + "'", line_of(node));
    }
}

inline Vector vector_of(const YAML::Node& node, const std::string& key) {
    if (node.IsScalar()) {
        Vector v(1);
        v[0] = scalar<double>(node, key);
        return v;
    }
    if (!node.IsSequence() || node.size() == 0)
        throw ParseError("'" + key + "' must be a number or a nonempty list of numbers", line_of(node));
    Vector v(static_cast<Eigen::Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) v[static_cast<Eigen::Index>(i)] = scalar<double>(node[i], key);
    return v;
}

inline std::vector<double> reals_of(const YAML::Node& node, const std::string& key) {
    if (!node.IsSequence()) throw ParseError("'" + key + "' must be a list of numbers", line_of(node));
    std::vector<double> out;
    for (const auto& item : node) out.push_back(scalar<double>(item, key));
    return out;
}

inline std::vector<Vector> vectors_of(const YAML::Node& node, const std::string& key) {
    if (!node.IsSequence() || node.size() == 0) throw ParseError("'" + key + "' must be a nonempty list", line_of(node));
    std::vector<Vector> out;
    for (const auto& item : node) out.push_back(vector_of(item, key));
    return out;
}

inline Force parse_force(const YAML::Node& node, Eigen::Index dim, const std::filesystem::path& base_dir) {
    const auto kind = scalar<std::string>(require(node, "kind", "force"), "kind");
    static const std::set<std::string> common{"kind", "family", "family_amplitude"};
    auto allow = [&](std::set<std::string> extra) {
        extra.insert(common.begin(), common.end());
        reject_unknown(node, "force", extra);
    };
    try {
        if (kind == "zero") {
            allow({});
            return Force::zero(dim);
        }
        if (kind == "constant") {
            allow({"value"});
            return Force::constant(vector_of(require(node, "value", "force"), "value"));
        }
        if (kind == "polynomial") {
            allow({"coefficients", "hold_after"});
            return Force::polynomial(vectors_of(require(node, "coefficients", "force"), "coefficients"),
                                     scalar<double>(require(node, "hold_after", "force"), "hold_after"));
        }
        if (kind == "sinusoid") {
            allow({"amplitude", "omega", "phase"});
            const double phase = node["phase"] ? scalar<double>(node["phase"], "phase") : 0.0;
            return Force::sinusoid(vector_of(require(node, "amplitude", "force"), "amplitude"),
                                   scalar<double>(require(node, "omega", "force"), "omega"), phase);
        }
        if (kind == "piecewise_constant") {
            allow({"breaks", "values", "period"});
            const double period = node["period"] ? scalar<double>(node["period"], "period") : 0.0;
            return Force::piecewise_constant(reals_of(require(node, "breaks", "force"), "breaks"),
                                             vectors_of(require(node, "values", "force"), "values"), period);
        }
        if (kind == "sampled") {
            allow({"csv", "interpolation"});
            const auto interp = node["interpolation"] ? scalar<std::string>(node["interpolation"], "interpolation")
                                                      : std::string("linear");
            if (interp != "hold" && interp != "linear")
                throw ParseError("interpolation must be 'hold' or 'linear'", line_of(node["interpolation"]));
            std::filesystem::path csv = scalar<std::string>(require(node, "csv", "force"), "csv");
            if (csv.is_relative()) csv = base_dir / csv;
            try {
                return load_samples(csv.string(), interp == "hold" ? Interpolation::hold : Interpolation::linear);
            } catch (const ParseError& e) {
                throw ParseError(csv.string() + ": " + e.detail(), e.line());
            }
        }
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("force: ") + e.what(), line_of(node));
    }
    throw ParseError("unknown force kind '" + kind + "'", line_of(node["kind"]));
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = ".") {
    using namespace detail;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(e.msg, static_cast<std::size_t>(e.mark.line + 1));
    }
    require_map(root, "scenario file");
    reject_unknown(root, "top level", {"scenario", "problem", "force", "solver", "sweep", "output"});

    Scenario sc;
    if (root["scenario"]) sc.name = scalar<std::string>(root["scenario"], "scenario");

    const YAML::Node problem = require(root, "problem", "top level");
    require_map(problem, "problem");
    reject_unknown(problem, "problem", {"m", "u0", "v0"});
    const double m = scalar<double>(require(problem, "m", "problem"), "m");
    const Vector u0 = vector_of(require(problem, "u0", "problem"), "u0");
    const Vector v0 = vector_of(require(problem, "v0", "problem"), "v0");

    const YAML::Node force = require(root, "force", "top level");
    require_map(force, "force");
    const Force base = parse_force(force, u0.size(), base_dir);
    try {
        sc.problem = CauchyProblem(m, u0, v0, base);
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("problem: ") + e.what(), line_of(problem));
    }

    const auto family = force["family"] ? scalar<std::string>(force["family"], "family") : std::string("fixed");
    if (family == "fixed") {
        if (force["family_amplitude"])
            throw ParseError("'family_amplitude' needs family oscillatory or square_wave", line_of(force["family_amplitude"]));
        sc.sequence = ForceSequence::fixed(base);
    } else if (family == "oscillatory" || family == "square_wave") {
        const Vector amp = vector_of(require(force, "family_amplitude", "force"), "family_amplitude");
        if (amp.size() != u0.size())
            throw ParseError("'family_amplitude' has the wrong dimension", line_of(force["family_amplitude"]));
        sc.sequence = family == "oscillatory" ? oscillatory_family(base, amp) : square_wave_family(base, amp);
    } else {
        throw ParseError("unknown family '" + family + "'", line_of(force["family"]));
    }

    if (const YAML::Node solver = root["solver"]) {
        require_map(solver, "solver");
        reject_unknown(solver, "solver", {"T_view", "s_tail", "ds", "quad_order", "solve_tol"});
        if (solver["T_view"]) sc.solver.T_view = scalar<double>(solver["T_view"], "T_view");
        if (solver["s_tail"]) sc.solver.s_tail = scalar<double>(solver["s_tail"], "s_tail");
        if (solver["ds"]) sc.solver.ds = scalar<double>(solver["ds"], "ds");
        if (solver["quad_order"]) sc.solver.quad_order = scalar<int>(solver["quad_order"], "quad_order");
        if (solver["solve_tol"]) sc.solver.solve_tol = scalar<double>(solver["solve_tol"], "solve_tol");
        try {
            sc.solver.validate(1);
        } catch (const std::exception& e) {
            throw ParseError(std::string("solver: ") + e.what(), line_of(solver));
        }
    }

    if (const YAML::Node sweep = root["sweep"]) {
        require_map(sweep, "sweep");
        reject_unknown(sweep, "sweep", {"h"});
        const YAML::Node hs = require(sweep, "h", "sweep");
        if (!hs.IsSequence()) throw ParseError("'h' must be a list of positive integers", line_of(hs));
        for (const auto& item : hs) {
            const int h = scalar<int>(item, "h");
            if (h < 1) throw ParseError("h values must be positive integers", line_of(item));
            if (!sc.h_values.empty() && h <= sc.h_values.back())
                throw ParseError("h values must be strictly increasing", line_of(item));
            sc.h_values.push_back(h);
        }
    }

    if (const YAML::Node output = root["output"]) {
        require_map(output, "output");
        reject_unknown(output, "output", {"directory", "formats"});
        if (output["directory"]) sc.output_directory = scalar<std::string>(output["directory"], "directory");
        if (output["formats"]) {
            sc.formats.clear();
            for (const auto& item : output["formats"]) {
                const auto f = scalar<std::string>(item, "formats");
                if (f != "csv" && f != "json") throw ParseError("unknown output format '" + f + "'", line_of(item));
                sc.formats.push_back(f);
            }
        }
    }
    return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file " + path.string(), 0);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), path.parent_path());
}

}  // namespace wie
