#pragma once

// Run configuration: a single JSON file per run, strictly validated
// (unknown keys rejected, ranges checked), with presets mirroring the paper
// figures.

#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluxqa/circuit.hpp"
#include "fluxqa/errors.hpp"
#include "fluxqa/pipeline.hpp"

namespace fluxqa {

using nlohmann::json;

enum class ExperimentKind { figure1, figure2, figure3, figure6, invariants, custom };
enum class SystemKind { cshunt_1q, cjj_2q };

struct RunConfig {
    SystemKind system = SystemKind::cshunt_1q;
    ExperimentKind experiment = ExperimentKind::custom;
    int threads = 0;
    std::string output_directory = "out";

    OneQubitSystem cshunt;
    TwoQubitSystem cjj;
    SolverSettings solver;

    double t_f = 5.0;
    std::vector<double> t_f_list;

    json canonical;  // the fully resolved configuration, for hashing/manifest
};

namespace detail {

inline void reject_unknown(const json& node, const std::set<std::string>& allowed,
                           const std::string& where) {
    for (auto it = node.begin(); it != node.end(); ++it)
        if (!allowed.count(it.key()))
            throw ValidationError("load_config", "unknown key '" + where + it.key() + "'");
}

inline double get_number(const json& node, const std::string& key, double fallback,
                         const std::string& where) {
    if (!node.contains(key)) return fallback;
    if (!node[key].is_number())
        throw ValidationError("load_config", "'" + where + key + "' must be a number");
    return node[key].get<double>();
}

inline int get_int(const json& node, const std::string& key, int fallback,
                   const std::string& where) {
    if (!node.contains(key)) return fallback;
    if (!node[key].is_number_integer())
        throw ValidationError("load_config", "'" + where + key + "' must be an integer");
    return node[key].get<int>();
}

}  // namespace detail

inline RunConfig default_config() {
    RunConfig cfg;
    cfg.cshunt = cshunt_system();
    cfg.cjj = cjj_system();
    cfg.t_f_list = {1, 2, 5, 10, 20, 50, 100, 200};
    return cfg;
}

inline RunConfig preset_config(const std::string& name) {
    RunConfig cfg = default_config();
    if (name == "figure1") {
        cfg.system = SystemKind::cshunt_1q;
        cfg.experiment = ExperimentKind::figure1;
    } else if (name == "figure2") {
        cfg.system = SystemKind::cjj_2q;
        cfg.experiment = ExperimentKind::figure2;
    } else if (name == "figure3") {
        cfg.system = SystemKind::cjj_2q;
        cfg.experiment = ExperimentKind::figure3;
    } else if (name == "figure6") {
        cfg.system = SystemKind::cshunt_1q;
        cfg.experiment = ExperimentKind::figure6;
    } else if (name == "invariants") {
        cfg.system = SystemKind::cshunt_1q;
        cfg.experiment = ExperimentKind::invariants;
    } else {
        throw ValidationError("preset_config", "unknown preset '" + name + "'");
    }
    return cfg;
}

inline ExperimentKind parse_experiment(const std::string& s) {
    if (s == "figure1") return ExperimentKind::figure1;
    if (s == "figure2") return ExperimentKind::figure2;
    if (s == "figure3") return ExperimentKind::figure3;
    if (s == "figure6") return ExperimentKind::figure6;
    if (s == "invariants") return ExperimentKind::invariants;
    if (s == "custom") return ExperimentKind::custom;
    throw ValidationError("load_config", "unknown experiment '" + s + "'");
}

inline std::string experiment_name(ExperimentKind e) {
    switch (e) {
        case ExperimentKind::figure1: return "figure1";
        case ExperimentKind::figure2: return "figure2";
        case ExperimentKind::figure3: return "figure3";
        case ExperimentKind::figure6: return "figure6";
        case ExperimentKind::invariants: return "invariants";
        default: return "custom";
    }
}

inline RunConfig config_from_json(const json& root) {
    RunConfig cfg = default_config();
    detail::reject_unknown(root, {"system", "experiment", "threads", "output", "solver", "dynamics",
                                  "cshunt", "cjj", "preset"},
                           "");

    if (root.contains("preset")) cfg = preset_config(root["preset"].get<std::string>());

    if (root.contains("system")) {
        const std::string s = root["system"].get<std::string>();
        if (s == "cshunt_1q")
            cfg.system = SystemKind::cshunt_1q;
        else if (s == "cjj_2q")
            cfg.system = SystemKind::cjj_2q;
        else
            throw ValidationError("load_config", "unknown system '" + s + "'");
    }
    if (root.contains("experiment"))
        cfg.experiment = parse_experiment(root["experiment"].get<std::string>());
    cfg.threads = detail::get_int(root, "threads", cfg.threads, "");
    if (root.contains("output")) {
        detail::reject_unknown(root["output"], {"directory"}, "output.");
        if (root["output"].contains("directory"))
            cfg.output_directory = root["output"]["directory"].get<std::string>();
    }

    if (root.contains("solver")) {
        const json& s = root["solver"];
        detail::reject_unknown(s,
                               {"eig_tol", "eig_max_iterations", "degeneracy_threshold",
                                "overlap_threshold", "max_bisections", "spectral_margin",
                                "ode_rtol", "ode_atol"},
                               "solver.");
        cfg.solver.eig.tol = detail::get_number(s, "eig_tol", cfg.solver.eig.tol, "solver.");
        cfg.solver.eig.max_iterations =
            detail::get_int(s, "eig_max_iterations", cfg.solver.eig.max_iterations, "solver.");
        cfg.solver.eig.degeneracy_threshold = detail::get_number(
            s, "degeneracy_threshold", cfg.solver.eig.degeneracy_threshold, "solver.");
        cfg.solver.gauge.overlap_threshold =
            detail::get_number(s, "overlap_threshold", cfg.solver.gauge.overlap_threshold, "solver.");
        cfg.solver.max_bisections =
            detail::get_int(s, "max_bisections", cfg.solver.max_bisections, "solver.");
        cfg.solver.spectral_margin =
            detail::get_number(s, "spectral_margin", cfg.solver.spectral_margin, "solver.");
        cfg.solver.ode.rtol = detail::get_number(s, "ode_rtol", cfg.solver.ode.rtol, "solver.");
        cfg.solver.ode.atol = detail::get_number(s, "ode_atol", cfg.solver.ode.atol, "solver.");
    }

    if (root.contains("dynamics")) {
        const json& d = root["dynamics"];
        detail::reject_unknown(d, {"t_f", "t_f_list"}, "dynamics.");
        if (d.contains("t_f")) cfg.t_f = d["t_f"].get<double>();
        if (d.contains("t_f_list")) {
            cfg.t_f_list.clear();
            for (const auto& v : d["t_f_list"]) cfg.t_f_list.push_back(v.get<double>());
        }
    }

    auto parse_schedule = [&](const json& n, Schedule& sched, const std::string& where) {
        detail::reject_unknown(n, {"s_points", "cjj_flux_start", "cjj_flux_end", "kappa"}, where);
        const int pts = detail::get_int(n, "s_points", static_cast<int>(sched.s_grid.size()), where);
        if (pts < 3) throw ValidationError("load_config", "'" + where + "s_points' too small");
        sched.s_grid = uniform_grid(static_cast<std::size_t>(pts));
        sched.cjj_flux_endpoints.first =
            detail::get_number(n, "cjj_flux_start", sched.cjj_flux_endpoints.first, where);
        sched.cjj_flux_endpoints.second =
            detail::get_number(n, "cjj_flux_end", sched.cjj_flux_endpoints.second, where);
        if (n.contains("kappa")) {
            const std::string k = n["kappa"].get<std::string>();
            if (k == "identity")
                sched.kappa.kind = KappaKind::identity;
            else if (k == "smoothstep")
                sched.kappa.kind = KappaKind::smoothstep;
            else
                throw ValidationError("load_config", "unknown kappa '" + k + "'");
        }
    };

    if (root.contains("cshunt")) {
        const json& c = root["cshunt"];
        detail::reject_unknown(c, {"params", "schedule", "mesh", "bias_mode", "ip_table"}, "cshunt.");
        if (c.contains("params")) {
            detail::reject_unknown(c["params"], {"E_S", "E_J", "bias_scale"}, "cshunt.params.");
            cfg.cshunt.params.kinetic_energy =
                detail::get_number(c["params"], "E_S", cfg.cshunt.params.kinetic_energy, "cshunt.params.");
            cfg.cshunt.params.josephson_energy =
                detail::get_number(c["params"], "E_J", cfg.cshunt.params.josephson_energy, "cshunt.params.");
            cfg.cshunt.params.cshunt_scale =
                detail::get_number(c["params"], "bias_scale", cfg.cshunt.params.cshunt_scale, "cshunt.params.");
        }
        if (c.contains("schedule")) parse_schedule(c["schedule"], cfg.cshunt.schedule, "cshunt.schedule.");
        if (c.contains("mesh")) {
            detail::reject_unknown(c["mesh"], {"lower", "upper", "points"}, "cshunt.mesh.");
            cfg.cshunt.mesh.lower =
                detail::get_number(c["mesh"], "lower", cfg.cshunt.mesh.lower, "cshunt.mesh.");
            cfg.cshunt.mesh.upper =
                detail::get_number(c["mesh"], "upper", cfg.cshunt.mesh.upper, "cshunt.mesh.");
            cfg.cshunt.mesh.points =
                detail::get_int(c["mesh"], "points", cfg.cshunt.mesh.points, "cshunt.mesh.");
        }
        if (c.contains("bias_mode")) {
            const std::string m = c["bias_mode"].get<std::string>();
            if (m == "self")
                cfg.cshunt.profile_options.cshunt_mode = CshuntBiasMode::self;
            else if (m == "table")
                cfg.cshunt.profile_options.cshunt_mode = CshuntBiasMode::table;
            else
                throw ValidationError("load_config", "unknown bias_mode '" + m + "'");
        }
        if (c.contains("ip_table")) {
            std::vector<double> xs, ys;
            for (const auto& row : c["ip_table"]) {
                if (!row.is_array() || row.size() != 2)
                    throw ValidationError("load_config", "cshunt.ip_table rows must be [s, value]");
                xs.push_back(row[0].get<double>());
                ys.push_back(row[1].get<double>());
            }
            cfg.cshunt.profile_options.cshunt_ip_table = CubicSpline(xs, ys);
        }
        if (cfg.cshunt.profile_options.cshunt_mode == CshuntBiasMode::table &&
            !cfg.cshunt.profile_options.cshunt_ip_table)
            throw ValidationError("load_config", "cshunt.bias_mode 'table' requires cshunt.ip_table");
    }

    if (root.contains("cjj")) {
        const json& c = root["cjj"];
        detail::reject_unknown(c, {"params", "schedule", "mesh", "ising"}, "cjj.");
        if (c.contains("params")) {
            detail::reject_unknown(c["params"], {"E_C", "E_J", "E_L", "E_M"}, "cjj.params.");
            cfg.cjj.params.kinetic_energy =
                detail::get_number(c["params"], "E_C", cfg.cjj.params.kinetic_energy, "cjj.params.");
            cfg.cjj.params.josephson_energy =
                detail::get_number(c["params"], "E_J", cfg.cjj.params.josephson_energy, "cjj.params.");
            cfg.cjj.params.inductive_energy =
                detail::get_number(c["params"], "E_L", cfg.cjj.params.inductive_energy, "cjj.params.");
            cfg.cjj.params.mutual_energy =
                detail::get_number(c["params"], "E_M", cfg.cjj.params.mutual_energy, "cjj.params.");
        }
        if (c.contains("schedule")) parse_schedule(c["schedule"], cfg.cjj.schedule, "cjj.schedule.");
        if (c.contains("mesh")) {
            detail::reject_unknown(c["mesh"], {"points_per_axis", "half_width", "max_dimension"},
                                   "cjj.mesh.");
            cfg.cjj.mesh.points =
                detail::get_int(c["mesh"], "points_per_axis", cfg.cjj.mesh.points, "cjj.mesh.");
            const double w = detail::get_number(c["mesh"], "half_width", 0.0, "cjj.mesh.");
            const double half = w > 0.0 ? w : cjj_half_width(cfg.cjj.params);
            cfg.cjj.mesh.lower = -half;
            cfg.cjj.mesh.upper = half;
            cfg.cjj.dimension_cap = static_cast<std::int64_t>(detail::get_number(
                c["mesh"], "max_dimension", static_cast<double>(cfg.cjj.dimension_cap), "cjj.mesh."));
        } else {
            const double half = cjj_half_width(cfg.cjj.params);
            cfg.cjj.mesh.lower = -half;
            cfg.cjj.mesh.upper = half;
        }
        if (c.contains("ising")) {
            detail::reject_unknown(c["ising"], {"h", "couplings"}, "cjj.ising.");
            if (c["ising"].contains("h")) {
                cfg.cjj.ising.local_fields.clear();
                for (const auto& v : c["ising"]["h"]) cfg.cjj.ising.local_fields.push_back(v.get<double>());
            }
            if (c["ising"].contains("couplings")) {
                cfg.cjj.ising.couplings.clear();
                for (const auto& row : c["ising"]["couplings"]) {
                    if (!row.is_array() || row.size() != 3)
                        throw ValidationError("load_config", "cjj.ising.couplings rows must be [i, j, J]");
                    cfg.cjj.ising.couplings.emplace_back(row[0].get<int>(), row[1].get<int>(),
                                                         row[2].get<double>());
                }
            }
            cfg.cjj.ising.validate("load_config");
        }
    }

    // cross-field validation
    cfg.cshunt.params.validate(CircuitFamily::cshunt, "load_config");
    cfg.cjj.params.validate(CircuitFamily::cjj, "load_config");
    cfg.cshunt.schedule.validate("load_config");
    cfg.cjj.schedule.validate("load_config");
    cfg.cshunt.mesh.validate("load_config");
    cfg.cjj.mesh.validate("load_config");
    const bool needs_tf = cfg.experiment == ExperimentKind::figure1 ||
                          cfg.experiment == ExperimentKind::figure2;
    if (needs_tf && !(cfg.t_f > 0.0))
        throw ValidationError("load_config", "dynamics experiment requires t_f > 0");
    if (cfg.experiment == ExperimentKind::figure3 && cfg.t_f_list.empty())
        throw ValidationError("load_config", "figure3 requires a non-empty t_f_list");

    // resolved canonical form
    json canon;
    canon["system"] = cfg.system == SystemKind::cshunt_1q ? "cshunt_1q" : "cjj_2q";
    canon["experiment"] = experiment_name(cfg.experiment);
    canon["threads"] = cfg.threads;
    canon["output"]["directory"] = cfg.output_directory;
    canon["solver"] = {{"eig_tol", cfg.solver.eig.tol},
                       {"eig_max_iterations", cfg.solver.eig.max_iterations},
                       {"degeneracy_threshold", cfg.solver.eig.degeneracy_threshold},
                       {"overlap_threshold", cfg.solver.gauge.overlap_threshold},
                       {"max_bisections", cfg.solver.max_bisections},
                       {"spectral_margin", cfg.solver.spectral_margin},
                       {"ode_rtol", cfg.solver.ode.rtol},
                       {"ode_atol", cfg.solver.ode.atol}};
    canon["dynamics"] = {{"t_f", cfg.t_f}, {"t_f_list", cfg.t_f_list}};
    canon["cshunt"] = {{"params",
                        {{"E_S", cfg.cshunt.params.kinetic_energy},
                         {"E_J", cfg.cshunt.params.josephson_energy},
                         {"bias_scale", cfg.cshunt.params.cshunt_scale}}},
                       {"schedule",
                        {{"s_points", cfg.cshunt.schedule.s_grid.size()},
                         {"cjj_flux_start", cfg.cshunt.schedule.cjj_flux_endpoints.first},
                         {"cjj_flux_end", cfg.cshunt.schedule.cjj_flux_endpoints.second},
                         {"kappa", cfg.cshunt.schedule.kappa.kind == KappaKind::identity
                                       ? "identity"
                                       : "smoothstep"}}},
                       {"mesh",
                        {{"lower", cfg.cshunt.mesh.lower},
                         {"upper", cfg.cshunt.mesh.upper},
                         {"points", cfg.cshunt.mesh.points}}}};
    json couplings = json::array();
    for (const auto& [i, j, J] : cfg.cjj.ising.couplings) couplings.push_back({i, j, J});
    canon["cjj"] = {{"params",
                     {{"E_C", cfg.cjj.params.kinetic_energy},
                      {"E_J", cfg.cjj.params.josephson_energy},
                      {"E_L", cfg.cjj.params.inductive_energy},
                      {"E_M", cfg.cjj.params.mutual_energy}}},
                    {"schedule",
                     {{"s_points", cfg.cjj.schedule.s_grid.size()},
                      {"cjj_flux_start", cfg.cjj.schedule.cjj_flux_endpoints.first},
                      {"cjj_flux_end", cfg.cjj.schedule.cjj_flux_endpoints.second},
                      {"kappa", cfg.cjj.schedule.kappa.kind == KappaKind::identity ? "identity"
                                                                                   : "smoothstep"}}},
                    {"mesh",
                     {{"points_per_axis", cfg.cjj.mesh.points},
                      {"half_width", cfg.cjj.mesh.upper},
                      {"max_dimension", cfg.cjj.dimension_cap}}},
                    {"ising", {{"h", cfg.cjj.ising.local_fields}, {"couplings", couplings}}}};
    cfg.canonical = canon;
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("load_config", "cannot open '" + path + "'");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("load_config", std::string("parse failure: ") + e.what());
    }
    return config_from_json(root);
}

// Environment overrides, limited to output directory and thread count.
inline void apply_env_overrides(RunConfig& cfg) {
    if (const char* dir = std::getenv("FLUXQA_OUT")) cfg.output_directory = dir;
    if (const char* th = std::getenv("FLUXQA_THREADS")) cfg.threads = std::atoi(th);
    cfg.solver.threads = cfg.threads;
}

}  // namespace fluxqa
