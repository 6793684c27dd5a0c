#pragma once

// CSV emission and experiment orchestration.  Output files are deterministic
// for a fixed config and build: fixed column order, 17-significant-digit
// values, one header row naming columns and units.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluxqa/config.hpp"
#include "fluxqa/pipeline.hpp"

namespace fluxqa {

namespace io_detail {

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path) {
        if (!out_) throw Error("io", "cannot open '" + path.string() + "' for writing");
        out_ << std::setprecision(17);
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << header[i] << (i + 1 < header.size() ? "," : "\n");
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << values[i] << (i + 1 < values.size() ? "," : "\n");
    }

private:
    std::ofstream out_;
};

inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// Emitters
// ---------------------------------------------------------------------------

inline std::string write_spectrum_csv(const std::filesystem::path& dir, const StaticData& st) {
    std::vector<std::string> header{"s"};
    for (Eigen::Index a = 0; a < st.tracked(); ++a)
        header.push_back("E" + std::to_string(a) + "_GHz");
    header.push_back("margin_GHz");
    io_detail::CsvWriter w(dir / "spectrum.csv", header);
    for (std::size_t j = 0; j < st.grid.size(); ++j) {
        std::vector<double> row{st.grid[j]};
        for (Eigen::Index a = 0; a < st.tracked(); ++a) row.push_back(st.biased[j].energies[a]);
        row.push_back(st.biased[j].margin);
        w.row(row);
    }
    return "spectrum.csv";
}

inline std::string write_frame_csv(const std::filesystem::path& dir, const StaticData& st) {
    const Eigen::Index n = st.tracked();
    std::vector<std::string> header{"s"};
    for (Eigen::Index a = 0; a < n; ++a) header.push_back("E" + std::to_string(a) + "_GHz");
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a + 1; b < n; ++b)
            header.push_back("ImG" + std::to_string(a) + std::to_string(b) + "_per_s");
    io_detail::CsvWriter w(dir / "frame.csv", header);
    for (std::size_t j = 0; j < st.grid.size(); ++j) {
        std::vector<double> row{st.grid[j]};
        for (Eigen::Index a = 0; a < n; ++a) row.push_back(st.biased[j].energies[a]);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = a + 1; b < n; ++b) row.push_back(st.S[j](a, b));
        w.row(row);
    }
    return "frame.csv";
}

// Fig. 1a data: schedules, exact gap, geometric profile.
inline std::string write_schedule_csv_1q(const std::filesystem::path& dir, const StaticData& st) {
    io_detail::CsvWriter w(dir / "schedule.csv",
                           {"s", "A_GHz", "B_GHz", "Delta_GHz", "gy_per_s"});
    const auto gy = st.gy_direct_series();
    for (std::size_t j = 0; j < st.grid.size(); ++j) {
        const double s = st.grid[j];
        w.row({s, st.profiles.A_at(s), st.profiles.B_at(s),
               st.biased[j].energies[1] - st.biased[j].energies[0], gy[j]});
    }
    return "schedule.csv";
}

// Fig. 2a data: gaps and the two-qubit geometric profiles (Pauli coefficients
// of G^C; both orderings emitted, no symmetry assumed).
inline std::string write_schedule_csv_2q(const std::filesystem::path& dir, const StaticData& st) {
    io_detail::CsvWriter w(
        dir / "schedule.csv",
        {"s", "Delta10_GHz", "Delta20_GHz", "Delta30_GHz", "gy_1_per_s", "gy_2_per_s",
         "gxy_12_per_s", "gxy_21_per_s", "gzy_12_per_s", "gzy_21_per_s"});
    for (std::size_t j = 0; j < st.grid.size(); ++j) {
        const auto dec = pauli_decompose(std::complex<double>(0.0, 1.0) *
                                         st.SC[j].cast<std::complex<double>>());
        const auto& E = st.biased[j].energies;
        w.row({st.grid[j], E[1] - E[0], E[2] - E[0], E[3] - E[0], dec.coefficient("YI"),
               dec.coefficient("IY"), dec.coefficient("XY"), dec.coefficient("YX"),
               dec.coefficient("ZY"), dec.coefficient("YZ")});
    }
    return "schedule.csv";
}

inline std::string write_gap_ratio_csv(const std::filesystem::path& dir, const StaticData& st,
                                       const std::string& stem) {
    const int n = static_cast<int>(st.tracked());
    std::vector<std::string> header{"s"};
    for (int k = 1; k < n; ++k)
        header.push_back("ratio_" + std::to_string(k) + "0");  // Delta_exact / Delta_model
    io_detail::CsvWriter w(dir / (stem + ".csv"), header);
    std::vector<std::vector<double>> ratios;
    for (int k = 1; k < n; ++k) ratios.push_back(st.gap_ratio(k));
    for (std::size_t j = 0; j < st.grid.size(); ++j) {
        std::vector<double> row{st.grid[j]};
        for (const auto& r : ratios) row.push_back(r[j]);
        w.row(row);
    }
    return stem + ".csv";
}

inline std::string write_dynamics_csv(const std::filesystem::path& dir, const StaticData& st,
                                      const Run& run) {
    const Eigen::Index n = st.tracked();
    std::vector<std::string> header{"s"};
    auto add = [&](const std::string& tag) {
        for (Eigen::Index a = 0; a < n; ++a)
            header.push_back("pop_" + tag + "_" + std::to_string(a));
    };
    add("inst_G");
    add("inst_noG");
    add("comp_G");
    add("comp_noG");
    header.push_back("fidelity");
    io_detail::CsvWriter w(dir / "dynamics.csv", header);
    const Eigen::MatrixXd pi = run.inst_G.populations();
    const Eigen::MatrixXd pin = run.inst_noG.populations();
    const Eigen::MatrixXd pc = run.comp_G.populations();
    const Eigen::MatrixXd pcn = run.comp_noG.populations();
    for (std::size_t j = 0; j < st.grid.size(); ++j) {
        std::vector<double> row{st.grid[j]};
        for (const Eigen::MatrixXd* m : {&pi, &pin, &pc, &pcn})
            for (Eigen::Index a = 0; a < n; ++a)
                row.push_back((*m)(static_cast<Eigen::Index>(j), a));
        row.push_back(run.fidelity[j]);
        w.row(row);
    }
    return "dynamics.csv";
}

inline std::string write_sweep_csv(const std::filesystem::path& dir,
                                   const std::vector<SweepPoint>& one_qubit,
                                   const std::vector<SweepPoint>* two_qubit) {
    std::vector<std::string> header{"t_f"};
    header.push_back(two_qubit ? "fidelity_1q" : "fidelity");
    if (two_qubit) header.push_back("fidelity_2q");
    io_detail::CsvWriter w(dir / "sweep.csv", header);
    for (std::size_t i = 0; i < one_qubit.size(); ++i) {
        std::vector<double> row{one_qubit[i].t_f, one_qubit[i].fidelity};
        if (two_qubit) row.push_back((*two_qubit)[i].fidelity);
        w.row(row);
    }
    return "sweep.csv";
}

inline void write_manifest(const std::filesystem::path& dir, const RunConfig& cfg,
                           const std::vector<std::string>& files, double wall_seconds) {
    json m;
    m["config_hash"] = io_detail::hex64(io_detail::fnv1a(cfg.canonical.dump()));
    m["experiment"] = experiment_name(cfg.experiment);
    m["grids"] = {{"cshunt_s_points", cfg.cshunt.schedule.s_grid.size()},
                  {"cshunt_mesh_points", cfg.cshunt.mesh.points},
                  {"cjj_s_points", cfg.cjj.schedule.s_grid.size()},
                  {"cjj_mesh_points_per_axis", cfg.cjj.mesh.points}};
    m["tolerances"] = cfg.canonical["solver"];
    m["wall_time_seconds"] = wall_seconds;
    m["files"] = files;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw Error("io", "cannot write manifest");
    out << m.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Experiment driver
// ---------------------------------------------------------------------------

struct ExperimentResult {
    std::vector<std::string> files;
    double wall_seconds = 0.0;
};

// One-shot experiment runner: builds everything the configured experiment
// needs and writes its canonical file set plus the manifest.
inline ExperimentResult run_experiment(const RunConfig& cfg_in) {
    RunConfig cfg = cfg_in;
    cfg.solver.threads = cfg.threads;
    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(cfg.output_directory);
    const std::filesystem::path dir = cfg.output_directory;
    ExperimentResult res;

    auto stamp = [&]() {
        res.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(dir, cfg, res.files, res.wall_seconds);
        res.files.push_back("manifest.json");
    };

    switch (cfg.experiment) {
        case ExperimentKind::figure1: {
            StaticData st = build_one_qubit(cfg.cshunt, cfg.solver);
            res.files.push_back(write_schedule_csv_1q(dir, st));
            res.files.push_back(write_frame_csv(dir, st));
            res.files.push_back(write_gap_ratio_csv(dir, st, "gap_ratio"));
            Run run = run_dynamics(st, cfg.t_f, cfg.cshunt.schedule.kappa, cfg.solver.ode);
            res.files.push_back(write_dynamics_csv(dir, st, run));
            break;
        }
        case ExperimentKind::figure2: {
            StaticData st = build_two_qubit(cfg.cjj, cfg.solver);
            res.files.push_back(write_schedule_csv_2q(dir, st));
            res.files.push_back(write_frame_csv(dir, st));
            res.files.push_back(write_gap_ratio_csv(dir, st, "gap_ratio"));
            Run run = run_dynamics(st, cfg.t_f, cfg.cjj.schedule.kappa, cfg.solver.ode);
            res.files.push_back(write_dynamics_csv(dir, st, run));
            break;
        }
        case ExperimentKind::figure3: {
            StaticData st1 = build_one_qubit(cfg.cshunt, cfg.solver);
            StaticData st2 = build_two_qubit(cfg.cjj, cfg.solver);
            auto sw1 = tf_sweep(st1, cfg.t_f_list, cfg.cshunt.schedule.kappa, cfg.solver.ode);
            auto sw2 = tf_sweep(st2, cfg.t_f_list, cfg.cjj.schedule.kappa, cfg.solver.ode);
            res.files.push_back(write_sweep_csv(dir, sw1, &sw2));
            break;
        }
        case ExperimentKind::figure6: {
            StaticData st1 = build_one_qubit(cfg.cshunt, cfg.solver);
            res.files.push_back(write_gap_ratio_csv(dir, st1, "gap_ratio_1q"));
            StaticData st2 = build_two_qubit(cfg.cjj, cfg.solver);
            res.files.push_back(write_gap_ratio_csv(dir, st2, "gap_ratio_2q"));
            break;
        }
        default:
            throw ValidationError("run_experiment",
                                  "experiment '" + experiment_name(cfg.experiment) +
                                      "' is not a one-shot experiment");
    }
    stamp();
    return res;
}

}  // namespace fluxqa
