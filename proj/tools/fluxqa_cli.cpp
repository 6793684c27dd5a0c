// Command-line driver: spectrum / frame / dynamics / sweep / verify.
// Each subcommand takes --config <path>, --out <dir>, --threads <n>.
// Exit code 0 on success, nonzero with a stage-tagged message otherwise.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "fluxqa/config.hpp"
#include "fluxqa/io.hpp"
#include "fluxqa/verify.hpp"

using namespace fluxqa;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_override;
    int threads_override = -1;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "run configuration file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", args.out_override, "output directory (overrides config)");
    sub->add_option("--threads", args.threads_override, "worker threads (0 = all cores)");
}

RunConfig prepare(const CommonArgs& args) {
    RunConfig cfg = load_config(args.config_path);
    apply_env_overrides(cfg);
    if (!args.out_override.empty()) cfg.output_directory = args.out_override;
    if (args.threads_override >= 0) cfg.threads = args.threads_override;
    cfg.solver.threads = cfg.threads;
    std::filesystem::create_directories(cfg.output_directory);
    return cfg;
}

StaticData build_statics(const RunConfig& cfg) {
    return cfg.system == SystemKind::cshunt_1q ? build_one_qubit(cfg.cshunt, cfg.solver)
                                               : build_two_qubit(cfg.cjj, cfg.solver);
}

void finish(const RunConfig& cfg, std::vector<std::string> files, double t0_seconds,
            std::chrono::steady_clock::time_point t0) {
    (void)t0_seconds;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(cfg.output_directory, cfg, files, wall);
    for (const auto& f : files) std::cout << "wrote " << cfg.output_directory << "/" << f << "\n";
    std::cout << "wrote " << cfg.output_directory << "/manifest.json\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fluxqa: effective-Hamiltonian and geometric-term simulator for flux-qubit annealing"};
    app.require_subcommand(1);

    CommonArgs a_spectrum, a_frame, a_dynamics, a_sweep, a_verify;
    std::string dump_operator;

    CLI::App* sub_spectrum =
        app.add_subcommand("spectrum", "sweep the instantaneous spectrum over the s-grid");
    add_common(sub_spectrum, a_spectrum);
    sub_spectrum->add_option("--dump-operator", dump_operator,
                             "write the assembled operator at s=0 as 'row col value' triplets");

    CLI::App* sub_frame = app.add_subcommand(
        "frame", "build the adiabatic frame: profiles, geometric term, gap ratios");
    add_common(sub_frame, a_frame);

    CLI::App* sub_dynamics =
        app.add_subcommand("dynamics", "propagate with and without the geometric term");
    add_common(sub_dynamics, a_dynamics);

    CLI::App* sub_sweep = app.add_subcommand("sweep", "end-of-anneal fidelity vs annealing time");
    add_common(sub_sweep, a_sweep);

    CLI::App* sub_verify = app.add_subcommand("verify", "run the invariant and acceptance checks");
    add_common(sub_verify, a_verify);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto t0 = std::chrono::steady_clock::now();
        if (sub_spectrum->parsed()) {
            RunConfig cfg = prepare(a_spectrum);
            if (!dump_operator.empty()) {
                // assemble at the first grid point, before the (possibly long) sweep
                SparseOperator op =
                    cfg.system == SystemKind::cshunt_1q
                        ? assemble_1q(cfg.cshunt.mesh,
                                      cfg.cshunt.params.kinetic_coefficient(cfg.cshunt.family),
                                      [&](double phi) {
                                          return cshunt_potential(phi, 0.0, cfg.cshunt.params,
                                                                  cfg.cshunt.schedule);
                                      })
                        : assemble_2q(
                              cfg.cjj.mesh, cfg.cjj.mesh,
                              cfg.cjj.params.kinetic_coefficient(CircuitFamily::cjj),
                              [&](double phi) {
                                  return cjj_potential(phi, 0.0, 0.0, cfg.cjj.params,
                                                       cfg.cjj.schedule);
                              },
                              [&](double phi) {
                                  return cjj_potential(phi, 0.0, 0.0, cfg.cjj.params,
                                                       cfg.cjj.schedule);
                              },
                              [&](double p1, double p2) {
                                  return coupling_potential(p1, p2, 0.0,
                                                            -cfg.cjj.ising.coupling(0, 1),
                                                            cfg.cjj.params, cfg.cjj.schedule);
                              },
                              cfg.cjj.dimension_cap);
                std::ofstream dump(dump_operator);
                if (!dump) throw Error("spectrum", "cannot open '" + dump_operator + "'");
                op.dump_triplets(dump);
                std::cout << "wrote " << dump_operator << "\n";
            }
            StaticData st = build_statics(cfg);
            finish(cfg, {write_spectrum_csv(cfg.output_directory, st)}, 0, t0);
        } else if (sub_frame->parsed()) {
            RunConfig cfg = prepare(a_frame);
            if (cfg.experiment == ExperimentKind::figure6) {
                ExperimentResult r = run_experiment(cfg);
                for (const auto& f : r.files) std::cout << "wrote " << cfg.output_directory << "/" << f << "\n";
                return 0;
            }
            StaticData st = build_statics(cfg);
            std::vector<std::string> files;
            files.push_back(cfg.system == SystemKind::cshunt_1q
                                ? write_schedule_csv_1q(cfg.output_directory, st)
                                : write_schedule_csv_2q(cfg.output_directory, st));
            files.push_back(write_frame_csv(cfg.output_directory, st));
            files.push_back(write_gap_ratio_csv(cfg.output_directory, st, "gap_ratio"));
            finish(cfg, files, 0, t0);
        } else if (sub_dynamics->parsed()) {
            RunConfig cfg = prepare(a_dynamics);
            StaticData st = build_statics(cfg);
            const Kappa kappa = cfg.system == SystemKind::cshunt_1q ? cfg.cshunt.schedule.kappa
                                                                    : cfg.cjj.schedule.kappa;
            std::vector<std::string> files;
            files.push_back(cfg.system == SystemKind::cshunt_1q
                                ? write_schedule_csv_1q(cfg.output_directory, st)
                                : write_schedule_csv_2q(cfg.output_directory, st));
            files.push_back(write_frame_csv(cfg.output_directory, st));
            files.push_back(write_gap_ratio_csv(cfg.output_directory, st, "gap_ratio"));
            Run run = run_dynamics(st, cfg.t_f, kappa, cfg.solver.ode);
            files.push_back(write_dynamics_csv(cfg.output_directory, st, run));
            finish(cfg, files, 0, t0);
        } else if (sub_sweep->parsed()) {
            RunConfig cfg = prepare(a_sweep);
            if (cfg.t_f_list.empty()) throw ValidationError("sweep", "t_f_list is empty");
            std::vector<std::string> files;
            if (cfg.experiment == ExperimentKind::figure3) {
                StaticData st1 = build_one_qubit(cfg.cshunt, cfg.solver);
                StaticData st2 = build_two_qubit(cfg.cjj, cfg.solver);
                auto sw1 = tf_sweep(st1, cfg.t_f_list, cfg.cshunt.schedule.kappa, cfg.solver.ode);
                auto sw2 = tf_sweep(st2, cfg.t_f_list, cfg.cjj.schedule.kappa, cfg.solver.ode);
                files.push_back(write_sweep_csv(cfg.output_directory, sw1, &sw2));
            } else {
                StaticData st = build_statics(cfg);
                const Kappa kappa = cfg.system == SystemKind::cshunt_1q ? cfg.cshunt.schedule.kappa
                                                                        : cfg.cjj.schedule.kappa;
                auto sw = tf_sweep(st, cfg.t_f_list, kappa, cfg.solver.ode);
                files.push_back(write_sweep_csv(cfg.output_directory, sw, nullptr));
            }
            finish(cfg, files, 0, t0);
        } else if (sub_verify->parsed()) {
            RunConfig cfg = prepare(a_verify);
            const VerificationReport report = run_verification(cfg, VerificationLevel::quick);
            write_verification_report(cfg.output_directory, report);
            for (const auto& c : report.checks)
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  measured=" << c.measured
                          << " bound=" << c.bound << "\n";
            std::cout << (report.all_pass() ? "verification passed\n" : "verification FAILED\n");
            return report.all_pass() ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
