#pragma once

// End-to-end pipelines for the two paper systems.
//
// Stage 1 (zero bias): sweep the single-qubit problem at phi_x = 0, build the
// computational basis and the profile functions A(s), B(s), I_p(s), and from
// them the bias-flux table phi_x(s).
// Stage 2 (biased): sweep the full problem with the bias table installed,
// gauge-fix, build H_tilde(s) and the geometric connection G(s) plus its
// Hellmann-Feynman oracle, construct V(s) from the model Hamiltonian, and
// transform the connection to the computational frame.
// Stage 3: propagate either frame with or without G.

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <vector>

#include "fluxqa/circuit.hpp"
#include "fluxqa/comp_basis.hpp"
#include "fluxqa/dynamics.hpp"
#include "fluxqa/frame.hpp"
#include "fluxqa/mesh.hpp"
#include "fluxqa/pauli.hpp"
#include "fluxqa/spectral.hpp"

namespace fluxqa {

struct SolverSettings {
    EigenOptions eig;
    GaugeOptions gauge;
    int max_bisections = 3;
    double spectral_margin = 0.01;  // GHz, required E_k - E_{k-1} clearance
    OdeOptions ode;
    int threads = 0;
};

namespace detail {

inline void check_margin(const std::vector<SpectralSlice>& slices, double required,
                         const std::string& stage) {
    for (const auto& sl : slices)
        if (sl.margin < required)
            throw DegenerateSubspaceError(stage, "spectral margin " + std::to_string(sl.margin) +
                                                     " GHz at s=" + std::to_string(sl.s) +
                                                     " below required " + std::to_string(required));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Shared statics: everything both the figures and the dynamics need.
// ---------------------------------------------------------------------------

struct StaticData {
    std::vector<double> grid;                // biased-sweep s values
    std::vector<SpectralSlice> zero_bias;    // single-qubit, phi_x = 0
    std::vector<SpectralSlice> biased;       // tracked subspace of the full problem
    ProfileFunctions profiles;
    Schedule biased_schedule;                // includes the bias table
    std::vector<Eigen::MatrixXd> S;          // connection, G = i S
    std::vector<Eigen::MatrixXd> S_hf;       // Hellmann-Feynman oracle
    std::vector<Eigen::MatrixXd> V;          // energy -> computational basis
    std::vector<Eigen::VectorXd> model_eigs; // model spectrum per s
    std::vector<Eigen::MatrixXd> SC;         // transformed connection
    std::vector<ModelResidual> residuals;    // trace-matched model residual per s

    Eigen::Index tracked() const { return biased.front().energies.size(); }

    std::vector<EffectiveFrame> frames(const Kappa& kappa) const {
        std::vector<EffectiveFrame> out(biased.size());
        for (std::size_t j = 0; j < biased.size(); ++j) {
            out[j].s = biased[j].s;
            out[j].h_tilde = biased[j].energies;
            out[j].connection = S[j];
            out[j].kappa_dot = kappa.dot(biased[j].s);
        }
        return out;
    }

    // Frame tables for propagation.
    FrameTable instantaneous_table(const Kappa& kappa) const {
        std::vector<Eigen::MatrixXd> dyn(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j)
            dyn[j] = Eigen::MatrixXd(biased[j].energies.asDiagonal());
        return FrameTable("instantaneous", grid, dyn, S, kappa);
    }

    FrameTable computational_table(const Kappa& kappa) const {
        std::vector<Eigen::MatrixXd> dyn(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j)
            dyn[j] = V[j] * biased[j].energies.asDiagonal() * V[j].transpose();
        return FrameTable("computational", grid, dyn, SC, kappa);
    }

    // Exact gap over model gap for tracked level k (k = 1 .. N-1).
    std::vector<double> gap_ratio(int k) const {
        std::vector<double> out(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j)
            out[j] = (biased[j].energies[k] - biased[j].energies[0]) /
                     (model_eigs[j][k] - model_eigs[j][0]);
        return out;
    }

    // Single-qubit scalar profiles.  g(s) = <1(s)| d/ds |0(s)> = S_10; the
    // transformed profile g^y(s) = S^C_01 obeys the closed-form identity
    // g^y = g + (2/Delta^2)(Adot B - A Bdot) with Delta = 2 sqrt(A^2 + B^2).
    std::vector<double> g_series() const {
        std::vector<double> out(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) out[j] = S[j](1, 0);
        return out;
    }
    std::vector<double> gy_direct_series() const {
        std::vector<double> out(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) out[j] = SC[j](0, 1);
        return out;
    }
    std::vector<double> gy_analytic_series() const {
        std::vector<double> out(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double A = profiles.A_at(grid[j]), B = profiles.B_at(grid[j]);
            const double delta_model = 2.0 * std::hypot(A, B);
            out[j] = analytic_gy(S[j](1, 0), A, B, profiles.A_dot(grid[j]),
                                 profiles.B_dot(grid[j]), delta_model);
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// System descriptions
// ---------------------------------------------------------------------------

struct OneQubitSystem {
    CircuitFamily family = CircuitFamily::cshunt;
    CircuitParams params;
    Schedule schedule;  // without bias table
    Mesh mesh;
    ProfileOptions profile_options;
};

struct TwoQubitSystem {
    CircuitParams params;  // CJJ family
    Schedule schedule;
    Mesh mesh;             // per axis
    IsingSpec ising;
    std::int64_t dimension_cap = 1'000'000;
};

inline OneQubitSystem cshunt_system(std::size_t s_points = 100, int mesh_points = 600) {
    OneQubitSystem sys;
    sys.family = CircuitFamily::cshunt;
    sys.params = cshunt_preset();
    sys.schedule.s_grid = uniform_grid(s_points);
    sys.schedule.cjj_flux_endpoints = {2.9, 2.2};
    sys.schedule.t_f = 5.0;
    sys.mesh = Mesh{-M_PI, M_PI, mesh_points};
    return sys;
}

// CJJ mesh half-width: the confining bound P >= E_L phi^2/2 - 2 E_J gives a
// boundary clearance of at least 40 E_C when E_L w^2 / 2 = 40 E_C + 4 E_J.
inline double cjj_half_width(const CircuitParams& p) {
    return std::sqrt(2.0 * (40.0 * p.kinetic_energy + 4.0 * p.josephson_energy) /
                     p.inductive_energy);
}

inline TwoQubitSystem cjj_system(std::size_t s_points = 100, int mesh_points_per_axis = 200) {
    TwoQubitSystem sys;
    sys.params = cjj_preset();
    sys.schedule.s_grid = uniform_grid(s_points);
    sys.schedule.cjj_flux_endpoints = {2.6, 1.9};
    sys.schedule.t_f = 5.0;
    const double w = cjj_half_width(sys.params);
    sys.mesh = Mesh{-w, w, mesh_points_per_axis};
    sys.ising.local_fields = {1.0, 0.4};
    sys.ising.couplings = {{0, 1, -0.7}};
    return sys;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace detail {

// Zero-bias single-qubit sweep (shared by both pipelines; for the pair this
// runs on the per-axis mesh so discretization bias cancels in gap ratios).
inline std::vector<SpectralSlice> zero_bias_sweep(CircuitFamily family, const CircuitParams& params,
                                                  const Schedule& sched, const Mesh& mesh,
                                                  const SolverSettings& set) {
    Schedule unbiased = sched;
    unbiased.bias_table.reset();
    SweepProblem prob;
    prob.hamiltonian = [family, &params, unbiased, &mesh](double s) {
        auto pot = [&](double phi) {
            return family == CircuitFamily::cshunt
                       ? cshunt_potential(phi, s, params, unbiased)
                       : cjj_potential(phi, s, 0.0, params, unbiased);
        };
        return assemble_1q(mesh, params.kinetic_coefficient(family), pot);
    };
    SweepOptions opt;
    opt.tracked = 2;
    opt.eig = set.eig;
    opt.gauge = set.gauge;
    opt.max_bisections = set.max_bisections;
    opt.threads = set.threads;
    auto slices = spectral_sweep(prob, sched.s_grid, opt);
    check_margin(slices, set.spectral_margin, "zero_bias_sweep");
    return slices;
}

}  // namespace detail

// Full single-qubit pipeline statics.
inline StaticData build_one_qubit(const OneQubitSystem& sys, const SolverSettings& set) {
    sys.params.validate(sys.family, "build_one_qubit");
    sys.schedule.validate("build_one_qubit");
    sys.mesh.validate("build_one_qubit");

    StaticData out;
    out.zero_bias = detail::zero_bias_sweep(sys.family, sys.params, sys.schedule, sys.mesh, set);
    out.profiles = profile_functions(out.zero_bias, sys.family, sys.params, sys.schedule, sys.mesh,
                                     sys.profile_options);
    out.biased_schedule = sys.schedule;
    out.biased_schedule.bias_table = out.profiles.spline_phi_x;

    SweepProblem prob;
    const Schedule& bsched = out.biased_schedule;
    prob.hamiltonian = [&sys, &bsched](double s) {
        auto pot = [&](double phi) {
            return sys.family == CircuitFamily::cshunt
                       ? cshunt_potential(phi, s, sys.params, bsched)
                       : cjj_potential(phi, s, 1.0, sys.params, bsched);
        };
        return assemble_1q(sys.mesh, sys.params.kinetic_coefficient(sys.family), pot);
    };
    SweepOptions sopt;
    sopt.tracked = 2;
    sopt.eig = set.eig;
    sopt.gauge = set.gauge;
    sopt.max_bisections = set.max_bisections;
    sopt.threads = set.threads;
    out.biased = spectral_sweep(prob, sys.schedule.s_grid, sopt);
    detail::check_margin(out.biased, set.spectral_margin, "build_one_qubit");
    out.grid.resize(out.biased.size());
    for (std::size_t j = 0; j < out.biased.size(); ++j) out.grid[j] = out.biased[j].s;

    // connection + oracle
    out.S.resize(out.grid.size());
    out.S_hf.resize(out.grid.size());
    for (std::size_t j = 0; j < out.grid.size(); ++j) {
        out.S[j] = geometric_term(out.biased, j);
        Eigen::VectorXd dh(sys.mesh.points);
        for (int i = 0; i < sys.mesh.points; ++i)
            dh[i] = sys.family == CircuitFamily::cshunt
                        ? cshunt_potential_ds(sys.mesh.node(i), out.grid[j], sys.params, bsched)
                        : cjj_potential_ds(sys.mesh.node(i), out.grid[j], 1.0, sys.params, bsched);
        out.S_hf[j] = hellmann_feynman_G(out.biased[j], dh, set.eig.degeneracy_threshold);
    }

    // V(s): model eigenbasis, anchored largest-component-positive at s = 0 and
    // sign-continued along the grid.
    out.V.resize(out.grid.size());
    out.model_eigs.resize(out.grid.size());
    out.residuals.resize(out.grid.size());
    for (std::size_t j = 0; j < out.grid.size(); ++j) {
        const double A = out.profiles.A_at(out.grid[j]);
        const double B = out.profiles.B_at(out.grid[j]);
        const Eigen::MatrixXd* prev = j ? &out.V[j - 1] : nullptr;
        const ModelBasis mb =
            model_eigenbasis(model_hamiltonian_1q(A, B), prev, nullptr,
                             set.eig.degeneracy_threshold, set.gauge.overlap_threshold);
        out.V[j] = mb.V;
        out.model_eigs[j] = mb.eigenvalues;
        out.residuals[j] = model_residual(out.biased[j].energies, mb.eigenvalues);
    }
    out.SC = transform_G(out.S, out.V, out.grid, DerivativeMode::spline);
    return out;
}

// Full two-qubit pipeline statics.
inline StaticData build_two_qubit(const TwoQubitSystem& sys, const SolverSettings& set) {
    sys.params.validate(CircuitFamily::cjj, "build_two_qubit");
    sys.schedule.validate("build_two_qubit");
    sys.mesh.validate("build_two_qubit");
    sys.ising.validate("build_two_qubit");
    if (sys.ising.local_fields.size() != 2)
        throw ValidationError("build_two_qubit", "the pair pipeline needs exactly 2 qubits");

    StaticData out;
    out.zero_bias =
        detail::zero_bias_sweep(CircuitFamily::cjj, sys.params, sys.schedule, sys.mesh, set);
    out.profiles = profile_functions(out.zero_bias, CircuitFamily::cjj, sys.params, sys.schedule,
                                     sys.mesh, ProfileOptions{});
    out.biased_schedule = sys.schedule;
    out.biased_schedule.bias_table = out.profiles.spline_phi_x;

    // Ising -> circuit dictionary: tilts -h_i, coupling feed -J_12.
    const double h1 = sys.ising.local_fields[0], h2 = sys.ising.local_fields[1];
    const double J12 = sys.ising.coupling(0, 1);
    const double g1 = -h1, g2 = -h2, gJ = -J12;

    SweepProblem prob;
    const Schedule& bsched = out.biased_schedule;
    prob.hamiltonian = [&sys, &bsched, g1, g2, gJ](double s) {
        auto pot1 = [&](double phi) { return cjj_potential(phi, s, g1, sys.params, bsched); };
        auto pot2 = [&](double phi) { return cjj_potential(phi, s, g2, sys.params, bsched); };
        auto pint = [&](double a, double b) {
            return coupling_potential(a, b, s, gJ, sys.params, bsched);
        };
        return assemble_2q(sys.mesh, sys.mesh, sys.params.kinetic_coefficient(CircuitFamily::cjj),
                           pot1, pot2, pint, sys.dimension_cap);
    };
    SweepOptions sopt;
    sopt.tracked = 4;
    sopt.eig = set.eig;
    sopt.gauge = set.gauge;
    sopt.max_bisections = set.max_bisections;
    sopt.threads = set.threads;
    out.biased = spectral_sweep(prob, sys.schedule.s_grid, sopt);
    detail::check_margin(out.biased, set.spectral_margin, "build_two_qubit");
    out.grid.resize(out.biased.size());
    for (std::size_t j = 0; j < out.biased.size(); ++j) out.grid[j] = out.biased[j].s;

    out.S.resize(out.grid.size());
    out.S_hf.resize(out.grid.size());
    const int L = sys.mesh.points;
    for (std::size_t j = 0; j < out.grid.size(); ++j) {
        out.S[j] = geometric_term(out.biased, j);
        Eigen::VectorXd dh(static_cast<Eigen::Index>(L) * L);
        for (int i1 = 0; i1 < L; ++i1) {
            const double f1 = sys.mesh.node(i1);
            const double d1 = cjj_potential_ds(f1, out.grid[j], g1, sys.params, bsched);
            for (int i2 = 0; i2 < L; ++i2) {
                const double f2 = sys.mesh.node(i2);
                dh[static_cast<Eigen::Index>(i1) * L + i2] =
                    d1 + cjj_potential_ds(f2, out.grid[j], g2, sys.params, bsched) +
                    coupling_potential_ds(f1, f2, out.grid[j], gJ, sys.params, bsched);
            }
        }
        out.S_hf[j] = hellmann_feynman_G(out.biased[j], dh, set.eig.degeneracy_threshold);
    }

    // V(s): model eigenbasis, anchored largest-component-positive at s = 0 and
    // sign-continued along the grid.
    out.V.resize(out.grid.size());
    out.model_eigs.resize(out.grid.size());
    out.residuals.resize(out.grid.size());
    for (std::size_t j = 0; j < out.grid.size(); ++j) {
        const double A = out.profiles.A_at(out.grid[j]);
        const double B = out.profiles.B_at(out.grid[j]);
        const Eigen::MatrixXd* prev = j ? &out.V[j - 1] : nullptr;
        const ModelBasis mb =
            model_eigenbasis(model_hamiltonian_2q(A, B, sys.ising), prev, nullptr,
                             set.eig.degeneracy_threshold, set.gauge.overlap_threshold);
        out.V[j] = mb.V;
        out.model_eigs[j] = mb.eigenvalues;
        out.residuals[j] = model_residual(out.biased[j].energies, mb.eigenvalues);
    }
    out.SC = transform_G(out.S, out.V, out.grid, DerivativeMode::spline);
    return out;
}

// ---------------------------------------------------------------------------
// Dynamics driver
// ---------------------------------------------------------------------------

struct Run {
    Trajectory inst_G, inst_noG, comp_G, comp_noG;
    std::vector<double> fidelity;  // computational-frame fidelity series

    // Populations in the computational basis at the end of the anneal, from
    // either frame (instantaneous amplitudes mapped through V(1)).
    static Eigen::VectorXd end_populations(const Trajectory& traj, const Eigen::MatrixXd& V_end) {
        if (traj.basis == "computational") return traj.psi.back().cwiseAbs2();
        Eigen::VectorXcd mapped = V_end.cast<std::complex<double>>() * traj.psi.back();
        return mapped.cwiseAbs2();
    }
};

inline Run run_dynamics(const StaticData& st, double t_f, const Kappa& kappa,
                        const OdeOptions& ode) {
    Run out;
    const Eigen::Index n = st.tracked();
    Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(n);
    e0[0] = 1.0;  // instantaneous ground state at s = 0
    Eigen::VectorXcd c0 = st.V.front().cast<std::complex<double>>() * e0;

    const FrameTable ti = st.instantaneous_table(kappa);
    const FrameTable tc = st.computational_table(kappa);
    out.inst_G = propagate(ti, t_f, true, e0, ode);
    out.inst_noG = propagate(ti, t_f, false, e0, ode);
    out.comp_G = propagate(tc, t_f, true, c0, ode);
    out.comp_noG = propagate(tc, t_f, false, c0, ode);
    out.fidelity = fidelity_series(out.comp_G, out.comp_noG);
    return out;
}

struct SweepPoint {
    double t_f = 0.0;
    double fidelity = 0.0;  // end-of-anneal |<psi_G|psi_noG>|^2
};

inline std::vector<SweepPoint> tf_sweep(const StaticData& st, const std::vector<double>& t_f_list,
                                        const Kappa& kappa, const OdeOptions& ode) {
    std::vector<SweepPoint> out;
    const FrameTable tc = st.computational_table(kappa);
    Eigen::VectorXcd c0 =
        st.V.front().cast<std::complex<double>>() * Eigen::VectorXcd::Unit(st.tracked(), 0);
    for (double tf : t_f_list) {
        const Trajectory a = propagate(tc, tf, true, c0, ode);
        const Trajectory b = propagate(tc, tf, false, c0, ode);
        out.push_back({tf, fidelity_series(a, b).back()});
    }
    return out;
}

}  // namespace fluxqa
