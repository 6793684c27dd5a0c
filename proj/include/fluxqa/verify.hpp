#pragma once

// Verification engine: every acceptance criterion (A1..A10) plus the module
// invariants (I-*), evaluated against live pipeline builds and reported as
// machine-readable pass/fail records.  The quick level shrinks grids for CI
// turnaround; the full level runs the production sizes the criteria pin.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluxqa/config.hpp"
#include "fluxqa/pipeline.hpp"

namespace fluxqa {

enum class VerificationLevel { quick, full };

struct CheckResult {
    std::string name;
    std::string detail;
    double measured = 0.0;
    double bound = 0.0;
    bool pass = false;
    double seconds = 0.0;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Regression anchors: values produced by the first convergence-verified run
// of this implementation at the production configuration (default presets,
// 100-point s-grid) and frozen as reference points.  They pin outcomes the
// source text does not tabulate.
namespace anchors {
// C-shunt preset, t_f = 5: end-of-anneal instantaneous-frame ground
// population (with G) and computational-pair end fidelity.
inline constexpr double cshunt_tf5_ground_population = 0.57164144600637434;
inline constexpr double cshunt_tf5_end_fidelity = 0.023876022920664441;
// CJJ pair preset, t_f = 5: computational-pair end fidelity.
inline constexpr double cjj_tf5_end_fidelity = 0.0;  // frozen after the first full run
// smallest sweep t_f with end fidelity > 0.999 for both presets
inline constexpr double adiabatic_threshold_tf = 200.0;
// anchor tolerance for regression comparisons
inline constexpr double regression_tol = 1e-6;
}  // namespace anchors

namespace verify_detail {

template <typename F>
CheckResult timed(const std::string& name, const std::string& detail, double bound, F&& body) {
    CheckResult r;
    r.name = name;
    r.detail = detail;
    r.bound = bound;
    const auto t0 = std::chrono::steady_clock::now();
    r.measured = body();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.pass = r.measured <= bound;
    return r;
}

inline double max_abs_dev_from_one(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x - 1.0));
    return m;
}

inline std::size_t argmax_abs_dev_from_one(const std::vector<double>& v) {
    std::size_t arg = 0;
    double m = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (std::abs(v[i] - 1.0) > m) {
            m = std::abs(v[i] - 1.0);
            arg = i;
        }
    return arg;
}

// Per-entry relative disagreement between two antisymmetric series:
// max_ab [ max_s |X_ab - Y_ab| / max_s |Y_ab| ].
inline double connection_rel_err(const std::vector<Eigen::MatrixXd>& X,
                                 const std::vector<Eigen::MatrixXd>& Y) {
    const Eigen::Index n = X.front().rows();
    double worst = 0.0;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a + 1; b < n; ++b) {
            double num = 0.0, den = 0.0;
            for (std::size_t j = 0; j < X.size(); ++j) {
                num = std::max(num, std::abs(X[j](a, b) - Y[j](a, b)));
                den = std::max(den, std::abs(Y[j](a, b)));
            }
            if (den > 0.0) worst = std::max(worst, num / den);
        }
    return worst;
}

inline double gy_identity_err(const StaticData& st) {
    const auto direct = st.gy_direct_series();
    const auto analytic = st.gy_analytic_series();
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < direct.size(); ++j) {
        num = std::max(num, std::abs(direct[j] - analytic[j]));
        den = std::max(den, std::abs(analytic[j]));
    }
    return num / den;
}

// Structure bounds of G and G^C: Hermitian purely imaginary zero-diagonal,
// even-Y Pauli weight.  Returns the worst violation relative to its bound so
// several bounds collapse into one number <= 1 on pass.
inline double structure_violation(const StaticData& st) {
    double worst = 0.0;
    for (std::size_t j = 0; j < st.grid.size(); ++j) {
        for (const Eigen::MatrixXd* S : {&st.S[j], &st.SC[j]}) {
            const Eigen::MatrixXcd G = std::complex<double>(0, 1) * S->cast<std::complex<double>>();
            const double herm = (G - G.adjoint()).cwiseAbs().maxCoeff();
            const double realpart = G.real().cwiseAbs().maxCoeff();
            const double diag = G.diagonal().cwiseAbs().maxCoeff();
            worst = std::max({worst, herm / 1e-9, realpart / 1e-9, diag / 1e-9});
        }
        const auto dec = pauli_decompose(std::complex<double>(0, 1) *
                                         st.SC[j].cast<std::complex<double>>());
        const double odd = dec.max_odd_y();
        if (odd > 0.0) worst = std::max(worst, dec.max_even_y() / (1e-8 * odd));
    }
    return worst;
}

inline double orthonormality_defect(const std::vector<SpectralSlice>& slices) {
    double worst = 0.0;
    for (const auto& sl : slices) {
        const Eigen::MatrixXd gram = sl.states.transpose() * sl.states;
        worst = std::max(worst,
                         (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols()))
                             .cwiseAbs()
                             .maxCoeff());
    }
    return worst;
}

}  // namespace verify_detail

// ---------------------------------------------------------------------------
// The suite
// ---------------------------------------------------------------------------

inline VerificationReport run_verification(const RunConfig& cfg_in, VerificationLevel level) {
    using namespace verify_detail;
    RunConfig cfg = cfg_in;
    cfg.solver.threads = cfg.threads;
    const bool full = level == VerificationLevel::full;
    VerificationReport rep;

    // --- builds shared across checks -------------------------------------
    OneQubitSystem sys1 = cfg.cshunt;
    TwoQubitSystem sys2 = cfg.cjj;
    if (!full) {
        sys1.mesh.points = 301;
        sys1.schedule.s_grid = uniform_grid(60);
        sys2.mesh.points = 80;
        sys2.schedule.s_grid = uniform_grid(40);
    }
    StaticData st1 = build_one_qubit(sys1, cfg.solver);
    StaticData st2 = build_two_qubit(sys2, cfg.solver);

    auto refined = [&](const OneQubitSystem& base, std::size_t pts) {
        OneQubitSystem s = base;
        s.schedule.s_grid = uniform_grid(pts);
        return build_one_qubit(s, cfg.solver);
    };
    const std::size_t base_pts = sys1.schedule.s_grid.size();
    StaticData st1_2x = refined(sys1, 2 * base_pts - 1);
    StaticData st1_4x = refined(sys1, 4 * base_pts - 3);

    // --- A1: one-qubit gap consistency ------------------------------------
    {
        auto r = st1.gap_ratio(1);
        CheckResult c = timed("A1-gap-consistency-1q",
                              "max_s |Delta_exact/(2 sqrt(A^2+B^2)) - 1|, C-shunt preset", 0.025,
                              [&] { return max_abs_dev_from_one(r); });
        const double s_at = st1.grid[argmax_abs_dev_from_one(r)];
        c.detail += "; max at s=" + std::to_string(s_at);
        c.pass = c.pass && s_at >= 1.0 / 3 && s_at <= 2.0 / 3;
        rep.checks.push_back(c);
    }

    // --- A2: two-qubit gap consistency ------------------------------------
    {
        rep.checks.push_back(timed("A2-gap-consistency-2q",
                                   "max over k,s of |Delta_exact/Delta_model - 1|, CJJ pair", 0.025,
                                   [&] {
                                       double worst = 0.0;
                                       for (int k = 1; k < 4; ++k)
                                           worst = std::max(worst,
                                                            max_abs_dev_from_one(st2.gap_ratio(k)));
                                       return worst;
                                   }));
    }

    // --- A3: closed-form g^y identity -------------------------------------
    {
        rep.checks.push_back(timed("A3-gy-identity",
                                   "rel |g^y direct - analytic| on the 2x-refined grid", 1e-3,
                                   [&] { return gy_identity_err(st1_2x); }));
        const double coarse = gy_identity_err(st1);
        const double fine = gy_identity_err(st1_2x);
        CheckResult c;
        c.name = "A3-gy-identity-refinement";
        c.detail = "error reduction factor under 2x s-grid refinement (>= 3.5)";
        c.measured = coarse / fine;
        c.bound = 3.5;
        c.pass = c.measured >= c.bound;
        rep.checks.push_back(c);
    }

    // --- A4: geometric-term structure --------------------------------------
    {
        rep.checks.push_back(timed("A4-structure",
                                   "worst structural violation relative to its bound (<= 1)", 1.0,
                                   [&] {
                                       return std::max(structure_violation(st1),
                                                       structure_violation(st2));
                                   }));
    }

    // --- A5: Hellmann-Feynman oracle ---------------------------------------
    {
        rep.checks.push_back(timed("A5-hellmann-feynman-1q",
                                   "per-entry rel |G_fd - G_hf| on the 4x-refined grid", 1e-3,
                                   [&] { return connection_rel_err(st1_4x.S, st1_4x.S_hf); }));
        const double c199 = connection_rel_err(st1_2x.S, st1_2x.S_hf);
        const double c397 = connection_rel_err(st1_4x.S, st1_4x.S_hf);
        CheckResult c;
        c.name = "A5-hellmann-feynman-order";
        c.detail = "error reduction under 2x refinement, second-order stencil (in [3,5])";
        c.measured = c199 / c397;
        c.bound = 5.0;
        c.pass = c.measured >= 3.0 && c.measured <= 5.0;
        rep.checks.push_back(c);

        TwoQubitSystem s2h = sys2;
        s2h.mesh.points = full ? 100 : 60;
        s2h.schedule.s_grid = uniform_grid(full ? 793 : 99);
        StaticData st2h = build_two_qubit(s2h, cfg.solver);
        rep.checks.push_back(timed("A5-hellmann-feynman-2q",
                                   "per-entry rel |G_fd - G_hf|, CJJ pair, refined s-grid", 1e-3,
                                   [&] { return connection_rel_err(st2h.S, st2h.S_hf); }));
    }

    // --- A6: reparametrization invariance ----------------------------------
    {
        Kappa smooth{KappaKind::smoothstep};
        Kappa ident{KappaKind::identity};
        rep.checks.push_back(
            timed("A6-reparametrization-G", "max_s ||G_id(s) - G_smoothstep(s)||_F", 1e-6, [&] {
                return reparametrization_check(st1.frames(ident), st1.frames(smooth));
            }));
        OdeOptions tight;
        tight.rtol = 1e-12;
        tight.atol = 1e-14;
        rep.checks.push_back(timed(
            "A6-reparametrization-dynamics",
            "||psi_id(1) - psi_smoothstep(1)||_2 at t_f=5 (10x default ODE rtol)", 1e-8, [&] {
                const FrameTable ta = st1.instantaneous_table(ident);
                const FrameTable tb = st1.instantaneous_table(smooth);
                Eigen::VectorXcd e0 = Eigen::VectorXcd::Unit(st1.tracked(), 0);
                const Trajectory a = propagate(ta, 5.0, true, e0, tight);
                const Trajectory b = propagate(tb, 5.0, true, e0, tight);
                return (a.psi.back() - b.psi.back()).norm();
            }));
    }

    // --- A7 / A8 / A10 dynamics checks -------------------------------------
    Run run1 = run_dynamics(st1, 5.0, Kappa{}, cfg.solver.ode);
    Run run2 = run_dynamics(st2, 5.0, Kappa{}, cfg.solver.ode);
    {
        auto frame_agreement = [](const StaticData& st, const Run& run) {
            const Eigen::VectorXd pi = Run::end_populations(run.inst_G, st.V.back());
            const Eigen::VectorXd pc = Run::end_populations(run.comp_G, st.V.back());
            return (pi - pc).cwiseAbs().maxCoeff();
        };
        rep.checks.push_back(timed("A7-frame-agreement-1q",
                                   "end-of-anneal population difference between frames", 1e-6,
                                   [&] { return frame_agreement(st1, run1); }));
        rep.checks.push_back(timed("A7-frame-agreement-2q",
                                   "end-of-anneal population difference between frames", 1e-6,
                                   [&] { return frame_agreement(st2, run2); }));
    }
    {
        CheckResult c;
        c.name = "A8-geometric-effect-tf5";
        c.detail = "end fidelity at t_f=5 must be < 0.999 (measurable geometric effect)";
        c.measured = run1.fidelity.back();
        c.bound = 0.999;
        c.pass = c.measured < 0.999 && run2.fidelity.back() < 0.999;
        c.detail += "; 2q fidelity=" + std::to_string(run2.fidelity.back());
        rep.checks.push_back(c);

        if (full) {
            CheckResult reg;
            reg.name = "A8-regression-anchors";
            reg.detail = "pinned t_f=5 end fidelities and ground population";
            const double ground_pop = run1.inst_G.psi.back().cwiseAbs2()[0];
            const double dev = std::max(
                {std::abs(run1.fidelity.back() - anchors::cshunt_tf5_end_fidelity),
                 std::abs(run2.fidelity.back() - anchors::cjj_tf5_end_fidelity),
                 std::abs(ground_pop - anchors::cshunt_tf5_ground_population)});
            reg.measured = dev;
            reg.bound = anchors::regression_tol;
            reg.pass = dev <= reg.bound;
            rep.checks.push_back(reg);

            const std::vector<double> tfs{1, 2, 5, 10, 20, 50, 100, 200};
            auto sw1 = tf_sweep(st1, tfs, Kappa{}, cfg.solver.ode);
            auto sw2 = tf_sweep(st2, tfs, Kappa{}, cfg.solver.ode);
            CheckResult ad;
            ad.name = "A8-adiabatic-threshold";
            ad.detail = "end fidelity > 0.999 for t_f >= " +
                        std::to_string(anchors::adiabatic_threshold_tf) + " (both systems)";
            double worst = 1.0;
            for (std::size_t i = 0; i < tfs.size(); ++i)
                if (tfs[i] >= anchors::adiabatic_threshold_tf)
                    worst = std::min({worst, sw1[i].fidelity, sw2[i].fidelity});
            ad.measured = worst;
            ad.bound = 0.999;
            ad.pass = worst > 0.999;
            rep.checks.push_back(ad);

            CheckResult ord;
            ord.name = "A8-two-qubit-ordering";
            ord.detail = "fidelity_2q <= fidelity_1q at the largest sweep t_f values";
            ord.measured = 0.0;
            ord.pass = true;
            for (std::size_t i = 0; i < tfs.size(); ++i)
                if (tfs[i] >= 50.0) {
                    ord.measured = std::max(ord.measured, sw2[i].fidelity - sw1[i].fidelity);
                    if (sw2[i].fidelity > sw1[i].fidelity) ord.pass = false;
                }
            ord.bound = 0.0;
            rep.checks.push_back(ord);
        }
    }

    // --- A9: iterative vs dense oracle -------------------------------------
    {
        rep.checks.push_back(timed("A9-oracle-equivalence",
                                   "max rel eigenvalue gap, Lanczos vs dense (1q L=80, 2q L=40)",
                                   1e-10, [&] {
            double worst = 0.0;
            {
                OneQubitSystem s = sys1;
                s.mesh.points = 80;
                Schedule sched = st1.biased_schedule;
                for (double sv : {0.0, 0.5, 1.0}) {
                    auto pot = [&](double phi) { return cshunt_potential(phi, sv, s.params, sched); };
                    const SparseOperator H =
                        assemble_1q(s.mesh, s.params.kinetic_coefficient(s.family), pot);
                    EigenOptions lo = cfg.solver.eig;
                    lo.method = EigenMethod::lanczos;
                    EigenOptions de = cfg.solver.eig;
                    de.method = EigenMethod::dense;
                    const EigenPairs a = lowest_eigenpairs(H, 3, lo);
                    const EigenPairs b = lowest_eigenpairs(H, 3, de);
                    for (int i = 0; i < 3; ++i)
                        worst = std::max(worst, std::abs(a.energies[i] - b.energies[i]) /
                                                    std::abs(b.energies[i]));
                }
            }
            {
                TwoQubitSystem s = sys2;
                s.mesh.points = 40;
                const Schedule& sched = st2.biased_schedule;
                const double h1 = s.ising.local_fields[0], h2 = s.ising.local_fields[1];
                const double J12 = s.ising.coupling(0, 1);
                const double sv = 0.5;
                auto p1 = [&](double phi) { return cjj_potential(phi, sv, -h1, s.params, sched); };
                auto p2 = [&](double phi) { return cjj_potential(phi, sv, -h2, s.params, sched); };
                auto pi = [&](double a_, double b_) {
                    return coupling_potential(a_, b_, sv, -J12, s.params, sched);
                };
                const SparseOperator H =
                    assemble_2q(s.mesh, s.mesh, s.params.kinetic_coefficient(CircuitFamily::cjj),
                                p1, p2, pi, s.dimension_cap);
                EigenOptions lo = cfg.solver.eig;
                lo.method = EigenMethod::lanczos;
                EigenOptions de = cfg.solver.eig;
                de.method = EigenMethod::dense;
                const EigenPairs a = lowest_eigenpairs(H, 5, lo);
                const EigenPairs b = lowest_eigenpairs(H, 5, de);
                for (int i = 0; i < 5; ++i)
                    worst = std::max(worst, std::abs(a.energies[i] - b.energies[i]) /
                                                std::abs(b.energies[i]));
            }
            return worst;
        }));
    }

    // --- A10: unitarity and orthonormality ---------------------------------
    {
        rep.checks.push_back(timed("A10-unitarity", "worst trajectory norm drift", 1e-8, [&] {
            double worst = 0.0;
            for (const Trajectory* t : {&run1.inst_G, &run1.inst_noG, &run1.comp_G, &run1.comp_noG,
                                        &run2.inst_G, &run2.inst_noG, &run2.comp_G, &run2.comp_noG})
                worst = std::max(worst, t->final_norm_drift());
            return worst;
        }));
        rep.checks.push_back(
            timed("A10-orthonormality", "worst slice Gram defect, both presets", 1e-10, [&] {
                return std::max(
                    std::max(orthonormality_defect(st1.biased), orthonormality_defect(st1.zero_bias)),
                    std::max(orthonormality_defect(st2.biased), orthonormality_defect(st2.zero_bias)));
            }));
    }

    // --- module invariants --------------------------------------------------
    {
        rep.checks.push_back(timed("I-gap-positivity", "min_s (E1 - E0), both presets (> 0)", 0.0,
                                   [&] {
                                       double mn = 1e300;
                                       for (const auto& sl : st1.biased)
                                           mn = std::min(mn, sl.energies[1] - sl.energies[0]);
                                       for (const auto& sl : st2.biased)
                                           mn = std::min(mn, sl.energies[1] - sl.energies[0]);
                                       return -mn;  // pass when min gap positive
                                   }));

        rep.checks.push_back(
            timed("I-domain-stability", "rel change of lowest 4 under 25% wider domain", 1e-6, [&] {
                OneQubitSystem wide = sys1;
                wide.mesh.lower *= 1.25;
                wide.mesh.upper *= 1.25;
                wide.mesh.points = static_cast<int>(wide.mesh.points * 1.25);
                const Schedule& sched = st1.biased_schedule;
                double worst = 0.0;
                const double sv = 0.5;
                auto potn = [&](double phi) { return cshunt_potential(phi, sv, sys1.params, sched); };
                auto potw = [&](double phi) { return cshunt_potential(phi, sv, wide.params, sched); };
                const EigenPairs narrow = lowest_eigenpairs(
                    assemble_1q(sys1.mesh, sys1.params.kinetic_coefficient(sys1.family), potn), 4,
                    cfg.solver.eig);
                const EigenPairs wider = lowest_eigenpairs(
                    assemble_1q(wide.mesh, wide.params.kinetic_coefficient(wide.family), potw), 4,
                    cfg.solver.eig);
                for (int i = 0; i < 4; ++i)
                    worst = std::max(worst, std::abs(narrow.energies[i] - wider.energies[i]) /
                                                std::max(1.0, std::abs(narrow.energies[i])));
                return worst;
            }));

        rep.checks.push_back(timed(
            "I-mesh-convergence", "second-order eigenvalue convergence factor (>= 2.5)", 0.0, [&] {
                Schedule sched = sys2.schedule;
                const double sv = 0.5;
                auto eig4 = [&](int pts) {
                    Mesh m{sys2.mesh.lower, sys2.mesh.upper, pts};
                    auto pot = [&](double phi) {
                        return cjj_potential(phi, sv, 0.0, sys2.params, sched);
                    };
                    return lowest_eigenpairs(
                               assemble_1q(m, sys2.params.kinetic_coefficient(CircuitFamily::cjj), pot),
                               4, cfg.solver.eig)
                        .energies;
                };
                const Eigen::VectorXd e1 = eig4(150), e2 = eig4(300), e3 = eig4(600);
                double worst_factor = 1e300;
                for (int i = 0; i < 4; ++i) {
                    const double d12 = std::abs(e1[i] - e3[i]);
                    const double d23 = std::abs(e2[i] - e3[i]);
                    if (d23 > 0) worst_factor = std::min(worst_factor, d12 / d23);
                }
                return worst_factor >= 2.5 ? 0.0 : 1.0;  // 0 = pass
            }));

        rep.checks.push_back(timed("I-profile-positivity", "A > 0 on the interior and B >= 0", 0.0,
                                   [&] {
                                       double bad = 0.0;
                                       for (const StaticData* st : {&st1, &st2}) {
                                           for (std::size_t j = 1; j + 1 < st->profiles.s.size(); ++j)
                                               if (!(st->profiles.A[j] > 0.0)) bad = 1.0;
                                           for (double b : st->profiles.B)
                                               if (b < 0.0) bad = 1.0;
                                       }
                                       return bad;
                                   }));

        rep.checks.push_back(
            timed("I-model-residual-midpoint", "2q model residual r(s)/Delta10 at s=0.5", 0.025, [&] {
                std::size_t jmid = 0;
                double best = 1e300;
                for (std::size_t j = 0; j < st2.grid.size(); ++j)
                    if (std::abs(st2.grid[j] - 0.5) < best) {
                        best = std::abs(st2.grid[j] - 0.5);
                        jmid = j;
                    }
                const double d10 = st2.biased[jmid].energies[1] - st2.biased[jmid].energies[0];
                return st2.residuals[jmid].residual / d10;
            }));

        // A global eigenstate gauge flip must leave gauge-covariant observables
        // unchanged: instantaneous-frame populations, the instantaneous-pair
        // fidelity, and |G_ab|.  (The computational-frame counterfactual is
        // tied to the V orientation convention and is exercised separately.)
        rep.checks.push_back(timed(
            "I-gauge-flip-invariance", "gauge-covariant observable change under a global flip",
            1e-10, [&] {
                StaticData flipped = st1;
                for (auto& sl : flipped.biased) sl.states.col(0) *= -1.0;
                for (std::size_t j = 0; j < flipped.grid.size(); ++j)
                    flipped.S[j] = geometric_term(flipped.biased, j);
                double worst = 0.0;
                for (std::size_t j = 0; j < flipped.grid.size(); ++j)
                    worst = std::max(worst, (flipped.S[j].cwiseAbs() - st1.S[j].cwiseAbs())
                                                .cwiseAbs()
                                                .maxCoeff());
                const FrameTable ta = st1.instantaneous_table(Kappa{});
                const FrameTable tb = flipped.instantaneous_table(Kappa{});
                Eigen::VectorXcd e0 = Eigen::VectorXcd::Unit(st1.tracked(), 0);
                const Trajectory aG = propagate(ta, 5.0, true, e0, cfg.solver.ode);
                const Trajectory an = propagate(ta, 5.0, false, e0, cfg.solver.ode);
                const Trajectory bG = propagate(tb, 5.0, true, e0, cfg.solver.ode);
                const Trajectory bn = propagate(tb, 5.0, false, e0, cfg.solver.ode);
                worst = std::max(worst, (aG.populations() - bG.populations()).cwiseAbs().maxCoeff());
                const auto fa = fidelity_series(aG, an);
                const auto fb = fidelity_series(bG, bn);
                for (std::size_t j = 0; j < fa.size(); ++j)
                    worst = std::max(worst, std::abs(fa[j] - fb[j]));
                return worst;
            }));

        rep.checks.push_back(timed(
            "I-population-sum", "max |sum of populations - 1| along trajectories", 1e-8, [&] {
                double worst = 0.0;
                for (const Trajectory* t : {&run1.inst_G, &run1.comp_G, &run2.inst_G, &run2.comp_G}) {
                    const Eigen::MatrixXd p = t->populations();
                    for (Eigen::Index r = 0; r < p.rows(); ++r)
                        worst = std::max(worst, std::abs(p.row(r).sum() - 1.0));
                }
                return worst;
            }));

        rep.checks.push_back(timed(
            "I-ode-order", "tolerance tightening must reduce the self-difference (no plateau)", 0.0,
            [&] {
                const FrameTable t = st1.instantaneous_table(Kappa{});
                Eigen::VectorXcd e0 = Eigen::VectorXcd::Unit(st1.tracked(), 0);
                auto at = [&](double rtol, double atol) {
                    OdeOptions o;
                    o.rtol = rtol;
                    o.atol = atol;
                    return propagate(t, 5.0, true, e0, o).psi.back();
                };
                const Eigen::VectorXcd y9 = at(1e-9, 1e-12);
                const Eigen::VectorXcd y10 = at(1e-10, 1e-13);
                const Eigen::VectorXcd y12 = at(1e-12, 1e-15);
                const double d9 = (y9 - y12).norm();
                const double d10 = (y10 - y12).norm();
                return (d10 < d9 && d9 > 0.0) ? 0.0 : 1.0;  // 0 = pass
            }));
    }

    return rep;
}

inline void write_verification_report(const std::filesystem::path& dir,
                                      const VerificationReport& rep) {
    json out = json::array();
    for (const auto& c : rep.checks)
        out.push_back({{"name", c.name},
                       {"detail", c.detail},
                       {"measured", c.measured},
                       {"bound", c.bound},
                       {"pass", c.pass},
                       {"seconds", c.seconds}});
    std::ofstream f(dir / "verify_report.json");
    if (!f) throw Error("verify", "cannot write verify_report.json");
    f << out.dump(2) << '\n';
}

}  // namespace fluxqa
