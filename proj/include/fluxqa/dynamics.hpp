#pragma once

// Propagation of the effective Schroedinger equation i dpsi/ds = H(s) psi in
// either frame, with or without the geometric term.  The integrator is an
// embedded Dormand-Prince 5(4) pair with PI step control; Hamiltonian values
// between grid points come from natural cubic splines of the matrix entries.
// The state norm is never renormalized: norm drift is a diagnostic.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "fluxqa/circuit.hpp"
#include "fluxqa/errors.hpp"
#include "fluxqa/spline.hpp"

namespace fluxqa {

struct OdeOptions {
    double rtol = 1.0e-9;
    double atol = 1.0e-12;
    double initial_step = 1.0e-4;
    double min_step = 1.0e-14;
    long max_steps = 2'000'000;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
};

// Dormand-Prince 5(4) on a complex state vector.  rhs(s, y, dy) fills dy.
// Samples records y at the requested s values (strictly increasing, first
// equals s0); returns per-sample states.
inline std::vector<Eigen::VectorXcd> dopri5(
    const std::function<void(double, const Eigen::VectorXcd&, Eigen::VectorXcd&)>& rhs,
    Eigen::VectorXcd y, const std::vector<double>& samples, const OdeOptions& opt,
    OdeStats* stats = nullptr) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    if (samples.size() < 2) throw ValidationError("dopri5", "need at least two sample points");
    std::vector<Eigen::VectorXcd> out;
    out.reserve(samples.size());
    out.push_back(y);

    const Eigen::Index n = y.size();
    Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), yerr(n);
    double s = samples.front();
    double h = opt.initial_step;
    rhs(s, y, k1);
    long steps = 0;
    double prev_err = 1.0;

    for (std::size_t target = 1; target < samples.size(); ++target) {
        const double s_end = samples[target];
        while (s < s_end) {
            if (s_end - s <= opt.min_step) {
                s = s_end;  // snap: residual below the resolvable step
                break;
            }
            if (++steps > opt.max_steps)
                throw StepFailureError("dopri5", "step budget exhausted");
            const double h_trial = h;
            bool clipped = false;
            if (s + h >= s_end) {
                h = s_end - s;
                clipped = true;
            }
            ytmp = y + h * a21 * k1;
            rhs(s + c2 * h, ytmp, k2);
            ytmp = y + h * (a31 * k1 + a32 * k2);
            rhs(s + c3 * h, ytmp, k3);
            ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
            rhs(s + c4 * h, ytmp, k4);
            ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            rhs(s + c5 * h, ytmp, k5);
            ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            rhs(s + h, ytmp, k6);
            ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            rhs(s + h, ynew, k7);
            yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            double err = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double scale =
                    opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                const double q = std::abs(yerr[i]) / scale;
                err += q * q;
            }
            err = std::sqrt(err / static_cast<double>(n));

            if (err <= 1.0) {
                s += h;
                y.swap(ynew);
                k1.swap(k7);  // FSAL
                if (stats) ++stats->accepted;
                if (clipped) {
                    h = h_trial;  // resume with the unclipped proposal
                } else {
                    const double fac = 0.9 * std::pow(std::max(err, 1e-16), -0.7 / 5.0) *
                                       std::pow(prev_err, 0.4 / 5.0);
                    prev_err = std::max(err, 1e-16);
                    h *= std::clamp(fac, 0.2, 5.0);
                }
            } else {
                if (stats) ++stats->rejected;
                h *= std::clamp(0.9 * std::pow(err, -1.0 / 5.0), 0.2, 1.0);
            }
            if (h < opt.min_step)
                throw StepFailureError("dopri5", "step size underflow at s=" + std::to_string(s));
        }
        out.push_back(y);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Frame tables and trajectories
// ---------------------------------------------------------------------------

// Spline table of one propagation frame: H(s) = t_f kappa_dot(s) M(s) - i S(s)
// with M real symmetric (the dynamical part) and S real antisymmetric
// (G = i S).  For the instantaneous frame M is diagonal; for the
// computational frame M = V H_tilde V^T.
class FrameTable {
public:
    FrameTable() = default;

    FrameTable(std::string basis_tag, std::vector<double> grid,
               const std::vector<Eigen::MatrixXd>& dynamical,
               const std::vector<Eigen::MatrixXd>& connection, Kappa kappa)
        : basis_(std::move(basis_tag)), grid_(std::move(grid)), kappa_(kappa),
          n_(dynamical.front().rows()) {
        if (dynamical.size() != grid_.size() || connection.size() != grid_.size())
            throw ValidationError("FrameTable", "table lengths differ from grid");
        build(dyn_, dynamical);
        build(conn_, connection);
    }

    const std::string& basis() const { return basis_; }
    const std::vector<double>& grid() const { return grid_; }
    Eigen::Index dim() const { return n_; }
    const Kappa& kappa() const { return kappa_; }

    // H(s) in GHz-per-unit-s form, already including t_f and kappa_dot.
    Eigen::MatrixXcd hamiltonian(double s, double t_f, bool include_G) const {
        Eigen::MatrixXcd H(n_, n_);
        const double pref = t_f * kappa_.dot(s);
        for (Eigen::Index r = 0; r < n_; ++r)
            for (Eigen::Index c = 0; c < n_; ++c) {
                double re = pref * dyn_[static_cast<std::size_t>(r * n_ + c)](s);
                double im = include_G ? -conn_[static_cast<std::size_t>(r * n_ + c)](s) : 0.0;
                H(r, c) = std::complex<double>(re, im);
            }
        return H;
    }

private:
    void build(std::vector<CubicSpline>& dst, const std::vector<Eigen::MatrixXd>& src) {
        dst.reserve(static_cast<std::size_t>(n_ * n_));
        std::vector<double> vals(grid_.size());
        for (Eigen::Index r = 0; r < n_; ++r)
            for (Eigen::Index c = 0; c < n_; ++c) {
                for (std::size_t j = 0; j < grid_.size(); ++j) vals[j] = src[j](r, c);
                dst.emplace_back(grid_, vals);
            }
    }

    std::string basis_;
    std::vector<double> grid_;
    Kappa kappa_;
    Eigen::Index n_ = 0;
    std::vector<CubicSpline> dyn_, conn_;
};

struct Trajectory {
    std::vector<double> s;
    std::vector<Eigen::VectorXcd> psi;
    std::string basis;   // "instantaneous" or "computational"
    bool with_G = true;
    double t_f = 0.0;
    OdeStats stats;

    // |psi_a(s)|^2 per recorded point
    Eigen::MatrixXd populations() const {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(s.size()), psi.front().size());
        for (std::size_t j = 0; j < s.size(); ++j)
            out.row(static_cast<Eigen::Index>(j)) = psi[j].cwiseAbs2().transpose();
        return out;
    }

    double final_norm_drift() const { return std::abs(psi.back().norm() - 1.0); }
};

inline Trajectory propagate(const FrameTable& table, double t_f, bool include_G,
                            const Eigen::VectorXcd& initial, const OdeOptions& opt = {}) {
    if (initial.size() != table.dim())
        throw ValidationError("propagate", "initial state dimension mismatch");
    Trajectory traj;
    traj.s = table.grid();
    traj.basis = table.basis();
    traj.with_G = include_G;
    traj.t_f = t_f;

    auto rhs = [&](double s, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy.noalias() = std::complex<double>(0.0, -1.0) * (table.hamiltonian(s, t_f, include_G) * y);
    };
    traj.psi = dopri5(rhs, initial, traj.s, opt, &traj.stats);
    return traj;
}

inline void check_compatible(const Trajectory& a, const Trajectory& b, const std::string& stage) {
    if (a.t_f != b.t_f) throw MismatchedRunsError(stage, "t_f differs");
    if (a.basis != b.basis) throw MismatchedRunsError(stage, "basis tag differs");
    if (a.s.size() != b.s.size()) throw MismatchedRunsError(stage, "sample grids differ");
    if (a.psi.front().size() != b.psi.front().size())
        throw MismatchedRunsError(stage, "state dimensions differ");
}

// |<psi_G(s)|psi_noG(s)>|^2 per recorded point.
inline std::vector<double> fidelity_series(const Trajectory& traj_G, const Trajectory& traj_noG) {
    check_compatible(traj_G, traj_noG, "fidelity_series");
    std::vector<double> out(traj_G.s.size());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = std::norm(traj_G.psi[j].dot(traj_noG.psi[j]));
    return out;
}

}  // namespace fluxqa
