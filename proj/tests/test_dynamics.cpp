#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "fluxqa/dynamics.hpp"

using namespace fluxqa;
using namespace std::complex_literals;

namespace {

std::vector<double> grid_of(std::size_t m) {
    std::vector<double> g(m);
    for (std::size_t j = 0; j < m; ++j) g[j] = static_cast<double>(j) / (m - 1);
    return g;
}

// Frame table with constant dynamical part M and a smooth connection bump.
FrameTable bump_table(double e0, double e1, double amp, std::size_t m = 61) {
    auto grid = grid_of(m);
    std::vector<Eigen::MatrixXd> dyn(m), conn(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double s = grid[j];
        dyn[j] = Eigen::Vector2d(e0, e1).asDiagonal();
        conn[j] = Eigen::MatrixXd(2, 2);
        const double bump = amp * std::exp(-50.0 * (s - 0.5) * (s - 0.5));
        conn[j] << 0.0, bump, -bump, 0.0;
    }
    return FrameTable("instantaneous", grid, dyn, conn, Kappa{});
}

}  // namespace

TEST_CASE("zero Hamiltonian leaves the state unchanged") {
    const FrameTable t = bump_table(0.0, 0.0, 0.0);
    Eigen::VectorXcd psi0(2);
    psi0 << std::complex<double>(0.6, 0.1), std::complex<double>(0.0, 0.79);
    psi0.normalize();
    const Trajectory traj = propagate(t, 0.0, false, psi0);
    for (const auto& psi : traj.psi) REQUIRE((psi - psi0).norm() < 1e-12);
}

TEST_CASE("diagonal no-G evolution: constant populations and exact phases") {
    const double e0 = -1.3, e1 = 2.4, tf = 3.7;
    const FrameTable t = bump_table(e0, e1, 0.9);
    Eigen::VectorXcd psi0(2);
    psi0 << std::sqrt(0.3), std::sqrt(0.7);
    const Trajectory traj = propagate(t, tf, false, psi0);
    const Eigen::MatrixXd pops = traj.populations();
    for (Eigen::Index j = 0; j < pops.rows(); ++j) {
        REQUIRE(pops(j, 0) == Catch::Approx(0.3).margin(1e-9));
        REQUIRE(pops(j, 1) == Catch::Approx(0.7).margin(1e-9));
    }
    // phases: psi_a(1) = exp(-i tf E_a) psi_a(0) for kappa = id and constant E
    const std::complex<double> expected0 = std::exp(-1i * tf * e0) * psi0[0];
    REQUIRE(std::abs(traj.psi.back()[0] - expected0) < 1e-8);
}

TEST_CASE("propagation against a closed-form constant Hamiltonian") {
    // H = tf * diag(0, 0) - i S with constant S: exact evolution is a rotation
    const std::size_t m = 31;
    auto grid = grid_of(m);
    std::vector<Eigen::MatrixXd> dyn(m, Eigen::MatrixXd::Zero(2, 2)), conn(m);
    const double w = 1.1;
    for (auto& c : conn) {
        c = Eigen::MatrixXd(2, 2);
        c << 0.0, w, -w, 0.0;
    }
    const FrameTable t("instantaneous", grid, dyn, conn, Kappa{});
    Eigen::VectorXcd psi0(2);
    psi0 << 1.0, 0.0;
    const Trajectory traj = propagate(t, 0.0, true, psi0);
    // i dpsi/ds = -i S psi  =>  psi(s) = exp(S s)-like real rotation generated by S^T
    // d psi/ds = -S psi: psi(1) = (cos w, +sin w)
    REQUIRE(std::abs(traj.psi.back()[0] - std::cos(w)) < 1e-9);
    REQUIRE(std::abs(traj.psi.back()[1] - std::sin(w)) < 1e-9);
}

TEST_CASE("norm is conserved without renormalization") {
    const FrameTable t = bump_table(-3.0, 5.0, 4.0);
    Eigen::VectorXcd psi0(2);
    psi0 << 1.0, 0.0;
    const Trajectory traj = propagate(t, 20.0, true, psi0);
    REQUIRE(traj.final_norm_drift() < 1e-8);
    const Eigen::MatrixXd pops = traj.populations();
    for (Eigen::Index j = 0; j < pops.rows(); ++j)
        REQUIRE(pops.row(j).sum() == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("tolerance tightening reduces the integration error") {
    const FrameTable t = bump_table(-2.0, 3.0, 2.5);
    Eigen::VectorXcd psi0(2);
    psi0 << 1.0, 0.0;
    auto run = [&](double rtol, double atol) {
        OdeOptions o;
        o.rtol = rtol;
        o.atol = atol;
        return propagate(t, 11.0, true, psi0, o).psi.back();
    };
    const Eigen::VectorXcd ref = run(1e-13, 1e-15);
    const double e_loose = (run(1e-7, 1e-10) - ref).norm();
    const double e_tight = (run(1e-9, 1e-12) - ref).norm();
    REQUIRE(e_tight < e_loose);
    REQUIRE(e_loose / std::max(e_tight, 1e-16) > 3.0);
}

TEST_CASE("fidelity series: trivial case and mismatched runs") {
    const FrameTable t = bump_table(-1.0, 1.0, 1.5);
    Eigen::VectorXcd psi0(2);
    psi0 << std::sqrt(0.5), std::sqrt(0.5);
    const Trajectory a = propagate(t, 2.0, true, psi0);
    const auto fid = fidelity_series(a, a);
    for (double f : fid) REQUIRE(f == Catch::Approx(1.0).margin(1e-9));

    const Trajectory b = propagate(t, 3.0, true, psi0);
    REQUIRE_THROWS_AS(fidelity_series(a, b), MismatchedRunsError);
}

TEST_CASE("t_f = 0 limit matches the ordered product of connection exponentials") {
    const FrameTable t = bump_table(-1.0, 2.0, 3.0, 201);
    Eigen::VectorXcd psi0(2);
    psi0 << std::sqrt(0.4), -std::sqrt(0.6);
    const Trajectory traj = propagate(t, 0.0, true, psi0);

    // ordered product over a fine grid: psi <- exp(+i G ds) psi with G = i S
    Eigen::VectorXcd psi = psi0;
    const int steps = 40000;
    const double ds = 1.0 / steps;
    for (int k = 0; k < steps; ++k) {
        const double s = (k + 0.5) * ds;
        const Eigen::MatrixXcd H = t.hamiltonian(s, 0.0, true);
        // exp(-i H ds) via the exact 2x2 Hermitian exponential
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
        Eigen::VectorXcd phase(2);
        for (int i = 0; i < 2; ++i) phase[i] = std::exp(-1i * es.eigenvalues()[i] * ds);
        psi = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint() * psi;
    }
    REQUIRE((traj.psi.back() - psi).norm() < 1e-6);
}

TEST_CASE("step failure surfaces as the named error") {
    const FrameTable t = bump_table(-1.0, 1.0, 1.0);
    Eigen::VectorXcd psi0(2);
    psi0 << 1.0, 0.0;
    OdeOptions o;
    o.max_steps = 3;
    REQUIRE_THROWS_AS(propagate(t, 100.0, true, psi0, o), StepFailureError);
}
