#pragma once

// The rotating low-energy frame: geometric connection G(s) from the
// gauge-fixed eigenvector grid, the Hellmann-Feynman oracle for its
// off-diagonals, and the dimensionless effective Hamiltonian
//   H_eff(s) = t_f kappa_dot(s) H_tilde(s) - G(s).
//
// In the real gauge G is purely imaginary: G = i S with S real and
// antisymmetric.  All connection algebra in this library is carried out on
// S; the complex Hermitian form is materialized only at the boundaries
// (effective Hamiltonians, Pauli decompositions).

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "fluxqa/circuit.hpp"
#include "fluxqa/errors.hpp"
#include "fluxqa/mesh.hpp"
#include "fluxqa/spectral.hpp"

namespace fluxqa {

// Three-point Lagrange derivative weights at x_eval for nodes {xa, xb, xc}.
inline std::array<double, 3> three_point_weights(double x_eval, double xa, double xb, double xc) {
    auto w = [&](double xi, double xj, double xk) {
        return ((x_eval - xj) + (x_eval - xk)) / ((xi - xj) * (xi - xk));
    };
    return {w(xa, xb, xc), w(xb, xa, xc), w(xc, xa, xb)};
}

struct EffectiveFrame {
    double s = 0.0;
    Eigen::VectorXd h_tilde;    // tracked energies, ascending (GHz)
    Eigen::MatrixXd connection; // S with G = i S, real antisymmetric, per unit s
    double kappa_dot = 1.0;

    Eigen::MatrixXcd geometric_matrix() const {
        return std::complex<double>(0.0, 1.0) * connection.cast<std::complex<double>>();
    }
};

// S(s_j) from finite differences of the gauge-fixed states: central weights
// on the (possibly non-uniform) s-grid, one-sided three-point stencils at
// the endpoints, then antisymmetric projection.
inline Eigen::MatrixXd geometric_term(const std::vector<SpectralSlice>& slices, std::size_t j) {
    const std::size_t m = slices.size();
    if (m < 3) throw ValidationError("geometric_term", "need at least 3 slices");
    if (j >= m) throw ValidationError("geometric_term", "slice index out of range");

    std::array<std::size_t, 3> idx;
    if (j == 0)
        idx = {0, 1, 2};
    else if (j == m - 1)
        idx = {m - 3, m - 2, m - 1};
    else
        idx = {j - 1, j, j + 1};
    const auto w = three_point_weights(slices[j].s, slices[idx[0]].s, slices[idx[1]].s, slices[idx[2]].s);

    const Eigen::MatrixXd& U = slices[j].states;
    Eigen::MatrixXd deriv = w[0] * slices[idx[0]].states + w[1] * slices[idx[1]].states +
                            w[2] * slices[idx[2]].states;
    Eigen::MatrixXd S = U.transpose() * deriv;
    return 0.5 * (S - S.transpose());
}

// Independent oracle for the off-diagonals: S_ab = <a| dH/ds |b> / (E_b - E_a).
// dH/ds is diagonal in the mesh representation (the kinetic part is
// s-independent), passed as its diagonal.
inline Eigen::MatrixXd hellmann_feynman_G(const SpectralSlice& slice,
                                          const Eigen::VectorXd& dh_ds_diagonal,
                                          double degeneracy_threshold = 1e-8) {
    const Eigen::Index k = slice.energies.size();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = a + 1; b < k; ++b) {
            const double de = slice.energies[b] - slice.energies[a];
            if (std::abs(de) < degeneracy_threshold)
                throw DegenerateSubspaceError("hellmann_feynman_G",
                                              "levels separated by " + std::to_string(de) + " GHz");
            const double elem =
                slice.states.col(a).dot(dh_ds_diagonal.cwiseProduct(slice.states.col(b)));
            S(a, b) = elem / de;
            S(b, a) = -S(a, b);
        }
    }
    return S;
}

// Sparse-operator overload for generic dH/ds.
inline Eigen::MatrixXd hellmann_feynman_G(const SpectralSlice& slice, const SparseOperator& dh_ds,
                                          double degeneracy_threshold = 1e-8) {
    const Eigen::Index k = slice.energies.size();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd applied = dh_ds.matrix() * slice.states;
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = a + 1; b < k; ++b) {
            const double de = slice.energies[b] - slice.energies[a];
            if (std::abs(de) < degeneracy_threshold)
                throw DegenerateSubspaceError("hellmann_feynman_G",
                                              "levels separated by " + std::to_string(de) + " GHz");
            S(a, b) = slice.states.col(a).dot(applied.col(b)) / de;
            S(b, a) = -S(a, b);
        }
    }
    return S;
}

inline std::vector<EffectiveFrame> build_frames(const std::vector<SpectralSlice>& slices,
                                                const Kappa& kappa) {
    std::vector<EffectiveFrame> frames(slices.size());
    for (std::size_t j = 0; j < slices.size(); ++j) {
        frames[j].s = slices[j].s;
        frames[j].h_tilde = slices[j].energies;
        frames[j].connection = geometric_term(slices, j);
        frames[j].kappa_dot = kappa.dot(slices[j].s);
    }
    return frames;
}

// H_eff(s) = t_f kappa_dot H_tilde - G; with include_G = false the diagonal
// dynamical part alone (the no-G counterfactual).
inline Eigen::MatrixXcd effective_hamiltonian(const EffectiveFrame& frame, double t_f,
                                              bool include_G) {
    const Eigen::Index n = frame.h_tilde.size();
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) H(a, a) = t_f * frame.kappa_dot * frame.h_tilde[a];
    if (include_G) H -= frame.geometric_matrix();
    return H;
}

// Max over the grid of ||S_a(s) - S_b(s)||_F between two frame sets computed
// under different reparametrizations.  G depends on s only, so this measures
// exactly the architecture's reparametrization invariance.
inline double reparametrization_check(const std::vector<EffectiveFrame>& a,
                                      const std::vector<EffectiveFrame>& b) {
    if (a.size() != b.size())
        throw MismatchedRunsError("reparametrization_check", "frame grids differ in size");
    double worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        worst = std::max(worst, (a[j].connection - b[j].connection).norm());
    return worst;
}

}  // namespace fluxqa
