#pragma once

// Lowest-k eigenpairs of the discretized operators, per-s spectral slices,
// and the gauge pass that keeps the real eigenvectors continuous in s.
//
// Two solver routes share one contract: a dense full diagonalization (also
// the oracle in the test suite) and a shift-invert Lanczos iteration with
// full reorthogonalization.  The automatic policy uses dense below 2048
// rows and Lanczos above.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "fluxqa/errors.hpp"
#include "fluxqa/mesh.hpp"

namespace fluxqa {

enum class EigenMethod { automatic, dense, lanczos };

struct EigenOptions {
    EigenMethod method = EigenMethod::automatic;
    double tol = 1.0e-11;               // residual target, relative to ||H||_inf
    int max_iterations = 600;           // Lanczos basis cap
    double degeneracy_threshold = 1e-8; // GHz, within the requested block
    unsigned seed = 0x5eedu;            // start-vector seed (determinism)
};

struct EigenPairs {
    Eigen::VectorXd energies;  // ascending, k entries
    Eigen::MatrixXd vectors;   // dim x k, orthonormal, real
};

namespace detail {

inline void check_degeneracy(const Eigen::VectorXd& e, double threshold, const std::string& stage) {
    for (Eigen::Index a = 0; a + 1 < e.size(); ++a)
        if (e[a + 1] - e[a] < threshold)
            throw DegenerateSubspaceError(
                stage, "levels " + std::to_string(a) + "," + std::to_string(a + 1) +
                           " separated by " + std::to_string(e[a + 1] - e[a]) + " GHz");
}

inline EigenPairs dense_lowest(const SparseOperator& H, int k) {
    Eigen::MatrixXd dense = Eigen::MatrixXd(H.matrix());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    if (es.info() != Eigen::Success)
        throw NoConvergenceError("lowest_eigenpairs", "dense eigensolver failed");
    EigenPairs out;
    out.energies = es.eigenvalues().head(k);
    out.vectors = es.eigenvectors().leftCols(k);
    return out;
}

// Shift-invert Lanczos with full reorthogonalization.  The shift sits below
// the Gershgorin lower bound so H - sigma I is positive definite and the
// lowest eigenvalues of H become the dominant ones of (H - sigma I)^{-1}.
inline EigenPairs lanczos_lowest(const SparseOperator& H, int k, const EigenOptions& opt) {
    const Eigen::SparseMatrix<double>& A = H.matrix();
    const Eigen::Index n = A.rows();
    const double norm = H.inf_norm();

    double glb = std::numeric_limits<double>::max();
    {
        std::vector<double> diag(static_cast<std::size_t>(n), 0.0), offsum(static_cast<std::size_t>(n), 0.0);
        for (int c = 0; c < A.outerSize(); ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it) {
                if (it.row() == it.col())
                    diag[static_cast<std::size_t>(it.row())] = it.value();
                else
                    offsum[static_cast<std::size_t>(it.row())] += std::abs(it.value());
            }
        for (Eigen::Index i = 0; i < n; ++i)
            glb = std::min(glb, diag[static_cast<std::size_t>(i)] - offsum[static_cast<std::size_t>(i)]);
    }
    const double sigma = glb - 0.01 * std::max(1.0, std::abs(glb));

    Eigen::SparseMatrix<double> shifted = A;
    for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
    shifted.makeCompressed();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor;
    factor.compute(shifted);
    if (factor.info() != Eigen::Success)
        throw NoConvergenceError("lowest_eigenpairs", "shift-invert factorization failed");

    const int mmax = std::min<Eigen::Index>(opt.max_iterations, n);
    Eigen::MatrixXd V(n, mmax);
    std::vector<double> alpha, beta;

    std::mt19937 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
    v.normalize();
    V.col(0) = v;

    EigenPairs out;
    Eigen::VectorXd w(n);
    int m = 0;
    while (m < mmax) {
        w = factor.solve(V.col(m));
        if (m > 0) w -= beta[static_cast<std::size_t>(m - 1)] * V.col(m - 1);
        double a = V.col(m).dot(w);
        w -= a * V.col(m);
        // full reorthogonalization, two passes
        for (int pass = 0; pass < 2; ++pass) {
            Eigen::VectorXd proj = V.leftCols(m + 1).transpose() * w;
            w -= V.leftCols(m + 1) * proj;
            if (pass == 0) a += proj[m];
        }
        alpha.push_back(a);
        const double b = w.norm();
        ++m;

        const bool basis_full = (m == mmax) || (b < 1e-14);
        if (m >= std::max(2 * k + 2, 10) && (m % 10 == 0 || basis_full)) {
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                T(i, i) = alpha[static_cast<std::size_t>(i)];
                if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            // largest theta of the inverse operator -> smallest eigenvalue of H
            Eigen::MatrixXd y = V.leftCols(m) * es.eigenvectors().rightCols(k);
            Eigen::VectorXd lam(k);
            for (int i = 0; i < k; ++i) {
                const double theta = es.eigenvalues()[m - k + i];
                lam[i] = sigma + 1.0 / theta;
            }
            // ascending in H-energy = reverse of theta order
            Eigen::VectorXd lam_sorted(k);
            Eigen::MatrixXd y_sorted(n, k);
            for (int i = 0; i < k; ++i) {
                lam_sorted[i] = lam[k - 1 - i];
                y_sorted.col(i) = y.col(k - 1 - i);
            }
            double worst = 0.0;
            for (int i = 0; i < k; ++i) {
                const double res = (A * y_sorted.col(i) - lam_sorted[i] * y_sorted.col(i)).norm();
                worst = std::max(worst, res);
            }
            if (worst <= opt.tol * norm) {
                // clean up the small block: orthonormalize and re-Rayleigh
                Eigen::HouseholderQR<Eigen::MatrixXd> qr(y_sorted);
                Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
                out.vectors = Q;
                out.energies.resize(k);
                for (int i = 0; i < k; ++i) out.energies[i] = Q.col(i).dot(A * Q.col(i));
                // keep ascending order after the QR touch-up
                std::vector<int> order(static_cast<std::size_t>(k));
                for (int i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
                std::sort(order.begin(), order.end(), [&](int a_, int b_) {
                    return out.energies[a_] < out.energies[b_];
                });
                Eigen::VectorXd e2(k);
                Eigen::MatrixXd v2(n, k);
                for (int i = 0; i < k; ++i) {
                    e2[i] = out.energies[order[static_cast<std::size_t>(i)]];
                    v2.col(i) = out.vectors.col(order[static_cast<std::size_t>(i)]);
                }
                out.energies = e2;
                out.vectors = v2;
                return out;
            }
            if (basis_full) break;
        }
        if (b < 1e-14) break;
        beta.push_back(b);
        V.col(m) = w / b;
    }
    throw NoConvergenceError("lowest_eigenpairs",
                             "Lanczos did not reach tolerance in " + std::to_string(m) + " steps");
}

}  // namespace detail

inline EigenPairs lowest_eigenpairs(const SparseOperator& H, int k, const EigenOptions& opt = {}) {
    if (k <= 0 || k >= H.dimension())
        throw ValidationError("lowest_eigenpairs", "need 0 < k < dimension");
    EigenMethod method = opt.method;
    if (method == EigenMethod::automatic)
        method = H.dimension() <= 2048 ? EigenMethod::dense : EigenMethod::lanczos;
    EigenPairs out = method == EigenMethod::dense ? detail::dense_lowest(H, k)
                                                  : detail::lanczos_lowest(H, k, opt);
    detail::check_degeneracy(out.energies, opt.degeneracy_threshold, "lowest_eigenpairs");
    return out;
}

// ---------------------------------------------------------------------------
// Spectral slices and the gauge pass
// ---------------------------------------------------------------------------

struct SpectralSlice {
    double s = 0.0;
    Eigen::VectorXd energies;  // tracked levels, ascending (GHz)
    Eigen::MatrixXd states;    // mesh vectors, one column per tracked level
    double margin = 0.0;       // E_k(first excluded) - E_{k-1}, if computed
    std::map<std::string, double> aux;  // named expectation values
};

struct GaugeOptions {
    double overlap_threshold = 0.5;
};

// Sign-fix the anchor slice: each state's largest-magnitude component made
// positive (first occurrence wins ties).
inline void anchor_signs(Eigen::MatrixXd& states) {
    for (Eigen::Index c = 0; c < states.cols(); ++c) {
        Eigen::Index imax = 0;
        states.col(c).cwiseAbs().maxCoeff(&imax);
        if (states(imax, c) < 0) states.col(c) *= -1.0;
    }
}

// Forward gauge pass: flip signs so consecutive overlaps are positive.
// Throws AmbiguousOverlapAt when |overlap| drops below the threshold; sign
// flips applied before the failure are harmless on retry.
inline void fix_gauge_inplace(std::vector<SpectralSlice>& slices, const GaugeOptions& opt = {}) {
    if (slices.empty()) return;
    anchor_signs(slices.front().states);
    for (std::size_t j = 0; j + 1 < slices.size(); ++j) {
        auto& cur = slices[j].states;
        auto& nxt = slices[j + 1].states;
        for (Eigen::Index a = 0; a < cur.cols(); ++a) {
            const double ov = cur.col(a).dot(nxt.col(a));
            if (std::abs(ov) < opt.overlap_threshold)
                throw AmbiguousOverlapAt("fix_gauge",
                                         "overlap " + std::to_string(ov) + " for state " +
                                             std::to_string(a) + " between s=" +
                                             std::to_string(slices[j].s) + " and s=" +
                                             std::to_string(slices[j + 1].s),
                                         OverlapFailure{j, ov});
            if (ov < 0) nxt.col(a) *= -1.0;
        }
    }
}

inline std::vector<SpectralSlice> fix_gauge(std::vector<SpectralSlice> slices,
                                            const GaugeOptions& opt = {}) {
    fix_gauge_inplace(slices, opt);
    return slices;
}

// ---------------------------------------------------------------------------
// Sweep driver
// ---------------------------------------------------------------------------

// A sweep problem provides the operator (and optionally d H / d s) at any s.
struct SweepProblem {
    std::function<SparseOperator(double)> hamiltonian;
    std::function<Eigen::VectorXd(double)> dh_ds_diagonal;  // optional, for the HF oracle
    std::function<std::map<std::string, double>(double, const EigenPairs&)> aux;  // optional
};

struct SweepOptions {
    int tracked = 2;          // 2^n levels
    bool margin_level = true; // solve one extra level for the margin
    EigenOptions eig;
    GaugeOptions gauge;
    int max_bisections = 3;   // per offending interval, on AmbiguousOverlap
    int threads = 0;          // 0 = hardware concurrency
};

namespace detail {

inline SpectralSlice make_slice(const SweepProblem& prob, double s, const SweepOptions& opt) {
    const SparseOperator H = prob.hamiltonian(s);
    const int k = opt.tracked + (opt.margin_level ? 1 : 0);
    EigenOptions eo = opt.eig;
    EigenPairs pairs;
    try {
        pairs = lowest_eigenpairs(H, k, eo);
    } catch (const Error& e) {
        throw Error(e.stage(), "at s=" + std::to_string(s) + ": " + e.what());
    }
    SpectralSlice slice;
    slice.s = s;
    slice.energies = pairs.energies.head(opt.tracked);
    slice.states = pairs.vectors.leftCols(opt.tracked);
    slice.margin = opt.margin_level
                       ? pairs.energies[opt.tracked] - pairs.energies[opt.tracked - 1]
                       : 0.0;
    if (prob.aux) {
        EigenPairs tracked{slice.energies, slice.states};
        slice.aux = prob.aux(s, tracked);
    }
    return slice;
}

inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    unsigned hw = std::thread::hardware_concurrency();
    unsigned nt = threads > 0 ? static_cast<unsigned>(threads) : (hw ? hw : 1u);
    nt = std::min<unsigned>(nt, static_cast<unsigned>(count));
    if (nt <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(nt);
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

// One gauge-fixed slice per grid point.  If the gauge pass cannot track a
// state across an interval, that interval is bisected (new slices solved at
// the midpoints) up to max_bisections times before giving up.
inline std::vector<SpectralSlice> spectral_sweep(const SweepProblem& prob,
                                                 const std::vector<double>& s_grid,
                                                 const SweepOptions& opt) {
    std::vector<SpectralSlice> slices(s_grid.size());
    detail::parallel_for(s_grid.size(), opt.threads,
                         [&](std::size_t j) { slices[j] = detail::make_slice(prob, s_grid[j], opt); });

    for (int round = 0;; ++round) {
        try {
            fix_gauge_inplace(slices, opt.gauge);
            return slices;
        } catch (const AmbiguousOverlapAt& e) {
            if (round >= opt.max_bisections) throw;
            const std::size_t j = e.where().interval;
            const double mid = 0.5 * (slices[j].s + slices[j + 1].s);
            SpectralSlice extra = detail::make_slice(prob, mid, opt);
            slices.insert(slices.begin() + static_cast<std::ptrdiff_t>(j) + 1, std::move(extra));
        }
    }
}

}  // namespace fluxqa
