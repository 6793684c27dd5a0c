#pragma once

// Real-space discretization: uniform flux meshes and sparse second-order
// finite-difference Hamiltonians for one and two flux variables.  Dirichlet
// boundaries (the wavefunction is pinned to zero outside the domain, as the
// truncated tridiagonal stencil implies).

#include <Eigen/Sparse>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "fluxqa/errors.hpp"

namespace fluxqa {

struct Mesh {
    double lower = 0.0;
    double upper = 0.0;
    int points = 0;  // L

    double spacing() const { return (upper - lower) / (points - 1); }
    double node(int i) const { return lower + i * spacing(); }

    std::vector<double> nodes() const {
        std::vector<double> v(points);
        for (int i = 0; i < points; ++i) v[i] = node(i);
        return v;
    }

    void validate(const std::string& stage) const {
        if (!(lower < upper)) throw ValidationError(stage, "mesh needs lower < upper");
        if (points < 3) throw ValidationError(stage, "mesh needs at least 3 points");
    }
};

class SparseOperator {
public:
    SparseOperator() = default;
    explicit SparseOperator(Eigen::SparseMatrix<double> m) : mat_(std::move(m)) {
        mat_.makeCompressed();
    }

    Eigen::Index dimension() const { return mat_.rows(); }
    const Eigen::SparseMatrix<double>& matrix() const { return mat_; }

    // Row-wise infinity norm, used to scale eigen residual tolerances.
    double inf_norm() const {
        std::vector<double> row(static_cast<std::size_t>(mat_.rows()), 0.0);
        for (int kk = 0; kk < mat_.outerSize(); ++kk)
            for (Eigen::SparseMatrix<double>::InnerIterator it(mat_, kk); it; ++it)
                row[static_cast<std::size_t>(it.row())] += std::abs(it.value());
        double m = 0.0;
        for (double r : row) m = std::max(m, r);
        return m;
    }

    // Largest |A - A^T| entry; exactly zero for operators assembled here.
    double symmetry_defect() const {
        Eigen::SparseMatrix<double> d = Eigen::SparseMatrix<double>(mat_.transpose()) - mat_;
        double m = 0.0;
        for (int kk = 0; kk < d.outerSize(); ++kk)
            for (Eigen::SparseMatrix<double>::InnerIterator it(d, kk); it; ++it)
                m = std::max(m, std::abs(it.value()));
        return m;
    }

    // Text triplet dump "row col value", one entry per line.
    void dump_triplets(std::ostream& os) const {
        os.precision(17);
        for (int kk = 0; kk < mat_.outerSize(); ++kk)
            for (Eigen::SparseMatrix<double>::InnerIterator it(mat_, kk); it; ++it)
                os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }

private:
    Eigen::SparseMatrix<double> mat_;
};

namespace detail {
inline void check_finite(double v, const std::string& stage) {
    if (!std::isfinite(v)) throw NonFiniteValueError(stage, "potential evaluated to a non-finite value");
}
}  // namespace detail

// H = -c d^2/dphi^2 + P(phi) on the mesh:  tridiagonal (-2, 1, 1) stencil
// scaled by -c (L-1)^2 / (upper-lower)^2 plus the diagonal potential.
inline SparseOperator assemble_1q(const Mesh& mesh, double kinetic_coeff,
                                  const std::function<double(double)>& potential) {
    mesh.validate("assemble_1q");
    const int L = mesh.points;
    const double h = mesh.spacing();
    const double kin = kinetic_coeff / (h * h);

    Eigen::SparseMatrix<double> m(L, L);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(3 * L));
    for (int i = 0; i < L; ++i) {
        const double p = potential(mesh.node(i));
        detail::check_finite(p, "assemble_1q");
        trip.emplace_back(i, i, 2.0 * kin + p);
        if (i + 1 < L) {
            trip.emplace_back(i, i + 1, -kin);
            trip.emplace_back(i + 1, i, -kin);
        }
    }
    m.setFromTriplets(trip.begin(), trip.end());
    return SparseOperator(std::move(m));
}

// Two-variable operator (H1 (x) 1) + (1 (x) H1) + diag(P_int); at most five
// nonzeros per row.  Index layout: idx = i1 * L2 + i2 (first flux on the
// slow axis).
inline SparseOperator assemble_2q(const Mesh& mesh1, const Mesh& mesh2, double kinetic_coeff,
                                  const std::function<double(double)>& pot1,
                                  const std::function<double(double)>& pot2,
                                  const std::function<double(double, double)>& pot_int,
                                  std::int64_t dimension_cap = 1'000'000) {
    mesh1.validate("assemble_2q");
    mesh2.validate("assemble_2q");
    const std::int64_t L1 = mesh1.points, L2 = mesh2.points;
    if (L1 * L2 > dimension_cap)
        throw DimensionOverflowError("assemble_2q", "mesh product " + std::to_string(L1 * L2) +
                                                        " exceeds cap " + std::to_string(dimension_cap));
    const double kin1 = kinetic_coeff / (mesh1.spacing() * mesh1.spacing());
    const double kin2 = kinetic_coeff / (mesh2.spacing() * mesh2.spacing());
    const int n = static_cast<int>(L1 * L2);

    std::vector<double> p1(static_cast<std::size_t>(L1)), p2(static_cast<std::size_t>(L2));
    for (int i = 0; i < L1; ++i) {
        p1[static_cast<std::size_t>(i)] = pot1(mesh1.node(i));
        detail::check_finite(p1[static_cast<std::size_t>(i)], "assemble_2q");
    }
    for (int i = 0; i < L2; ++i) {
        p2[static_cast<std::size_t>(i)] = pot2(mesh2.node(i));
        detail::check_finite(p2[static_cast<std::size_t>(i)], "assemble_2q");
    }

    Eigen::SparseMatrix<double> m(n, n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(5 * n));
    for (int i1 = 0; i1 < L1; ++i1) {
        for (int i2 = 0; i2 < L2; ++i2) {
            const int idx = i1 * static_cast<int>(L2) + i2;
            const double pint = pot_int(mesh1.node(i1), mesh2.node(i2));
            detail::check_finite(pint, "assemble_2q");
            trip.emplace_back(idx, idx, 2.0 * kin1 + 2.0 * kin2 +
                                            p1[static_cast<std::size_t>(i1)] +
                                            p2[static_cast<std::size_t>(i2)] + pint);
            if (i2 + 1 < L2) {
                trip.emplace_back(idx, idx + 1, -kin2);
                trip.emplace_back(idx + 1, idx, -kin2);
            }
            if (i1 + 1 < L1) {
                trip.emplace_back(idx, idx + static_cast<int>(L2), -kin1);
                trip.emplace_back(idx + static_cast<int>(L2), idx, -kin1);
            }
        }
    }
    m.setFromTriplets(trip.begin(), trip.end());
    return SparseOperator(std::move(m));
}

}  // namespace fluxqa
