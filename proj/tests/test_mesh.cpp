#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "fluxqa/mesh.hpp"
#include "fluxqa/spectral.hpp"

using namespace fluxqa;

TEST_CASE("assemble_1q matches the tridiagonal stencil on L=3") {
    // domain width 2, kinetic coefficient 1: kin = 1/h^2 = 1
    Mesh mesh{-1.0, 1.0, 3};
    const SparseOperator op = assemble_1q(mesh, 1.0, [](double) { return 0.0; });
    Eigen::MatrixXd expect(3, 3);
    expect << 2, -1, 0, -1, 2, -1, 0, -1, 2;
    REQUIRE((Eigen::MatrixXd(op.matrix()) - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant potential shifts the spectrum exactly") {
    Mesh mesh{-2.0, 2.0, 40};
    auto pot = [](double phi) { return phi * phi; };
    auto pot_shift = [&](double phi) { return pot(phi) + 7.5; };
    const EigenPairs a = lowest_eigenpairs(assemble_1q(mesh, 1.0, pot), 3);
    const EigenPairs b = lowest_eigenpairs(assemble_1q(mesh, 1.0, pot_shift), 3);
    for (int i = 0; i < 3; ++i)
        REQUIRE(b.energies[i] - a.energies[i] == Catch::Approx(7.5).margin(1e-10));
}

TEST_CASE("harmonic oscillator gap matches sqrt(2 c k) within 0.1%") {
    // H = -c d^2 + (1/2) k phi^2 with c = 1, k = 4: level spacing sqrt(8)
    Mesh mesh{-10.0, 10.0, 2000};
    const SparseOperator op = assemble_1q(mesh, 1.0, [](double phi) { return 2.0 * phi * phi; });
    const EigenPairs p = lowest_eigenpairs(op, 2, {EigenMethod::lanczos});
    REQUIRE(p.energies[1] - p.energies[0] ==
            Catch::Approx(2.8284271247461903).epsilon(1e-3));
}

TEST_CASE("mesh refinement converges at second order") {
    auto gap = [](int L) {
        Mesh mesh{-8.0, 8.0, L};
        const SparseOperator op =
            assemble_1q(mesh, 1.0, [](double phi) { return 2.0 * phi * phi; });
        const EigenPairs p = lowest_eigenpairs(op, 2);
        return p.energies[1] - p.energies[0];
    };
    const double ref = gap(1600);
    const double e1 = std::abs(gap(200) - ref);
    const double e2 = std::abs(gap(400) - ref);
    REQUIRE(e1 / e2 > 3.0);
    REQUIRE(e1 / e2 < 5.5);
}

TEST_CASE("two-variable operator: tensor-sum spectrum when P_int = 0") {
    Mesh mesh{-3.0, 3.0, 12};
    auto pa = [](double phi) { return phi * phi; };
    auto pb = [](double phi) { return 2.0 * phi * phi + phi; };
    const SparseOperator h2 =
        assemble_2q(mesh, mesh, 1.0, pa, pb, [](double, double) { return 0.0; });
    const SparseOperator ha = assemble_1q(mesh, 1.0, pa);
    const SparseOperator hb = assemble_1q(mesh, 1.0, pb);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(Eigen::MatrixXd(ha.matrix()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(Eigen::MatrixXd(hb.matrix()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e2(Eigen::MatrixXd(h2.matrix()));
    std::vector<double> sums;
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) sums.push_back(ea.eigenvalues()[i] + eb.eigenvalues()[j]);
    std::sort(sums.begin(), sums.end());
    for (int i = 0; i < 10; ++i)
        REQUIRE(e2.eigenvalues()[i] == Catch::Approx(sums[static_cast<std::size_t>(i)]).margin(1e-9));
}

TEST_CASE("two-variable operator: exchange symmetry and structure") {
    Mesh mesh{-2.0, 2.0, 10};
    auto pa = [](double phi) { return phi * phi + 0.3 * phi; };
    auto pb = [](double phi) { return 0.7 * phi * phi; };
    auto pint = [](double a, double b) { return 0.1 * a * b; };
    auto pint_swapped = [&](double a, double b) { return pint(b, a); };
    const SparseOperator hab = assemble_2q(mesh, mesh, 1.0, pa, pb, pint);
    const SparseOperator hba = assemble_2q(mesh, mesh, 1.0, pb, pa, pint_swapped);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(Eigen::MatrixXd(hab.matrix()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(Eigen::MatrixXd(hba.matrix()));
    REQUIRE((ea.eigenvalues() - eb.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);

    REQUIRE(hab.symmetry_defect() == 0.0);
    // at most five nonzeros per row
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(hab.dimension());
    const auto& m = hab.matrix();
    for (int k = 0; k < m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
            counts[it.row()] += 1;
    REQUIRE(counts.maxCoeff() <= 5);
}

TEST_CASE("non-finite potentials and oversized meshes are rejected") {
    Mesh mesh{-1.0, 1.0, 8};
    REQUIRE_THROWS_AS(
        assemble_1q(mesh, 1.0, [](double) { return std::numeric_limits<double>::infinity(); }),
        NonFiniteValueError);
    REQUIRE_THROWS_AS(assemble_2q(mesh, mesh, 1.0, [](double) { return 0.0; },
                                  [](double) { return 0.0; },
                                  [](double, double) { return std::nan(""); }),
                      NonFiniteValueError);
    REQUIRE_THROWS_AS(assemble_2q(mesh, mesh, 1.0, [](double) { return 0.0; },
                                  [](double) { return 0.0; },
                                  [](double, double) { return 0.0; }, 63),
                      DimensionOverflowError);
}

TEST_CASE("triplet dump is parseable and complete") {
    Mesh mesh{-1.0, 1.0, 5};
    const SparseOperator op = assemble_1q(mesh, 1.0, [](double phi) { return phi; });
    std::ostringstream os;
    op.dump_triplets(os);
    std::istringstream is(os.str());
    int row, col, count = 0;
    double value;
    double diag_sum = 0.0;
    while (is >> row >> col >> value) {
        ++count;
        if (row == col) diag_sum += value;
    }
    REQUIRE(count == 3 * 5 - 2);
    // trace = sum of (2 kin + phi_i); kin = 1/0.25, nodes symmetric so potential sums to zero
    REQUIRE(diag_sum == Catch::Approx(5 * 2.0 / 0.25).margin(1e-12));
}
