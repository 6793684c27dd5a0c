#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "fluxqa/circuit.hpp"
#include "fluxqa/mesh.hpp"
#include "fluxqa/spectral.hpp"

using namespace fluxqa;

namespace {

SparseOperator diagonal_operator(std::initializer_list<double> values) {
    const int n = static_cast<int>(values.size());
    Eigen::SparseMatrix<double> m(n, n);
    int i = 0;
    for (double v : values) m.insert(i, i) = v, ++i;
    return SparseOperator(std::move(m));
}

Schedule cshunt_schedule() {
    Schedule s;
    s.s_grid = uniform_grid(11);
    s.cjj_flux_endpoints = {2.9, 2.2};
    return s;
}

SparseOperator cshunt_operator(double s, int L) {
    const CircuitParams p = cshunt_preset();
    const Schedule sched = cshunt_schedule();
    Mesh mesh{-M_PI, M_PI, L};
    return assemble_1q(mesh, p.kinetic_coefficient(CircuitFamily::cshunt),
                       [&](double phi) { return cshunt_potential(phi, s, p, sched); });
}

}  // namespace

TEST_CASE("lowest_eigenpairs on a diagonal matrix") {
    const EigenPairs p = lowest_eigenpairs(diagonal_operator({3.0, 1.0, 2.0}), 2);
    REQUIRE(p.energies[0] == Catch::Approx(1.0));
    REQUIRE(p.energies[1] == Catch::Approx(2.0));
    REQUIRE(std::abs(p.vectors(1, 0)) == Catch::Approx(1.0));
    REQUIRE(std::abs(p.vectors(2, 1)) == Catch::Approx(1.0));
}

TEST_CASE("C-shunt gap at s=0.5, L=600 matches the dense oracle value") {
    const EigenPairs p = lowest_eigenpairs(cshunt_operator(0.5, 600), 2);
    REQUIRE(p.energies[1] - p.energies[0] == Catch::Approx(1.9963571479263749).epsilon(1e-9));
}

TEST_CASE("Lanczos and dense routes agree to 1e-10 relative") {
    const SparseOperator H = cshunt_operator(0.5, 80);
    EigenOptions lo;
    lo.method = EigenMethod::lanczos;
    EigenOptions de;
    de.method = EigenMethod::dense;
    const EigenPairs a = lowest_eigenpairs(H, 3, lo);
    const EigenPairs b = lowest_eigenpairs(H, 3, de);
    for (int i = 0; i < 3; ++i)
        REQUIRE(std::abs(a.energies[i] - b.energies[i]) <= 1e-10 * std::abs(b.energies[i]));
}

TEST_CASE("two-qubit CJJ operator at small L matches the frozen dense oracle") {
    const CircuitParams p = cjj_preset();
    Schedule sched;
    sched.s_grid = uniform_grid(11);
    sched.cjj_flux_endpoints = {2.6, 1.9};
    sched.bias_table = CubicSpline({0.0, 1.0}, {0.009, 0.009});
    const double w = 3.1753436062171065;  // sqrt(2 (40 E_C + 4 E_J) / E_L), as in the oracle
    Mesh mesh{-w, w, 40};
    const double s = 0.5;
    auto p1 = [&](double phi) { return cjj_potential(phi, s, -1.0, p, sched); };
    auto p2 = [&](double phi) { return cjj_potential(phi, s, -0.4, p, sched); };
    auto pint = [&](double a, double b) { return coupling_potential(a, b, s, 0.7, p, sched); };
    const SparseOperator H =
        assemble_2q(mesh, mesh, p.kinetic_coefficient(CircuitFamily::cjj), p1, p2, pint);

    const double expected[4] = {1181.5008423001352, 1186.7995615665168, 1187.8321690307027,
                                1192.8278776168104};
    EigenOptions de;
    de.method = EigenMethod::dense;
    const EigenPairs dense = lowest_eigenpairs(H, 4, de);
    for (int i = 0; i < 4; ++i)
        REQUIRE(dense.energies[i] == Catch::Approx(expected[i]).epsilon(1e-10));

    EigenOptions lo;
    lo.method = EigenMethod::lanczos;
    const EigenPairs lanczos = lowest_eigenpairs(H, 4, lo);
    for (int i = 0; i < 4; ++i)
        REQUIRE(std::abs(lanczos.energies[i] - dense.energies[i]) <=
                1e-10 * std::abs(dense.energies[i]));
}

TEST_CASE("eigenpairs satisfy the residual and orthonormality contracts") {
    const SparseOperator H = cshunt_operator(0.7, 301);
    EigenOptions lo;
    lo.method = EigenMethod::lanczos;
    const EigenPairs p = lowest_eigenpairs(H, 3, lo);
    const double norm = H.inf_norm();
    for (int i = 0; i < 3; ++i) {
        const double res = (H.matrix() * p.vectors.col(i) - p.energies[i] * p.vectors.col(i)).norm();
        REQUIRE(res <= 1e-9 * norm);
    }
    const Eigen::MatrixXd gram = p.vectors.transpose() * p.vectors;
    REQUIRE((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("degenerate tracked blocks are rejected") {
    REQUIRE_THROWS_AS(lowest_eigenpairs(diagonal_operator({1.0, 1.0 + 1e-12, 5.0}), 2),
                      DegenerateSubspaceError);
}

TEST_CASE("Lanczos reports NoConvergence when the budget is too small") {
    EigenOptions opt;
    opt.method = EigenMethod::lanczos;
    opt.max_iterations = 4;
    opt.tol = 1e-14;
    REQUIRE_THROWS_AS(lowest_eigenpairs(cshunt_operator(0.5, 400), 3, opt), NoConvergenceError);
}

TEST_CASE("fix_gauge is idempotent and undoes constructed sign flips") {
    auto make_slice = [](double s, const Eigen::MatrixXd& states) {
        SpectralSlice sl;
        sl.s = s;
        sl.energies = Eigen::Vector2d(0.0, 1.0);
        sl.states = states;
        return sl;
    };
    Eigen::MatrixXd base(3, 2);
    base << 0.8, 0.1, 0.5, -0.6, 0.2, 0.7;
    std::vector<SpectralSlice> slices{make_slice(0.0, base), make_slice(0.5, base),
                                      make_slice(1.0, base)};
    const auto fixed0 = fix_gauge(slices);
    for (std::size_t j = 0; j < 3; ++j)
        REQUIRE((fixed0[j].states - slices[j].states).cwiseAbs().maxCoeff() == 0.0);

    std::vector<SpectralSlice> flipped = slices;
    flipped[1].states.col(0) *= -1.0;
    const auto fixed1 = fix_gauge(flipped);
    REQUIRE((fixed1[1].states - slices[1].states).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fix_gauge flags ambiguous overlaps with the offending interval") {
    auto make_slice = [](double s, std::initializer_list<double> v) {
        SpectralSlice sl;
        sl.s = s;
        sl.energies = Eigen::VectorXd::Zero(1);
        sl.states = Eigen::MatrixXd(2, 1);
        int i = 0;
        for (double x : v) sl.states(i++, 0) = x;
        return sl;
    };
    std::vector<SpectralSlice> slices{make_slice(0.0, {1.0, 0.0}), make_slice(0.5, {0.0, 1.0}),
                                      make_slice(1.0, {0.0, 1.0})};
    try {
        fix_gauge(slices);
        FAIL("expected AmbiguousOverlapAt");
    } catch (const AmbiguousOverlapAt& e) {
        REQUIRE(e.where().interval == 0);
    }
}

TEST_CASE("spectral_sweep produces gauge-fixed slices over the grid") {
    const CircuitParams p = cshunt_preset();
    const Schedule sched = cshunt_schedule();
    Mesh mesh{-M_PI, M_PI, 151};
    SweepProblem prob;
    prob.hamiltonian = [&](double s) {
        return assemble_1q(mesh, p.kinetic_coefficient(CircuitFamily::cshunt),
                           [&](double phi) { return cshunt_potential(phi, s, p, sched); });
    };
    SweepOptions opt;
    opt.tracked = 2;
    opt.threads = 2;
    const auto slices = spectral_sweep(prob, sched.s_grid, opt);
    REQUIRE(slices.size() == sched.s_grid.size());
    for (std::size_t j = 0; j + 1 < slices.size(); ++j) {
        REQUIRE(slices[j].margin > 0.0);
        for (int a = 0; a < 2; ++a)
            REQUIRE(slices[j].states.col(a).dot(slices[j + 1].states.col(a)) > 0.0);
    }
}
