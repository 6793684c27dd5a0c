#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "fluxqa/pauli.hpp"

using namespace fluxqa;

TEST_CASE("pauli string matrices") {
    const Eigen::MatrixXcd xy = pauli_string_matrix("XY");
    Eigen::MatrixXcd expect(4, 4);
    using namespace std::complex_literals;
    expect << 0, 0, 0, -1i, 0, 0, 1i, 0, 0, -1i, 0, 0, 1i, 0, 0, 0;
    REQUIRE((xy - expect).cwiseAbs().maxCoeff() < 1e-15);
    REQUIRE(pauli_labels(2).size() == 16);
    REQUIRE(pauli_labels(1).size() == 4);
}

TEST_CASE("decomposition of sigma_y (x) identity") {
    const auto dec = pauli_decompose(pauli_string_matrix("YI"));
    REQUIRE(dec.coefficient("YI") == Catch::Approx(1.0).margin(1e-14));
    for (const auto& [label, c] : dec.coefficients)
        if (label != "YI") REQUIRE(std::abs(c) < 1e-14);
}

TEST_CASE("random Hermitian matrices reconstruct exactly") {
    std::mt19937 rng(99);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd M(4, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) M(r, c) = std::complex<double>(gauss(rng), gauss(rng));
    M = Eigen::MatrixXcd(0.5 * (M + M.adjoint()));
    const auto dec = pauli_decompose(M);
    REQUIRE((dec.reconstruct() - M).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("purely imaginary Hermitian matrices decompose onto odd-Y strings only") {
    std::mt19937 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(4, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = r + 1; c < 4; ++c) {
            S(r, c) = gauss(rng);
            S(c, r) = -S(r, c);
        }
    const Eigen::MatrixXcd G = std::complex<double>(0, 1) * S.cast<std::complex<double>>();
    const auto dec = pauli_decompose(G);
    REQUIRE(dec.max_odd_y() > 0.1);
    REQUIRE(dec.max_even_y() <= 1e-14 * dec.max_odd_y() + 1e-14);
}

TEST_CASE("bad dimensions are rejected") {
    REQUIRE_THROWS_AS(pauli_decompose(Eigen::MatrixXcd::Zero(3, 3)), BadDimensionError);
    REQUIRE_THROWS_AS(pauli_decompose(Eigen::MatrixXcd::Zero(4, 2)), BadDimensionError);
}
