#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fluxqa/spline.hpp"

using namespace fluxqa;

TEST_CASE("spline reproduces knot values exactly") {
    std::vector<double> x{0.0, 0.3, 0.7, 1.0};
    std::vector<double> y{1.0, -2.0, 0.5, 3.0};
    CubicSpline sp(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(sp(x[i]) == Catch::Approx(y[i]).margin(1e-14));
}

TEST_CASE("spline is exact on linear data") {
    std::vector<double> x{0.0, 0.25, 0.6, 1.0};
    std::vector<double> y;
    for (double v : x) y.push_back(2.5 * v - 1.0);
    CubicSpline sp(x, y);
    REQUIRE(sp(0.41) == Catch::Approx(2.5 * 0.41 - 1.0).margin(1e-13));
    REQUIRE(sp.derivative(0.83) == Catch::Approx(2.5).margin(1e-12));
}

TEST_CASE("spline converges rapidly on smooth data") {
    auto build = [](std::size_t n) {
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = static_cast<double>(i) / (n - 1);
            y[i] = std::sin(3.0 * x[i]);
        }
        return CubicSpline(x, y);
    };
    auto max_err = [](const CubicSpline& sp) {
        double m = 0.0;
        for (int i = 0; i <= 1000; ++i) {
            const double x = 0.1 + 0.8 * i / 1000.0;  // interior (natural BCs degrade the ends)
            m = std::max(m, std::abs(sp(x) - std::sin(3.0 * x)));
        }
        return m;
    };
    const double e1 = max_err(build(41));
    const double e2 = max_err(build(81));
    REQUIRE(e2 < e1);
    REQUIRE(e1 / e2 > 8.0);  // ~16x in the interior
}

TEST_CASE("spline derivative tracks the analytic slope") {
    const std::size_t n = 201;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<double>(i) / (n - 1);
        y[i] = std::exp(-2.0 * x[i]);
    }
    CubicSpline sp(x, y);
    for (double v : {0.2, 0.5, 0.8})
        REQUIRE(sp.derivative(v) == Catch::Approx(-2.0 * std::exp(-2.0 * v)).epsilon(1e-5));
}

TEST_CASE("spline handles non-uniform knots") {
    std::vector<double> x{0.0, 0.05, 0.5, 0.55, 1.0};
    std::vector<double> y;
    for (double v : x) y.push_back(v * v);
    CubicSpline sp(x, y);
    REQUIRE(sp(0.52) == Catch::Approx(0.52 * 0.52).margin(5e-3));
}

TEST_CASE("spline validates input") {
    REQUIRE_THROWS_AS(CubicSpline({0.0}, {1.0}), ValidationError);
    REQUIRE_THROWS_AS(CubicSpline({0.0, 0.0, 1.0}, {1.0, 2.0, 3.0}), ValidationError);
    REQUIRE_THROWS_AS(CubicSpline({0.0, 1.0}, {1.0, 2.0, 3.0}), ValidationError);
}
