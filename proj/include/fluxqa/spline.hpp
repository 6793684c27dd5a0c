#pragma once

// Natural cubic spline on an arbitrary strictly increasing knot grid.
// Used for all tabulated schedule functions: interpolation of profile
// functions, control fluxes, matrix entries of the effective Hamiltonians,
// and their first derivatives.

#include <cstddef>
#include <vector>

#include "fluxqa/errors.hpp"

namespace fluxqa {

class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw ValidationError("spline", "need at least two knots and matching value count");
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!(x_[i] < x_[i + 1]))
                throw ValidationError("spline", "knots must be strictly increasing");
        m_.assign(n, 0.0);
        if (n == 2) return;  // degenerates to the linear interpolant

        // Solve the tridiagonal system for second derivatives, natural BCs m_0 = m_{n-1} = 0.
        std::vector<double> diag(n, 0.0), rhs(n, 0.0), cprime(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = x_[i] - x_[i - 1];
            const double hr = x_[i + 1] - x_[i];
            diag[i] = 2.0 * (hl + hr);
            rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = x_[i] - x_[i - 1];
            double denom = diag[i];
            if (i > 1) denom -= hl * cprime[i - 1];
            cprime[i] = (x_[i + 1] - x_[i]) / denom;
            double r = rhs[i];
            if (i > 1) r -= hl * m_[i - 1];
            m_[i] = r / denom;
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] -= cprime[i] * m_[i + 1];
            if (i == 1) break;
        }
    }

    double operator()(double x) const { return eval(x).value; }
    double derivative(double x) const { return eval(x).slope; }

    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }

private:
    struct Eval {
        double value;
        double slope;
    };

    Eval eval(double x) const {
        std::size_t i = locate(x);
        const double h = x_[i + 1] - x_[i];
        const double a = (x_[i + 1] - x) / h;
        const double b = (x - x_[i]) / h;
        Eval e;
        e.value = a * y_[i] + b * y_[i + 1] +
                  ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
        e.slope = (y_[i + 1] - y_[i]) / h +
                  ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]) * h / 6.0;
        return e;
    }

    // Interval index by binary search; queries outside the grid clamp to the
    // first/last interval (linear-in-h extrapolation of the end cubics).
    std::size_t locate(double x) const {
        const std::size_t n = x_.size();
        if (x <= x_[1]) return 0;
        if (x >= x_[n - 2]) return n - 2;
        std::size_t lo = 1, hi = n - 2;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (x_[mid] <= x ? lo : hi) = mid;
        }
        return lo;
    }

    std::vector<double> x_, y_;
    std::vector<double> m_;  // second derivatives at knots
};

}  // namespace fluxqa
