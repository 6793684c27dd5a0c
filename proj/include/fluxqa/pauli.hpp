#pragma once

// Pauli-string decomposition of Hermitian matrices on n qubits.
// String order: character i acts on qubit i, qubit 0 on the slowest
// (most significant) tensor factor, e.g. "XY" = sigma^x (x) sigma^y.

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "fluxqa/errors.hpp"

namespace fluxqa {

inline const Eigen::Matrix2cd& pauli_matrix(char c) {
    using namespace std::complex_literals;
    static const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
    static const Eigen::Matrix2cd X = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
    static const Eigen::Matrix2cd Y = (Eigen::Matrix2cd() << 0, -1i, 1i, 0).finished();
    static const Eigen::Matrix2cd Z = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
    switch (c) {
        case 'I': return I;
        case 'X': return X;
        case 'Y': return Y;
        case 'Z': return Z;
        default: throw ValidationError("pauli", std::string("unknown Pauli label '") + c + "'");
    }
}

inline Eigen::MatrixXcd pauli_string_matrix(const std::string& label) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    for (char c : label) {
        const Eigen::Matrix2cd& p = pauli_matrix(c);
        Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
        for (Eigen::Index r = 0; r < out.rows(); ++r)
            for (Eigen::Index cc = 0; cc < out.cols(); ++cc)
                next.block(2 * r, 2 * cc, 2, 2) = out(r, cc) * p;
        out.swap(next);
    }
    return out;
}

inline std::vector<std::string> pauli_labels(int n_qubits) {
    std::vector<std::string> labels{""};
    for (int q = 0; q < n_qubits; ++q) {
        std::vector<std::string> next;
        next.reserve(labels.size() * 4);
        for (const auto& l : labels)
            for (char c : {'I', 'X', 'Y', 'Z'}) next.push_back(l + c);
        labels.swap(next);
    }
    return labels;
}

struct PauliDecomposition {
    std::map<std::string, double> coefficients;

    double coefficient(const std::string& label) const {
        auto it = coefficients.find(label);
        return it == coefficients.end() ? 0.0 : it->second;
    }

    Eigen::MatrixXcd reconstruct() const {
        Eigen::MatrixXcd out;
        for (const auto& [label, c] : coefficients) {
            Eigen::MatrixXcd P = pauli_string_matrix(label);
            if (out.size() == 0) out = Eigen::MatrixXcd::Zero(P.rows(), P.cols());
            out += c * P;
        }
        return out;
    }

    // Largest |coefficient| over strings with an even/odd number of Y factors.
    double max_even_y() const { return max_by_parity(0); }
    double max_odd_y() const { return max_by_parity(1); }

private:
    double max_by_parity(int parity) const {
        double m = 0.0;
        for (const auto& [label, c] : coefficients) {
            int ny = 0;
            for (char ch : label) ny += (ch == 'Y');
            if (ny % 2 == parity) m = std::max(m, std::abs(c));
        }
        return m;
    }
};

// c_P = Tr(P M) / N over all 4^n strings.  For Hermitian M every c_P is real;
// the imaginary residue is tracked and must be round-off sized.
inline PauliDecomposition pauli_decompose(const Eigen::MatrixXcd& M) {
    const Eigen::Index N = M.rows();
    if (M.cols() != N) throw BadDimensionError("pauli_decompose", "matrix not square");
    int n = 0;
    while ((Eigen::Index(1) << n) < N) ++n;
    if ((Eigen::Index(1) << n) != N)
        throw BadDimensionError("pauli_decompose", "dimension is not a power of two");

    PauliDecomposition out;
    for (const auto& label : pauli_labels(n)) {
        const std::complex<double> tr = (pauli_string_matrix(label) * M).trace();
        out.coefficients[label] = tr.real() / static_cast<double>(N);
    }
    return out;
}

}  // namespace fluxqa
