#pragma once

// Collective spin operators on the symmetric (Dicke) sector of N spin-1/2
// particles, the ancilla qubit algebra, and probe (x) qubit embedding.

#include <cmath>
#include <stdexcept>

#include "metrology/types.hpp"

namespace metrology {

// Symmetric sector of N spins: total spin j = N/2, dimension N+1.
// Basis ordering is m = j, j-1, ..., -j; 2j is kept as an integer so
// half-integer bookkeeping stays exact.
struct DickeSpace {
    int two_j;

    explicit DickeSpace(int n) : two_j(n) {
        if (n < 1) throw std::invalid_argument("DickeSpace: N must be >= 1");
    }

    int n_spins() const { return two_j; }
    int dim() const { return two_j + 1; }
    double j() const { return 0.5 * two_j; }
    // m value of basis index i (i = 0 is the m = +j state)
    double m_at(int i) const { return 0.5 * (two_j - 2 * i); }
    // basis index of m given as 2m
    int index_of(int two_m) const {
        if ((two_j - two_m) % 2 != 0 || two_m > two_j || two_m < -two_j)
            throw std::domain_error("DickeSpace: m outside [-j, j]");
        return (two_j - two_m) / 2;
    }
};

struct SpinOperators {
    Matrix jx, jy, jz, jplus, jminus;
};

inline SpinOperators build_collective_operators(const DickeSpace& space) {
    const int d = space.dim();
    const double j = space.j();
    SpinOperators ops;
    ops.jz = Matrix::Zero(d, d);
    ops.jplus = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const double m = space.m_at(i);
        ops.jz(i, i) = m;
        if (i > 0) // J+ |j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>
            ops.jplus(i - 1, i) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    ops.jminus = ops.jplus.adjoint();
    ops.jx = 0.5 * (ops.jplus + ops.jminus);
    ops.jy = (ops.jplus - ops.jminus) / (2.0 * iu);
    return ops;
}

// exp(-i theta (cos(alpha) Jx + sin(alpha) Jy)) via eigendecomposition of the
// Hermitian generator.
inline Matrix rotation(const SpinOperators& ops, double alpha, double theta) {
    if (!std::isfinite(alpha) || !std::isfinite(theta))
        throw std::invalid_argument("rotation: non-finite angle");
    const Matrix gen = std::cos(alpha) * ops.jx + std::sin(alpha) * ops.jy;
    Eigen::SelfAdjointEigenSolver<Matrix> es(gen);
    const auto& v = es.eigenvectors();
    Vector phases = (-iu * theta * es.eigenvalues().array()).exp().matrix();
    return v * phases.asDiagonal() * v.adjoint();
}

inline Matrix rotation_z(const SpinOperators& ops, double theta) {
    const int d = static_cast<int>(ops.jz.rows());
    Matrix u = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
        u(i, i) = std::exp(-iu * theta * ops.jz(i, i).real());
    return u;
}

// Unitary whose columns are the Jx eigenstates: column i is |j, m>_x with
// m = j - i. The phase convention is fixed by the z -> x axis rotation
// exp(-i (pi/2) Jy).
inline Matrix jx_eigenbasis(const SpinOperators& ops) {
    return rotation(ops, pi / 2.0, pi / 2.0);
}

inline Vector jx_eigenstate(const DickeSpace& space, const SpinOperators& ops,
                            int two_m) {
    return jx_eigenbasis(ops).col(space.index_of(two_m));
}

// Probe parity (-1)^(j - Jz): alternating diagonal in this basis ordering.
inline Matrix parity_probe(const DickeSpace& space) {
    const int d = space.dim();
    Matrix p = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) p(i, i) = (i % 2 == 0) ? 1.0 : -1.0;
    return p;
}

// Ancilla qubit, basis order (|e>, |g>).
struct QubitSpace {
    Matrix sigma_x, sigma_y, sigma_z, identity;
    Vector e, g, plus, minus;

    QubitSpace() {
        sigma_x = Matrix::Zero(2, 2);
        sigma_x << 0, 1, 1, 0;
        sigma_y = Matrix::Zero(2, 2);
        sigma_y << 0, -iu, iu, 0;
        sigma_z = Matrix::Zero(2, 2);
        sigma_z << 1, 0, 0, -1;
        identity = Matrix::Identity(2, 2);
        e = Vector::Zero(2);
        e << 1, 0;
        g = Vector::Zero(2);
        g << 0, 1;
        const double s = 1.0 / std::sqrt(2.0);
        plus = s * (e + g);
        minus = s * (e - g);
    }
};

// Tensor product with fixed ordering probe (x) qubit.
inline Matrix embed(const Matrix& probe_op, const Matrix& qubit_op) {
    const auto pr = probe_op.rows(), pc = probe_op.cols();
    const auto qr = qubit_op.rows(), qc = qubit_op.cols();
    Matrix out(pr * qr, pc * qc);
    for (Eigen::Index i = 0; i < pr; ++i)
        for (Eigen::Index k = 0; k < pc; ++k)
            out.block(i * qr, k * qc, qr, qc) = probe_op(i, k) * qubit_op;
    return out;
}

inline Vector embed_state(const Vector& probe, const Vector& qubit) {
    Vector out(probe.size() * qubit.size());
    for (Eigen::Index i = 0; i < probe.size(); ++i)
        out.segment(i * qubit.size(), qubit.size()) = probe(i) * qubit;
    return out;
}

// Partial trace over the qubit factor.
inline Matrix trace_out_qubit(const Matrix& rho, const DickeSpace& space) {
    const int d = space.dim();
    Matrix out = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
            out(i, k) = rho(2 * i, 2 * k) + rho(2 * i + 1, 2 * k + 1);
    return out;
}

// Partial trace over the probe factor.
inline Matrix trace_out_probe(const Matrix& rho, const DickeSpace& space) {
    const int d = space.dim();
    Matrix out = Matrix::Zero(2, 2);
    for (int q = 0; q < 2; ++q)
        for (int r = 0; r < 2; ++r)
            for (int i = 0; i < d; ++i) out(q, r) += rho(2 * i + q, 2 * i + r);
    return out;
}

} // namespace metrology
