#pragma once

// Joint probe-qubit Hamiltonian
//   H = omega_p Jz x I + omega_a I x sigma_z + g_z Jz x sigma_z
//       + g (Jx x sigma_x + Jy x sigma_y)
// and its exact propagator, computed two independent ways: the block form
// over the invariant subspaces {|m+1, g>, |m, e>} and a brute-force
// eigendecomposition exponential used as the oracle.

#include <cmath>

#include "metrology/config.hpp"
#include "metrology/dicke.hpp"
#include "metrology/types.hpp"

namespace metrology {

// Scalar functions of m entering the block propagator.
struct OperatorFunctions {
    double j, g, g_z, delta_a, omega_p;

    // off-diagonal block coupling, vanishes at m = j
    double omega(double m) const {
        return g * std::sqrt((j - m) * (j + m + 1.0));
    }
    double lambda(double m) const { return g_z * (m + 0.5) + delta_a; }
    double big_omega(double m) const { return std::hypot(omega(m), lambda(m)); }
    double a(double m) const { return omega_p * (m + 0.5) - g_z / 2.0; }
};

inline OperatorFunctions operator_functions(const ProtocolConfig& cfg) {
    cfg.validate();
    return {0.5 * cfg.N, cfg.g, cfg.g_z, cfg.delta_a, cfg.omega_p};
}

inline Matrix build_hamiltonian(const ProtocolConfig& cfg,
                                const SpinOperators& ops,
                                const QubitSpace& qubit) {
    cfg.validate();
    const int d = cfg.N + 1;
    Matrix h = cfg.omega_p * embed(ops.jz, qubit.identity) +
               cfg.omega_a() * embed(Matrix::Identity(d, d), qubit.sigma_z) +
               cfg.g_z * embed(ops.jz, qubit.sigma_z) +
               cfg.g * (embed(ops.jx, qubit.sigma_x) +
                        embed(ops.jy, qubit.sigma_y));
    return h;
}

inline Matrix build_hamiltonian(const ProtocolConfig& cfg) {
    const DickeSpace space(cfg.N);
    return build_hamiltonian(cfg, build_collective_operators(space),
                             QubitSpace{});
}

namespace detail {

// t * sinc(w t), safe at w -> 0
inline double sin_over(double w, double t) {
    const double x = w * t;
    if (std::abs(x) < 1e-5) return t * (1.0 - x * x / 6.0);
    return std::sin(x) / w;
}

} // namespace detail

// Block-assembled exp(-iHt). Composite index is 2*p + q with p the probe
// basis index (m = j - p) and q = 0 for |e>, 1 for |g>.
inline Matrix analytic_evolution(const ProtocolConfig& cfg, double t) {
    cfg.validate();
    if (!std::isfinite(t))
        throw std::invalid_argument("analytic_evolution: non-finite t");
    const DickeSpace space(cfg.N);
    const auto fn = operator_functions(cfg);
    const double j = space.j();
    const int dim = 2 * space.dim();
    Matrix u = Matrix::Zero(dim, dim);

    // uncoupled edge states |j, j, e> and |j, -j, g>
    u(0, 0) = std::exp(-iu * (j * (cfg.omega_p + cfg.g_z) + cfg.omega_a()) * t);
    u(dim - 1, dim - 1) =
        std::exp(iu * (j * (cfg.omega_p - cfg.g_z) + cfg.omega_a()) * t);

    // coupled pairs {|j, m+1, g>, |j, m, e>} for m = j-1 down to -j
    for (int p = 1; p <= space.n_spins(); ++p) {
        const double m = space.m_at(p); // lower member, paired with m+1
        const int ig = 2 * (p - 1) + 1; // |m+1, g>
        const int ie = 2 * p;           // |m, e>
        const double w = fn.omega(m), lam = fn.lambda(m);
        const double om = fn.big_omega(m);
        const Complex pref = std::exp(-iu * fn.a(m) * t);
        const double c = std::cos(om * t);
        const double s = detail::sin_over(om, t); // sin(om t)/om
        u(ig, ig) = pref * (c + iu * lam * s);
        u(ie, ie) = pref * (c - iu * lam * s);
        u(ig, ie) = pref * (-iu * w * s);
        u(ie, ig) = pref * (-iu * w * s);
    }
    return u;
}

// exp(-iHt) through the Hermitian eigendecomposition of H.
inline Matrix oracle_evolution(const ProtocolConfig& cfg, double t) {
    const Matrix h = build_hamiltonian(cfg);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("oracle_evolution: eigensolver failed");
    Vector phases = (-iu * t * es.eigenvalues().array()).exp().matrix();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace metrology
