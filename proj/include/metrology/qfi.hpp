#pragma once

// Quantum Fisher information: exact numerics on simulated branch states
// (pure route) and density matrices (spectral SLD route), plus the
// closed-form reference values for the polarized, superposed, thermal, and
// axis-deviated preparations.

#include <cmath>
#include <stdexcept>
#include <string>

#include "metrology/circuit.hpp"
#include "metrology/types.hpp"

namespace metrology {

struct QfiReport {
    double f_plus = 0.0;
    double f_minus = 0.0;
    double f_total = 0.0;
    double closed_form_value = 0.0;
    std::string closed_form_id;
    double relative_gap = 0.0;
    bool zero_probability_branch = false;
};

// effective QFI of one unnormalized branch,
// 4 N [<dpsi'|dpsi'> - |<psi'|dpsi'>|^2] with psi' = psi/sqrt(N); the
// branch norm is theta-independent, so dpsi' = dpsi/sqrt(N)
inline double qfi_branch(const Vector& state, const Vector& dstate,
                         double probability, bool* flagged = nullptr) {
    if (probability <= 1e-14) {
        if (flagged) *flagged = true;
        return 0.0;
    }
    const double dd = dstate.squaredNorm();
    const Complex sd = state.dot(dstate);
    return 4.0 * (dd - std::norm(sd) / probability);
}

inline QfiReport qfi_pure_branches(const BranchWithDerivative& plus,
                                   const BranchWithDerivative& minus) {
    QfiReport rep;
    rep.f_plus = qfi_branch(plus.branch.state, plus.dstate,
                            plus.branch.probability,
                            &rep.zero_probability_branch);
    rep.f_minus = qfi_branch(minus.branch.state, minus.dstate,
                             minus.branch.probability,
                             &rep.zero_probability_branch);
    rep.f_total = rep.f_plus + rep.f_minus;
    return rep;
}

// Spectral SLD form: F = sum_{k,l} 2 |<k|drho|l>|^2 / (p_k + p_l) over
// pairs with p_k + p_l above the support cutoff.
inline double qfi_mixed(const Matrix& rho, const Matrix& drho) {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9 ||
        (drho - drho.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("qfi_mixed: non-Hermitian input");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    const RealVector& p = es.eigenvalues();
    const Matrix d = es.eigenvectors().adjoint() * drho * es.eigenvectors();
    const double cutoff = 1e-12 * p.maxCoeff();
    double f = 0.0;
    const int n = static_cast<int>(p.size());
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            const double s = p(k) + p(l);
            if (s > cutoff) f += 2.0 * std::norm(d(k, l)) / s;
        }
    return f;
}

// full-circuit QFI for a pure probe preparation, generator route
inline QfiReport qfi_pure_exact(const Circuit& c, const Vector& probe,
                                const Vector& qb) {
    return qfi_pure_branches(c.run_branch_with_derivative(probe, qb, +1),
                             c.run_branch_with_derivative(probe, qb, -1));
}

inline QfiReport qfi_polarized_exact(const ProtocolConfig& cfg) {
    Circuit c(cfg);
    return qfi_pure_exact(c, c.prepare_polarized(-1), c.qubit().plus);
}

// full-circuit QFI for a mixed probe preparation. The unconditional output
// is rho(theta) = sum_pm U2 R sel_pm R^dag U2^dag, so
// d rho = -i [U2 G U2^dag, rho] with G the embedded encoding generator.
inline double qfi_mixed_exact(const Circuit& c, const Matrix& probe_rho,
                              const Matrix& qubit_rho) {
    Matrix rho = c.run_branch_density(probe_rho, qubit_rho, +1).state +
                 c.run_branch_density(probe_rho, qubit_rho, -1).state;
    Matrix g2 = embed(c.encoding_generator(), c.qubit().identity);
    if (c.has_second_stage()) g2 = c.u2() * g2 * c.u2().adjoint();
    const Matrix drho = -iu * (g2 * rho - rho * g2);
    return qfi_mixed(rho, drho);
}

inline double qfi_thermal_exact(const ProtocolConfig& cfg, double beta) {
    Circuit c(cfg);
    const Matrix rho_q = c.qubit().plus * c.qubit().plus.adjoint();
    return qfi_mixed_exact(c, c.prepare_thermal(beta), rho_q);
}

// N^2 [1 - 4/(N+1)^2]
inline double qfi_closed_polarized(int n) {
    if (n < 1) throw std::invalid_argument("qfi_closed_polarized: N < 1");
    const double np1 = n + 1;
    return double(n) * n * (1.0 - 4.0 / (np1 * np1));
}

// reduced form under any of the decoupling conditions:
// 4 [1 - 6/(N+1)^2] m^2 + 2 N^2/(N+1)^2
inline double qfi_closed_superposition_reduced(int n, double m) {
    const double np1 = n + 1;
    return 4.0 * (1.0 - 6.0 / (np1 * np1)) * m * m +
           2.0 * double(n) * n / (np1 * np1);
}

// full four-term expression for a_m |j,m>_opt + b_m e^{-i phi_m} |j,-m>_opt
inline double qfi_closed_superposition(int n, double m, double a_m, double b_m,
                                       double phi_m, double phi) {
    if (std::abs(a_m * a_m + b_m * b_m - 1.0) > 1e-10)
        throw std::invalid_argument("qfi_closed_superposition: a^2+b^2 != 1");
    const double np1 = n + 1;
    const double np1sq = np1 * np1;
    const double m2 = m * m;
    const double sphi = std::sin(phi + np1 * pi / 2.0);
    const double d = np1sq - 4.0 * m2;
    const double pop = a_m * a_m - b_m * b_m;
    double f = 4.0 * (1.0 - 6.0 / np1sq) * m2;
    f -= d * d / (np1sq - 4.0 * m2 * pop * pop) * 16.0 * m2 / np1sq *
         a_m * a_m * b_m * b_m * std::sin(phi_m) * std::sin(phi_m) *
         sphi * sphi;
    f += ((n % 2 == 0) ? 1.0 : -1.0) * 8.0 * m *
         (double(n) * (n + 2) - 4.0 * m2) / np1sq * a_m * b_m *
         std::sin(phi_m) * sphi;
    f += 2.0 * double(n) * n / np1sq;
    return f;
}

// Thermal-preparation closed form. The branch weight normalizer is taken
// self-consistently so the weights p_m sum to one.
inline double qfi_closed_thermal(int n, double beta) {
    if (n < 1) throw std::invalid_argument("qfi_closed_thermal: N < 1");
    const double j = 0.5 * n;
    // populations e^{-m beta}/Z, evaluated with an exponent shift
    double shift = -1e300;
    for (int i = 0; i <= n; ++i) shift = std::max(shift, -beta * (j - i));
    double z = 0.0;
    for (int i = 0; i <= n; ++i) z += std::exp(-beta * (j - i) - shift);

    double norm_plus = 0.0; // sum of e^{-m beta} (N-2m)^2 / (16 Z N^2)
    for (int i = 0; i <= n; ++i) {
        const double m = j - i;
        const double w = n - 2.0 * m;
        norm_plus += std::exp(-beta * m - shift) / z * w * w /
                     (16.0 * double(n) * n);
    }

    const double log_z = shift + std::log(z);
    double f = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double m = j - i;
        const double w = (n - 2.0 * m) / (4.0 * n);
        const double pop = std::exp(-beta * m - shift) / z;
        f += 4.0 * m * m * w * w * pop / norm_plus;
        // 1/[Z (e^{-m b} + e^{m b})], evaluated in log space
        const double a = std::abs(m * beta);
        const double log_cosh2 = a + std::log1p(std::exp(-2.0 * a));
        f -= 8.0 * w * w * m * m * std::exp(-(log_z + log_cosh2)) / norm_plus;
    }
    return f;
}

// second-order-in-delta expansion around the ideal encoding axis; the
// linear term follows the optimized-axis orientation (-1)^{n_P} J_y
inline double qfi_closed_deviation(int n, double delta, int n_p) {
    const double np1 = n + 1;
    const double sgn = (n_p % 2 == 0) ? 1.0 : -1.0;
    return double(n) * n / (np1 * np1) *
           (np1 * np1 - 4.0 + delta * sgn * (2.0 * n - 1.0) -
            delta * delta * (double(n) * n + 2.0 * n - 2.0));
}

// stationary point of the expansion above
inline double qfi_deviation_optimum(int n, int n_p) {
    const double sgn = (n_p % 2 == 0) ? 1.0 : -1.0;
    return sgn * (2.0 * n - 1.0) / (2.0 * (double(n) * n + 2.0 * n - 2.0));
}

} // namespace metrology
