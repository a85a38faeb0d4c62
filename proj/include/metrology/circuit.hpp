#pragma once

// Full protocol circuit: state preparation (polarized / superposed /
// thermal), first joint evolution, unconditional measurement branching in
// the sigma_x basis of the ancilla, (possibly axis-deviated) phase encoding,
// and second joint evolution. Branch states are kept unnormalized; the
// branch probability is recorded at the measurement step.

#include <cmath>
#include <stdexcept>

#include "metrology/conditions.hpp"
#include "metrology/config.hpp"
#include "metrology/dicke.hpp"
#include "metrology/evolution.hpp"
#include "metrology/types.hpp"

namespace metrology {

struct BranchOutput {
    int outcome; // +1 or -1
    Vector state; // unnormalized composite state
    double probability;
};

struct BranchWithDerivative {
    BranchOutput branch;
    Vector dstate; // d/dtheta of the unnormalized state
};

struct DensityBranch {
    int outcome;
    Matrix state; // unnormalized composite density matrix
    double probability;
};

class Circuit {
public:
    explicit Circuit(const ProtocolConfig& cfg)
        : cfg_(cfg), space_(cfg.N), ops_(build_collective_operators(space_)) {
        cfg_.validate();
        u1_ = analytic_evolution(cfg_, cfg_.t1);
        has_u2_ = cfg_.t2 > 0.0;
        if (has_u2_) u2_ = analytic_evolution(cfg_, cfg_.t2);
        generator_ = std::cos(cfg_.delta) * ops_.jx + std::sin(cfg_.delta) * ops_.jy;
        Eigen::SelfAdjointEigenSolver<Matrix> es(generator_);
        gen_vecs_ = es.eigenvectors();
        gen_vals_ = es.eigenvalues();
        opt_basis_ = phase_operator() * jx_eigenbasis(ops_);
    }

    const ProtocolConfig& config() const { return cfg_; }
    const DickeSpace& space() const { return space_; }
    const SpinOperators& ops() const { return ops_; }
    const QubitSpace& qubit() const { return qubit_; }
    const Matrix& u1() const { return u1_; }
    bool has_second_stage() const { return has_u2_; }
    const Matrix& u2() const {
        if (!has_u2_) throw std::logic_error("u2: second stage disabled");
        return u2_;
    }

    // diag exp(-i [Omega(m) - A(m)] t1), the map from the Jx eigenbasis to
    // the optimized preparation basis
    Matrix phase_operator() const {
        const auto fn = operator_functions(cfg_);
        const int d = space_.dim();
        Matrix ph = Matrix::Zero(d, d);
        for (int i = 0; i < d; ++i) {
            const double m = space_.m_at(i);
            ph(i, i) = std::exp(-iu * (fn.big_omega(m) - fn.a(m)) * cfg_.t1);
        }
        return ph;
    }

    // columns are |j, m>_opt, ordered m = j down to -j
    const Matrix& opt_basis() const { return opt_basis_; }

    Vector prepare_polarized(int sign) const {
        return opt_basis_.col(sign > 0 ? 0 : space_.n_spins());
    }

    // a_m |j,m>_opt + b_m e^{-i phi_m} |j,-m>_opt
    Vector prepare_superposition(int two_m, double a_m, double b_m,
                                 double phi_m) const {
        if (std::abs(a_m * a_m + b_m * b_m - 1.0) > 1e-10)
            throw std::invalid_argument("superposition: a^2 + b^2 != 1");
        Vector psi = a_m * opt_basis_.col(space_.index_of(two_m)) +
                     b_m * std::exp(-iu * phi_m) *
                         opt_basis_.col(space_.index_of(-two_m));
        return psi;
    }

    // populations e^{-m beta}/Z in the optimized basis
    Matrix prepare_thermal(double beta) const {
        const int d = space_.dim();
        RealVector w(d);
        double shift = -1e300;
        for (int i = 0; i < d; ++i)
            shift = std::max(shift, -beta * space_.m_at(i));
        for (int i = 0; i < d; ++i)
            w(i) = std::exp(-beta * space_.m_at(i) - shift);
        w /= w.sum();
        return opt_basis_ * w.cast<Complex>().asDiagonal() *
               opt_basis_.adjoint();
    }

    // probe-space generator of the encoding, cos(delta) Jx + sin(delta) Jy
    const Matrix& encoding_generator() const { return generator_; }

    Matrix encoding_operator(double theta) const {
        Vector phases = (-iu * theta * gen_vals_.array()).exp().matrix();
        return gen_vecs_ * phases.asDiagonal() * gen_vecs_.adjoint();
    }

    BranchOutput run_branch(const Vector& probe, const Vector& qb,
                            int outcome) const {
        Vector after = measure(u1_ * embed_state(probe, qb), outcome);
        BranchOutput out{outcome, Vector{}, after.squaredNorm()};
        Vector enc = apply_probe(encoding_operator(cfg_.theta), after);
        out.state = has_u2_ ? Vector(u2_ * enc) : std::move(enc);
        return out;
    }

    BranchWithDerivative run_branch_with_derivative(const Vector& probe,
                                                    const Vector& qb,
                                                    int outcome) const {
        Vector after = measure(u1_ * embed_state(probe, qb), outcome);
        const double prob = after.squaredNorm();
        Vector enc = apply_probe(encoding_operator(cfg_.theta), after);
        Vector denc = -iu * apply_probe(generator_, enc);
        BranchWithDerivative out;
        out.branch = {outcome, has_u2_ ? Vector(u2_ * enc) : std::move(enc),
                      prob};
        out.dstate = has_u2_ ? Vector(u2_ * denc) : std::move(denc);
        return out;
    }

    DensityBranch run_branch_density(const Matrix& probe_rho,
                                     const Matrix& qubit_rho,
                                     int outcome) const {
        Matrix rho = u1_ * embed(probe_rho, qubit_rho) * u1_.adjoint();
        Matrix sel = measure_density(rho, outcome);
        DensityBranch out{outcome, Matrix{}, sel.trace().real()};
        const Matrix r = embed(encoding_operator(cfg_.theta),
                               qubit_.identity);
        Matrix enc = r * sel * r.adjoint();
        out.state = has_u2_ ? Matrix(u2_ * enc * u2_.adjoint())
                            : std::move(enc);
        return out;
    }

    // unconditional output: outcomes summed, trace 1 for a valid input
    Matrix run_full(const Matrix& probe_rho, const Matrix& qubit_rho) const {
        return run_branch_density(probe_rho, qubit_rho, +1).state +
               run_branch_density(probe_rho, qubit_rho, -1).state;
    }

    Matrix run_full(const Vector& probe, const Vector& qb) const {
        const auto bp = run_branch(probe, qb, +1);
        const auto bm = run_branch(probe, qb, -1);
        return bp.state * bp.state.adjoint() + bm.state * bm.state.adjoint();
    }

    // extract the probe factor of a composite branch state by contracting
    // the qubit side with |outcome> (exact when t2 = 0)
    Vector probe_component(const Vector& composite, int outcome) const {
        const Vector& qb = outcome > 0 ? qubit_.plus : qubit_.minus;
        const int d = space_.dim();
        Vector probe(d);
        for (int i = 0; i < d; ++i)
            probe(i) = std::conj(qb(0)) * composite(2 * i) +
                       std::conj(qb(1)) * composite(2 * i + 1);
        return probe;
    }

    // overlap with (|j, s j>_x + e^{-i phi} |j, -s j>_x)/sqrt(2); with
    // maximize set, the free phase is optimized out
    double ghz_fidelity(const Vector& probe_state, double phi, int sign,
                        bool maximize = false) const {
        const Matrix xb = jx_eigenbasis(ops_);
        const Vector& top = sign > 0 ? xb.col(0) : xb.col(space_.n_spins());
        const Vector& bot = sign > 0 ? xb.col(space_.n_spins()) : xb.col(0);
        const Complex a = top.dot(probe_state);
        const Complex b = bot.dot(probe_state);
        if (maximize) {
            const double s = (std::abs(a) + std::abs(b)) / std::sqrt(2.0);
            return s * s;
        }
        return std::norm((a + std::exp(iu * phi) * b) / std::sqrt(2.0));
    }

private:
    Vector measure(const Vector& psi, int outcome) const {
        const Vector& qb = outcome > 0 ? qubit_.plus : qubit_.minus;
        const int d = space_.dim();
        Vector out = Vector::Zero(psi.size());
        for (int i = 0; i < d; ++i) {
            const Complex amp = std::conj(qb(0)) * psi(2 * i) +
                                std::conj(qb(1)) * psi(2 * i + 1);
            out(2 * i) = amp * qb(0);
            out(2 * i + 1) = amp * qb(1);
        }
        return out;
    }

    Matrix measure_density(const Matrix& rho, int outcome) const {
        const Vector& qb = outcome > 0 ? qubit_.plus : qubit_.minus;
        const Matrix proj = embed(
            Matrix::Identity(space_.dim(), space_.dim()),
            Matrix(qb * qb.adjoint()));
        return proj * rho * proj;
    }

    Vector apply_probe(const Matrix& probe_op, const Vector& psi) const {
        const int d = space_.dim();
        Vector out = Vector::Zero(psi.size());
        for (int q = 0; q < 2; ++q) {
            Vector comp(d), res(d);
            for (int i = 0; i < d; ++i) comp(i) = psi(2 * i + q);
            res = probe_op * comp;
            for (int i = 0; i < d; ++i) out(2 * i + q) = res(i);
        }
        return out;
    }

    ProtocolConfig cfg_;
    DickeSpace space_;
    SpinOperators ops_;
    QubitSpace qubit_;
    Matrix u1_, u2_;
    bool has_u2_ = false;
    Matrix generator_;
    Matrix gen_vecs_;
    RealVector gen_vals_;
    Matrix opt_basis_;
};

} // namespace metrology
