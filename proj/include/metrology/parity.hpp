#pragma once

// Parity detection on the ancilla (sigma_z) or the probe ((-1)^(j-Jz)),
// the error-propagation phase sensitivity, and the closed-form signals,
// sensitivities, and optimal working points.

#include <cmath>
#include <functional>
#include <vector>

#include "metrology/circuit.hpp"
#include "metrology/types.hpp"

namespace metrology {

enum class ParityMode { ancilla, probe };

inline constexpr double divergence_slope_threshold = 1e-10;
inline constexpr double sensitivity_sentinel = -1.0;

struct SensitivitySample {
    double theta;
    double signal;
    double slope;
    double sensitivity; // sentinel when divergent
    bool divergent;
};

struct Minimum {
    double theta_opt;
    double sensitivity_min;
};

struct SensitivityCurve {
    std::vector<SensitivitySample> samples;
    std::vector<Minimum> minima;
    std::vector<double> divergences;
};

// Exact simulated parity signal over theta for a fixed preparation. The
// post-measurement branch states are computed once; only the encoding
// rotation varies with theta. The parity operator is conjugated by the
// second-stage propagator up front.
class ParityAnalysis {
public:
    ParityAnalysis(const ProtocolConfig& cfg, ParityMode mode)
        : circuit_(cfg), mode_(mode) {
        const Vector probe = circuit_.prepare_polarized(-1);
        init(probe, circuit_.qubit().plus);
    }

    ParityAnalysis(const ProtocolConfig& cfg, ParityMode mode,
                   const Vector& probe, const Vector& qb)
        : circuit_(cfg), mode_(mode) {
        init(probe, qb);
    }

    const Circuit& circuit() const { return circuit_; }

    struct SignalSlope {
        double signal;
        double slope;
    };

    SignalSlope signal_and_slope(double theta) const {
        const Matrix r = circuit_.encoding_operator(theta);
        double sig = 0.0, slope = 0.0;
        for (const Vector& psi_m : {branch_plus_, branch_minus_}) {
            Vector enc = apply_probe(r, psi_m);
            Vector denc = -iu * apply_probe(circuit_.encoding_generator(), enc);
            Vector pe = pi_eff_ * enc;
            sig += enc.dot(pe).real();
            slope += 2.0 * pe.dot(denc).real();
        }
        return {sig, slope};
    }

    double signal(double theta) const { return signal_and_slope(theta).signal; }

    SensitivitySample sample(double theta) const {
        const auto ss = signal_and_slope(theta);
        SensitivitySample s{theta, ss.signal, ss.slope, sensitivity_sentinel,
                            false};
        if (std::abs(ss.slope) < divergence_slope_threshold) {
            s.divergent = true;
        } else {
            const double var = std::max(0.0, 1.0 - ss.signal * ss.signal);
            s.sensitivity = std::sqrt(var) / std::abs(ss.slope);
        }
        return s;
    }

    double sensitivity(double theta) const { return sample(theta).sensitivity; }

    // golden-section refinement of a bracketed sensitivity minimum
    Minimum refine_minimum(double lo, double hi,
                           double tol = 1e-8) const {
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = lo, b = hi;
        double c = b - gr * (b - a);
        double d = a + gr * (b - a);
        double fc = penalized(c), fd = penalized(d);
        while (b - a > tol) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - gr * (b - a);
                fc = penalized(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + gr * (b - a);
                fd = penalized(d);
            }
        }
        const double t = 0.5 * (a + b);
        return {t, sensitivity(t)};
    }

    SensitivityCurve scan(double lo, double hi, int count) const {
        SensitivityCurve curve;
        curve.samples.reserve(count);
        for (int i = 0; i < count; ++i) {
            const double t = lo + (hi - lo) * i / (count - 1);
            curve.samples.push_back(sample(t));
            if (curve.samples.back().divergent)
                curve.divergences.push_back(t);
        }
        for (int i = 1; i + 1 < count; ++i) {
            const auto& prev = curve.samples[i - 1];
            const auto& cur = curve.samples[i];
            const auto& next = curve.samples[i + 1];
            if (prev.divergent || cur.divergent || next.divergent) continue;
            if (cur.sensitivity <= prev.sensitivity &&
                cur.sensitivity <= next.sensitivity)
                curve.minima.push_back(
                    refine_minimum(prev.theta, next.theta));
        }
        return curve;
    }

    // half-width of the window around theta_opt keeping the sensitivity
    // within ratio * its minimum, located by bisection on each side
    double window_halfwidth(double theta_opt, double ratio = 1.2,
                            double max_width = pi) const {
        const double smin = sensitivity(theta_opt);
        const double limit = ratio * smin;
        auto crossing = [&](int dir) {
            double step = 1e-3;
            double inside = 0.0, outside = 0.0;
            bool found = false;
            for (double w = step; w <= max_width; w += step) {
                const double s = sensitivity(theta_opt + dir * w);
                if (s < 0.0 || s > limit) {
                    outside = w;
                    found = true;
                    break;
                }
                inside = w;
            }
            if (!found) return max_width;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (inside + outside);
                const double s = sensitivity(theta_opt + dir * mid);
                if (s < 0.0 || s > limit)
                    outside = mid;
                else
                    inside = mid;
            }
            return 0.5 * (inside + outside);
        };
        return std::min(crossing(+1), crossing(-1));
    }

private:
    void init(const Vector& probe, const Vector& qb) {
        const ProtocolConfig& cfg = circuit_.config();
        Vector psi1 = circuit_.u1() * embed_state(probe, qb);
        branch_plus_ = project(psi1, +1);
        branch_minus_ = project(psi1, -1);
        const int d = circuit_.space().dim();
        Matrix parity =
            mode_ == ParityMode::ancilla
                ? embed(Matrix::Identity(d, d), circuit_.qubit().sigma_z)
                : embed(parity_probe(circuit_.space()),
                        circuit_.qubit().identity);
        if (cfg.t2 > 0.0) {
            const Matrix u2 = analytic_evolution(cfg, cfg.t2);
            pi_eff_ = u2.adjoint() * parity * u2;
        } else {
            pi_eff_ = parity;
        }
    }

    Vector project(const Vector& psi, int outcome) const {
        const Vector& qb =
            outcome > 0 ? circuit_.qubit().plus : circuit_.qubit().minus;
        const int d = circuit_.space().dim();
        Vector out = Vector::Zero(psi.size());
        for (int i = 0; i < d; ++i) {
            const Complex amp = std::conj(qb(0)) * psi(2 * i) +
                                std::conj(qb(1)) * psi(2 * i + 1);
            out(2 * i) = amp * qb(0);
            out(2 * i + 1) = amp * qb(1);
        }
        return out;
    }

    Vector apply_probe(const Matrix& op, const Vector& psi) const {
        const int d = circuit_.space().dim();
        Vector out(psi.size());
        for (int q = 0; q < 2; ++q) {
            Vector comp(d);
            for (int i = 0; i < d; ++i) comp(i) = psi(2 * i + q);
            Vector res = op * comp;
            for (int i = 0; i < d; ++i) out(2 * i + q) = res(i);
        }
        return out;
    }

    double penalized(double theta) const {
        const double s = sensitivity(theta);
        return s < 0.0 ? 1e300 : s;
    }

    Circuit circuit_;
    ParityMode mode_;
    Vector branch_plus_, branch_minus_;
    Matrix pi_eff_;
};

// ---- closed forms ----

// [N^2 sin(N theta) + N sin(theta)] / (N+1)^2; the antiderivative-consistent
// companion of the closed sensitivity below (|signal| <= N(N+1)/(N+1)^2 < 1)
inline double signal_closed_ancilla(int n, double theta) {
    const double np1 = n + 1;
    return (double(n) * n * std::sin(n * theta) + n * std::sin(theta)) /
           (np1 * np1);
}

inline double sensitivity_closed_ancilla(int n, double theta) {
    const double ninv = 1.0 / n;
    const double s = std::sin(n * theta) + ninv * std::sin(theta);
    const double c = std::cos(n * theta) + ninv * ninv * std::cos(theta);
    if (std::abs(c) < 1e-300) return sensitivity_sentinel;
    const double q = std::pow(1.0 + ninv, 4) - s * s;
    return ninv * std::sqrt(std::max(q, 0.0)) / std::abs(c);
}

struct OptimalPoint {
    double theta_opt;
    double sensitivity_min;
    double flatness; // quadratic coefficient around theta_opt
};

inline OptimalPoint optimal_points_ancilla(int n, int k = 0) {
    const double np1 = n + 1;
    return {k * pi, np1 * np1 / (n * (double(n) * n + 1.0)),
            (4.0 * n + 3.0) / (2.0 * n + 4.0)};
}

inline double signal_closed_probe(int n, double theta, double phi,
                                  bool identity_stage2) {
    const double j = 0.5 * n;
    const double arg = identity_stage2 ? n * theta + j * pi
                                       : n * theta + j * pi + phi;
    const double val = identity_stage2 ? std::cos(arg) : std::sin(arg);
    return n / (n + 1.0) * val;
}

inline double sensitivity_closed_probe(int n, double theta, double phi,
                                       bool identity_stage2) {
    // the t2 = 4 n3 t1 curve is the t2 = 0 curve at phi = pi/2
    const double eff_phi = identity_stage2 ? pi / 2.0 : phi;
    const double c = std::cos(n * theta + 0.5 * n * pi + eff_phi);
    if (std::abs(c) < 1e-300) return sensitivity_sentinel;
    return (1.0 / n) *
           std::sqrt(1.0 + (2.0 * n + 1.0) / (double(n) * n * c * c));
}

inline OptimalPoint optimal_points_probe(int n, double phi, int k1 = 0) {
    const double j = 0.5 * n;
    return {((k1 - j) * pi - phi) / n, (n + 1.0) / (double(n) * n),
            (2.0 * n + 1.0) / (2.0 * n + 2.0)};
}

inline double divergence_point_probe(int n, double phi, int k2 = 0) {
    const double j = 0.5 * n;
    return ((k2 - j + 0.5) * pi - phi) / n;
}

} // namespace metrology
