#pragma once

// Closed-form optimal-parameter relations: the coupling constraint tying
// (g, g_z) to the detuning, optimal first-stage durations, probe frequency,
// the interference phase phi, quantized longitudinal couplings, and the
// second-stage durations realizing time reversal or the identity.

#include <cmath>
#include <stdexcept>

#include "metrology/config.hpp"
#include "metrology/types.hpp"

namespace metrology {

// g from sqrt(g_z^2 - g^2) = 2 delta_a / (N+1)
inline double coupling_from_gz(int n, double delta_a, double g_z) {
    const double thresh = 2.0 * delta_a / (n + 1);
    const double rad = g_z * g_z - thresh * thresh;
    if (rad < -1e-15 * thresh * thresh)
        throw std::domain_error("coupling_from_gz: g_z below threshold");
    return std::sqrt(std::max(rad, 0.0));
}

inline double t1_opt(int n, double delta_a, int n1 = 0) {
    return (n + 1) * (2 * n1 + 1) * pi / (4.0 * delta_a);
}

// phi = (2 n1 + 1) [1/2 + (N+1)^2 g_z / (4 delta_a)] pi
inline double phi_parameter(int n, double g_z, double delta_a, int n1 = 0) {
    const double np1 = n + 1;
    return (2 * n1 + 1) * (0.5 + np1 * np1 * g_z / (4.0 * delta_a)) * pi;
}

inline double wrap_2pi(double phase) {
    double w = std::fmod(phase, 2.0 * pi);
    if (w < 0) w += 2.0 * pi;
    return w;
}

inline double omega_p_opt(double t1opt, int n_p) { return n_p * pi / t1opt; }

// g_z = (N + 2 n_z - 1) / (2 n1 + 1) * 2 delta_a / (N+1)^2
inline double gz_quantized(int n, double delta_a, int n1, int n_z) {
    const double np1 = n + 1;
    return (n + 2 * n_z - 1) * 2.0 * delta_a / ((2 * n1 + 1) * np1 * np1);
}

// variant selected through the phase condition phi + (N+1) pi/2 = n_phi pi
inline double gz_quantized_phi(int n, double delta_a, int n1, int n_phi) {
    const double np1 = n + 1;
    return (n + 2 * n_phi - 2) * 2.0 * delta_a / ((2 * n1 + 1) * np1 * np1);
}

inline double t2_time_reversal(double t1opt, int n2 = 1) {
    return (4 * n2 - 1) * t1opt;
}

inline double t2_identity(double t1opt, int n3 = 1) {
    if (n3 == 0) throw std::invalid_argument("t2_identity: n3 must be nonzero");
    return 4 * n3 * t1opt;
}

// Bundled default configuration: n1 = 0, n_p = 10, n_z = N, all quantities
// in units of delta_a. At N = 1 the quantized g_z sits exactly on the
// coupling threshold and g degenerates to zero (pure longitudinal coupling).
inline ProtocolConfig optimal_config(int n, double delta_a = 1.0, int n1 = 0,
                                     int n_p = 10, int n_z_knob = -1) {
    if (n < 1)
        throw std::domain_error("optimal_config: N must be >= 1");
    const int n_z = (n_z_knob < 0) ? n : n_z_knob;
    ProtocolConfig cfg;
    cfg.N = n;
    cfg.delta_a = delta_a;
    cfg.n1 = n1;
    cfg.n_p = n_p;
    cfg.n_z = n_z;
    cfg.t1 = t1_opt(n, delta_a, n1);
    cfg.omega_p = omega_p_opt(cfg.t1, n_p);
    cfg.g_z = gz_quantized(n, delta_a, n1, n_z);
    cfg.g = coupling_from_gz(n, delta_a, cfg.g_z);
    cfg.t2 = 0.0;
    cfg.validate();
    return cfg;
}

} // namespace metrology
