#pragma once

// Protocol parameter set. All frequencies and couplings are expressed in
// units of the detuning delta_a = omega_a - omega_p/2, times in its inverse;
// omega_a is derived so the detuning relation holds by construction.

#include <cmath>
#include <stdexcept>

namespace metrology {

struct ProtocolConfig {
    int N = 1;            // probe spin number
    double delta_a = 1.0; // detuning, the unit scale
    double omega_p = 0.0; // probe splitting
    double g = 0.0;       // transversal coupling
    double g_z = 0.0;     // longitudinal coupling
    double t1 = 0.0;      // first joint-evolution duration
    double t2 = 0.0;      // second joint-evolution duration
    double theta = 0.0;   // encoded phase
    double delta = 0.0;   // encoding-axis deviation from x
    int n1 = 0;
    int n_p = 10;
    int n_z = 0;
    int n2 = 1;
    int n3 = 1;

    double omega_a() const { return omega_p / 2.0 + delta_a; }

    void validate() const {
        if (N < 1) throw std::invalid_argument("config: N must be >= 1");
        if (!(delta_a > 0.0))
            throw std::invalid_argument("config: delta_a must be positive");
        if (t1 < 0.0 || t2 < 0.0)
            throw std::invalid_argument("config: negative duration");
        for (double v : {omega_p, g, g_z, t1, t2, theta, delta})
            if (!std::isfinite(v))
                throw std::invalid_argument("config: non-finite parameter");
    }
};

} // namespace metrology
