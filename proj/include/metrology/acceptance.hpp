#pragma once

// The twelve release criteria, shared by the acceptance binary and the
// `validate` subcommand. Failures are data, not exceptions.

#include <random>
#include <string>
#include <vector>

#include "metrology/circuit.hpp"
#include "metrology/conditions.hpp"
#include "metrology/evolution.hpp"
#include "metrology/experiments.hpp"
#include "metrology/parity.hpp"
#include "metrology/qfi.hpp"

namespace metrology {

struct CheckResult {
    int criterion;
    std::string name;
    double measured;
    double target;
    double tolerance; // 0 for one-sided floor/ceiling checks
    bool pass;
};

namespace detail {

struct Collector {
    std::vector<CheckResult>& out;

    void near(int crit, std::string name, double measured, double target,
              double tol) {
        out.push_back({crit, std::move(name), measured, target, tol,
                       std::abs(measured - target) <= tol});
    }
    void floor(int crit, std::string name, double measured, double limit) {
        out.push_back(
            {crit, std::move(name), measured, limit, 0.0, measured >= limit});
    }
    void ceiling(int crit, std::string name, double measured, double limit) {
        out.push_back(
            {crit, std::move(name), measured, limit, 0.0, measured <= limit});
    }
    void inside(int crit, std::string name, double measured, double lo,
                double hi) {
        out.push_back({crit, std::move(name), measured, 0.5 * (lo + hi),
                       0.5 * (hi - lo), measured >= lo && measured <= hi});
    }
};

template <class Fn>
inline double golden_max(Fn&& f, double lo, double hi, double tol = 1e-6) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace detail

inline std::vector<CheckResult> run_acceptance() {
    std::vector<CheckResult> results;
    detail::Collector add{results};

    // 1: analytic propagator vs eigendecomposition oracle
    {
        std::mt19937 rng(20260825u);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            ProtocolConfig cfg;
            cfg.delta_a = 0.2 + 1.8 * uni(rng);
            cfg.omega_p = 5.0 * uni(rng);
            cfg.g = 2.0 * uni(rng);
            cfg.g_z = 2.0 * uni(rng);
            const double t = 20.0 * uni(rng);
            for (int n : {1, 2, 5, 20, 50}) {
                cfg.N = n;
                const Matrix gap = analytic_evolution(cfg, t) -
                                   oracle_evolution(cfg, t);
                worst = std::max(worst, gap.cwiseAbs().maxCoeff());
            }
        }
        add.ceiling(1, "propagator vs oracle max gap", worst, 1e-10);
    }

    // 2: master condition at the optimal parameter set
    {
        double worst = 0.0;
        for (int n : {2, 10, 100}) {
            const ProtocolConfig cfg = optimal_config(n);
            const auto fn = operator_functions(cfg);
            const double phi =
                phi_parameter(n, cfg.g_z, cfg.delta_a, cfg.n1);
            const DickeSpace s(n);
            for (int i = 0; i <= n; ++i) {
                const double m = s.m_at(i);
                const Complex lhs =
                    std::exp(-2.0 * iu * fn.big_omega(m) * cfg.t1);
                const Complex rhs =
                    std::exp(-iu * phi) * std::exp(-iu * pi * m);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
        add.ceiling(2, "master condition max entry gap", worst, 1e-9);
    }

    // 3: dominant branch probability vs the closed form
    for (int n : {10, 20, 50, 100}) {
        const Circuit c(optimal_config(n));
        const double p =
            c.run_branch(c.prepare_polarized(-1), c.qubit().plus, +1)
                .probability;
        const double closed = 0.5 * (1.0 + double(n) / (n + 1.0));
        add.ceiling(3, "branch probability gap N=" + std::to_string(n),
                    std::abs(p - closed), 2.0 / n);
    }

    // 4: polarized QFI closed form and cross-method agreement
    {
        const int n = 100;
        const ProtocolConfig cfg = optimal_config(n);
        const double f_pure = qfi_polarized_exact(cfg).f_total;
        add.ceiling(4, "polarized QFI/N^2 vs closed form",
                    std::abs(f_pure - qfi_closed_polarized(n)) /
                        (double(n) * n),
                    1e-3);
        const Circuit c(cfg);
        const Matrix probe_rho =
            c.prepare_polarized(-1) * c.prepare_polarized(-1).adjoint();
        const Matrix qb_rho = c.qubit().plus * c.qubit().plus.adjoint();
        const double f_mixed = qfi_mixed_exact(c, probe_rho, qb_rho);
        add.ceiling(4, "pure vs spectral-SLD relative gap",
                    std::abs(f_pure - f_mixed) / f_pure, 1e-8);
    }

    // 5: thermal QFI vs the closed form, and the scaling exponent
    {
        struct Pair {
            double beta;
            int n;
        };
        for (Pair p : {Pair{2.0, 10}, Pair{1.0, 15}, Pair{0.1, 70}}) {
            const double f = qfi_thermal_exact(optimal_config(p.n), p.beta);
            const double closed = qfi_closed_thermal(p.n, p.beta);
            add.ceiling(5,
                        "thermal QFI relative gap beta=" +
                            std::to_string(p.beta).substr(0, 3) +
                            " N=" + std::to_string(p.n),
                        std::abs(f - closed) / closed, 0.01);
        }
        std::vector<double> lx, ly;
        for (int n : {100, 150, 200, 250}) {
            lx.push_back(std::log(double(n)));
            ly.push_back(
                std::log(qfi_thermal_exact(optimal_config(n), 0.1)));
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double k = lx.size();
        const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        add.inside(5, "log-log slope beta=0.1 over N in [100,250]", slope,
                   1.90, 2.00);
    }

    // 6: robustness against the encoding-axis deviation
    {
        const int n = 100;
        const double n2 = double(n) * n;
        auto pol = [&](double dv) {
            ProtocolConfig cfg = optimal_config(n);
            cfg.delta = dv;
            return qfi_polarized_exact(cfg).f_total / n2;
        };
        auto th = [&](double dv) {
            ProtocolConfig cfg = optimal_config(n);
            cfg.delta = dv;
            return qfi_thermal_exact(cfg, 1.0) / n2;
        };
        add.floor(6, "polarized QFI/N^2 at |delta|=0.1",
                  std::min(pol(0.1), pol(-0.1)), 0.988);
        add.floor(6, "thermal QFI/N^2 at |delta|=0.1",
                  std::min(th(0.1), th(-0.1)), 0.956);
        const double peak_at = detail::golden_max(th, -0.05, 0.05, 1e-4);
        add.near(6, "thermal QFI/N^2 peak value", th(peak_at), 0.964, 0.005);
        const double argmax = detail::golden_max(pol, -0.03, 0.05);
        add.near(6, "polarized argmax delta vs closed optimum", argmax,
                 qfi_deviation_optimum(n, 10), 0.002);
    }

    // 7: robustness against the coupling strengths
    {
        const int n = 100;
        const double n2 = double(n) * n;
        auto point = [&](double g, double gz) {
            ProtocolConfig cfg = optimal_config(n);
            cfg.g = g;
            cfg.g_z = gz;
            return qfi_polarized_exact(cfg).f_total / n2;
        };
        double band = 1e300;
        for (double gz : {0.19, 0.20, 0.21})
            band = std::min(band, point(0.2, gz));
        add.floor(7, "QFI/N^2 band at g=0.2, g_z in [0.19,0.21]", band, 0.9);
        add.near(7, "QFI/N^2 at g=g_z=0.043", point(0.043, 0.043), 0.84,
                 0.02);
        add.near(7, "QFI/N^2 at g=g_z=0.24", point(0.24, 0.24), 0.98, 0.02);
    }

    // 8: ancilla parity sensitivity
    {
        const double min_targets[3] = {2.0, 1.38, 1.20};
        const double win_targets[3] = {0.199, 0.041, 0.021};
        const int ns[3] = {1, 5, 10};
        for (int i = 0; i < 3; ++i) {
            const int n = ns[i];
            ProtocolConfig cfg = strong_parity_config(n);
            cfg.t2 = t2_time_reversal(cfg.t1, cfg.n2);
            const ParityAnalysis pa(cfg, ParityMode::ancilla);
            const auto m = pa.refine_minimum(-0.4 / n, 0.4 / n);
            add.near(8, "N|dtheta| minimum N=" + std::to_string(n),
                     n * m.sensitivity_min, min_targets[i], 0.02);
            const double w = pa.window_halfwidth(m.theta_opt) / pi;
            add.near(8,
                     "working-point window / pi N=" + std::to_string(n), w,
                     win_targets[i], 0.002);
            if (n == 5) {
                const auto l1 =
                    pa.refine_minimum(0.2 * pi - 0.06, 0.2 * pi + 0.06);
                const auto l2 =
                    pa.refine_minimum(0.4 * pi - 0.06, 0.4 * pi + 0.06);
                add.near(8, "local minimum near theta=0.2pi",
                         n * l1.sensitivity_min, 1.48, 0.03);
                add.near(8, "local minimum near theta=0.4pi",
                         n * l2.sensitivity_min, 1.41, 0.03);
            }
        }
    }

    // 9: probe parity sensitivity
    {
        const double min_targets[3] = {2.0, 1.2, 1.1};
        const double win_targets[3] = {0.208, 0.056, 0.032};
        const int ns[3] = {1, 5, 10};
        for (int i = 0; i < 3; ++i) {
            const int n = ns[i];
            const ProtocolConfig cfg = strong_parity_config(n);
            const ParityAnalysis pa(cfg, ParityMode::probe);
            const double phi = phi_parameter(n, cfg.g_z, cfg.delta_a);
            double th0 = optimal_points_probe(n, phi).theta_opt;
            const double per = 2.0 * pi / n;
            th0 -= per * std::round(th0 / per);
            const auto m = pa.refine_minimum(th0 - 0.3 / n, th0 + 0.3 / n);
            add.near(9, "N|dtheta| minimum N=" + std::to_string(n),
                     n * m.sensitivity_min, min_targets[i], 0.02);
            const double w = pa.window_halfwidth(m.theta_opt) / pi;
            add.near(9,
                     "working-point window / pi N=" + std::to_string(n), w,
                     win_targets[i], 0.002);
        }
        double worst = 0.0;
        for (int n : {1, 5, 10})
            for (int i = 0; i <= 50; ++i) {
                const double th = -pi / 2 + pi * i / 50.0;
                worst = std::max(
                    worst,
                    std::abs(sensitivity_closed_probe(n, th, pi / 2, true) -
                             sensitivity_closed_probe(n, th, pi / 2,
                                                      false)));
            }
        add.ceiling(9, "t2=4t1 curve equals t2=0 at phi=pi/2", worst, 1e-8);
    }

    // 10: quantum Cramer-Rao consistency on the parity configurations
    {
        double margin = 1e300;
        for (int n : {1, 5, 10})
            for (auto mode : {ParityMode::ancilla, ParityMode::probe}) {
                ProtocolConfig cfg = strong_parity_config(n);
                if (mode == ParityMode::ancilla)
                    cfg.t2 = t2_time_reversal(cfg.t1, cfg.n2);
                const Circuit c(cfg);
                const auto rep = qfi_pure_exact(c, c.prepare_polarized(-1),
                                                c.qubit().plus);
                const double bound =
                    1.0 / std::sqrt(rep.f_total) - 1e-6;
                const ParityAnalysis pa(cfg, mode);
                for (int i = 0; i <= 80; ++i) {
                    const auto s = pa.sample(-pi / 2 + pi * i / 80.0);
                    if (!s.divergent)
                        margin = std::min(margin, s.sensitivity - bound);
                }
            }
        add.floor(10, "min sensitivity margin over the bound", margin, 0.0);
    }

    // 11: GHZ-likeness grows with N
    {
        double prev = -1.0, worst_step = 1e300;
        for (int n : {10, 20, 40, 80}) {
            const Circuit c(optimal_config(n));
            const auto branch =
                c.run_branch(c.prepare_polarized(-1), c.qubit().plus, +1);
            Vector probe = c.probe_component(branch.state, +1);
            probe /= probe.norm();
            const double f = c.ghz_fidelity(probe, 0.0, +1, true);
            if (prev >= 0.0) worst_step = std::min(worst_step, f - prev);
            prev = f;
        }
        add.floor(11, "min fidelity increment over N in {10,20,40,80}",
                  worst_step, 0.0);
    }

    // 12: deterministic serialization
    {
        ExperimentSpec spec;
        spec.kind = "sweep";
        spec.grids = {{"g_z", 0.3, 0.5, 3, false}};
        spec.workers = 1;
        const std::string a = run_sweep(spec).to_csv();
        spec.workers = 4;
        const std::string b = run_sweep(spec).to_csv();
        add.near(12, "byte-identical CSV across runs and worker counts",
                 (a == b) ? 1.0 : 0.0, 1.0, 0.0);
    }

    return results;
}

inline bool acceptance_pass(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

// pass/fail matrix as a ResultTable for the validate subcommand
inline ResultTable run_validate(const ExperimentSpec&) {
    const auto results = run_acceptance();
    ResultTable table;
    table.metadata = {"metrology validate",
                      "one row per acceptance sub-check"};
    for (size_t i = 0; i < results.size(); ++i)
        table.metadata.push_back("check " + std::to_string(i) + ": " +
                                 results[i].name);
    table.columns = {"criterion", "check", "measured", "target",
                     "tolerance", "pass"};
    for (size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        table.rows.push_back({double(r.criterion), double(i), r.measured,
                              r.target, r.tolerance, r.pass ? 1.0 : 0.0});
    }
    return table;
}

} // namespace metrology
