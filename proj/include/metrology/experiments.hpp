#pragma once

// Config-driven experiment runner: figure reproductions, generic parameter
// sweeps, deterministic CSV serialization, and a bounded worker pool with
// index-ordered collection so output is independent of the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "metrology/conditions.hpp"
#include "metrology/parity.hpp"
#include "metrology/qfi.hpp"

namespace metrology {

struct GridAxis {
    std::string name;
    double start = 0.0;
    double stop = 0.0;
    int count = 2;
    bool log_scale = false;

    std::vector<double> values() const {
        if (count < 2) throw std::invalid_argument("grid: count must be >= 2");
        if (log_scale && (start <= 0.0 || stop <= 0.0))
            throw std::invalid_argument("grid: log scale needs positive ends");
        std::vector<double> v(count);
        for (int i = 0; i < count; ++i) {
            const double f = double(i) / (count - 1);
            v[i] = log_scale
                       ? start * std::pow(stop / start, f)
                       : start + (stop - start) * f;
        }
        return v;
    }
};

struct ExperimentSpec {
    std::string kind;
    std::map<std::string, double> overrides;
    std::vector<GridAxis> grids;
    std::string output_path;
    int workers = 1;
};

struct ResultSection {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> metadata; // emitted as '# ...' header lines
    std::vector<ResultSection> sections;

    std::string to_csv() const;
};

inline std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

inline std::string ResultTable::to_csv() const {
    std::string out;
    for (const auto& line : metadata) out += "# " + line + "\n";
    auto emit = [&out](const std::vector<std::string>& cols,
                       const std::vector<std::vector<double>>& data) {
        std::string head;
        for (const auto& c : cols) {
            if (!head.empty()) head += ",";
            head += c;
        }
        out += head + "\n";
        for (const auto& row : data) {
            std::string line;
            for (double v : row) {
                if (!line.empty()) line += ",";
                line += format_value(v);
            }
            out += line + "\n";
        }
    };
    emit(columns, rows);
    for (const auto& s : sections) {
        out += "\n# section: " + s.name + "\n";
        emit(s.columns, s.rows);
    }
    return out;
}

inline std::string config_echo(const ProtocolConfig& c) {
    std::string out = "config:";
    auto kv = [&out](const char* k, double v) {
        out += std::string(" ") + k + "=" + format_value(v);
    };
    out += " N=" + std::to_string(c.N);
    kv("delta_a", c.delta_a);
    kv("omega_p", c.omega_p);
    kv("g", c.g);
    kv("g_z", c.g_z);
    kv("t1", c.t1);
    kv("t2", c.t2);
    kv("theta", c.theta);
    kv("delta", c.delta);
    out += " n1=" + std::to_string(c.n1) + " n_p=" + std::to_string(c.n_p) +
           " n_z=" + std::to_string(c.n_z) + " n2=" + std::to_string(c.n2) +
           " n3=" + std::to_string(c.n3);
    return out;
}

// set one config field by name; unknown keys are a config error
inline void apply_override(ProtocolConfig& cfg, const std::string& key,
                           double value) {
    auto as_int = [&](const char* name) {
        if (value != std::floor(value))
            throw std::invalid_argument(std::string("override ") + name +
                                        ": integer required");
        return static_cast<int>(value);
    };
    if (key == "N") cfg.N = as_int("N");
    else if (key == "delta_a") cfg.delta_a = value;
    else if (key == "omega_p") cfg.omega_p = value;
    else if (key == "g") cfg.g = value;
    else if (key == "g_z") cfg.g_z = value;
    else if (key == "t1") cfg.t1 = value;
    else if (key == "t2") cfg.t2 = value;
    else if (key == "theta") cfg.theta = value;
    else if (key == "delta") cfg.delta = value;
    else if (key == "n1") cfg.n1 = as_int("n1");
    else if (key == "n_p") cfg.n_p = as_int("n_p");
    else if (key == "n_z") cfg.n_z = as_int("n_z");
    else if (key == "n2") cfg.n2 = as_int("n2");
    else if (key == "n3") cfg.n3 = as_int("n3");
    else
        throw std::invalid_argument("unknown config key: " + key);
}

// bounded worker pool; workers only write their own index, so results are
// identical for any worker count
template <class Fn>
inline void parallel_map(int count, int workers, Fn&& fn) {
    workers = std::max(1, std::min(workers, count));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count;
                 i = next.fetch_add(1))
                fn(i);
        });
    for (auto& t : pool) t.join();
}

// quantized configuration in the strong-longitudinal regime where the
// closed-form parity results hold; odd-integer g_z keeps the N = 1 signal
// nondegenerate
inline ProtocolConfig strong_parity_config(int n, double gz_target = 25.0) {
    const double np1 = n + 1;
    const int nz = std::max(
        1, static_cast<int>(std::lround(
               (gz_target * np1 * np1 / 2.0 - n + 1.0) / 2.0)));
    return optimal_config(n, 1.0, 0, 10, nz);
}

namespace detail {

inline std::vector<int> log_int_grid(int lo, int hi, int count) {
    std::vector<int> out;
    for (int i = 0; i < count; ++i) {
        const double f = double(i) / (count - 1);
        const int n = static_cast<int>(
            std::lround(lo * std::pow(double(hi) / lo, f)));
        if (out.empty() || n > out.back()) out.push_back(n);
    }
    return out;
}

inline const GridAxis* find_grid(const ExperimentSpec& spec,
                                 const std::string& name) {
    for (const auto& g : spec.grids)
        if (g.name == name) return &g;
    return nullptr;
}

inline ProtocolConfig resolve_base(const ExperimentSpec& spec, int n) {
    if (auto it = spec.overrides.find("N"); it != spec.overrides.end())
        n = static_cast<int>(it->second);
    ProtocolConfig cfg = optimal_config(n);
    for (const auto& [k, v] : spec.overrides)
        if (k != "N") apply_override(cfg, k, v);
    cfg.validate();
    return cfg;
}

} // namespace detail

// thermal QFI vs N for several inverse temperatures
inline ResultTable run_fig2(const ExperimentSpec& spec) {
    const std::vector<double> betas = {2.0, 1.0, 0.1};
    std::vector<int> ns;
    if (const GridAxis* g = detail::find_grid(spec, "N"))
        ns = detail::log_int_grid(static_cast<int>(g->start),
                                  static_cast<int>(g->stop), g->count);
    else
        ns = detail::log_int_grid(2, 250, 25);

    ResultTable table;
    table.metadata = {"metrology fig2",
                      "rows: thermal-preparation QFI per (beta, N)"};
    table.columns = {"N",       "beta",          "qfi_numeric",
                     "qfi_closed_thermal", "qfi_polarized_closed",
                     "shot_noise_ref", "heisenberg_ref"};
    const int count = static_cast<int>(betas.size() * ns.size());
    table.rows.assign(count, {});
    parallel_map(count, spec.workers, [&](int i) {
        const double beta = betas[i / ns.size()];
        const int n = ns[i % ns.size()];
        ProtocolConfig cfg = optimal_config(n);
        table.rows[i] = {double(n),
                         beta,
                         qfi_thermal_exact(cfg, beta),
                         qfi_closed_thermal(n, beta),
                         qfi_closed_polarized(n),
                         double(n),
                         double(n) * n};
    });
    table.metadata.push_back(config_echo(optimal_config(ns.front())));
    return table;
}

// QFI vs encoding-axis deviation for polarized and thermal preparations
inline ResultTable run_fig3(const ExperimentSpec& spec) {
    const int n = 100;
    const double beta = 1.0;
    std::vector<double> deltas;
    if (const GridAxis* g = detail::find_grid(spec, "delta"))
        deltas = g->values();
    else
        deltas = GridAxis{"delta", -0.1, 0.1, 81, false}.values();
    const std::vector<int> nps = {10, 11};

    ResultTable table;
    table.metadata = {"metrology fig3",
                      "prep: 0 = polarized, 1 = thermal beta=1",
                      "qfi_over_N2_closed: deviation expansion for the "
                      "polarized rows, -1 otherwise",
                      config_echo(optimal_config(n))};
    table.columns = {"delta", "n_p", "prep", "qfi_over_N2_numeric",
                     "qfi_over_N2_closed"};
    const int nd = static_cast<int>(deltas.size());
    const int count = 2 * 2 * nd;
    table.rows.assign(count, {});
    parallel_map(count, spec.workers, [&](int i) {
        const int prep = i / (2 * nd);
        const int np = nps[(i / nd) % 2];
        const double dv = deltas[i % nd];
        ProtocolConfig cfg = optimal_config(n, 1.0, 0, np);
        cfg.delta = dv;
        double f;
        if (prep == 0) {
            f = qfi_polarized_exact(cfg).f_total;
        } else {
            f = qfi_thermal_exact(cfg, beta);
        }
        const double closed =
            prep == 0 ? qfi_closed_deviation(n, dv, np) / (double(n) * n)
                      : -1.0;
        table.rows[i] = {dv, double(np), double(prep),
                         f / (double(n) * n), closed};
    });
    return table;
}

// QFI over the (g, g_z) plane plus the constraint ridge
inline ResultTable run_fig4(const ExperimentSpec& spec) {
    const int n = 100;
    GridAxis ga{"g", 0.0, 0.5, 26, false};
    GridAxis gza{"g_z", 0.0, 0.5, 26, false};
    if (const GridAxis* g = detail::find_grid(spec, "g")) ga = *g;
    if (const GridAxis* g = detail::find_grid(spec, "g_z")) gza = *g;
    const auto gs = ga.values();
    const auto gzs = gza.values();

    ResultTable table;
    ProtocolConfig base = optimal_config(n);
    base.g = 0.0;
    base.g_z = 0.0;
    table.metadata = {"metrology fig4", config_echo(base)};
    table.columns = {"g", "g_z", "qfi_over_N2"};
    const int count = static_cast<int>(gs.size() * gzs.size());
    table.rows.assign(count, {});
    auto point = [&](double g, double gz) {
        ProtocolConfig cfg = base;
        cfg.g = g;
        cfg.g_z = gz;
        return qfi_polarized_exact(cfg).f_total / (double(n) * n);
    };
    parallel_map(count, spec.workers, [&](int i) {
        const double g = gs[i / gzs.size()];
        const double gz = gzs[i % gzs.size()];
        table.rows[i] = {g, gz, point(g, gz)};
    });

    ResultSection ridge;
    ridge.name = "ridge";
    ridge.columns = {"g", "g_z_ridge", "qfi_over_N2"};
    const double thresh = 2.0 / (n + 1.0);
    ridge.rows.assign(gs.size(), {});
    parallel_map(static_cast<int>(gs.size()), spec.workers, [&](int i) {
        const double g = gs[i];
        const double gz = std::hypot(g, thresh);
        ridge.rows[i] = {g, gz, point(g, gz)};
    });
    table.sections.push_back(std::move(ridge));
    return table;
}

namespace detail {

inline void parity_rows(const ParityAnalysis& pa, int n, double mode_tag,
                        const std::vector<double>& thetas, int workers,
                        std::vector<std::vector<double>>& rows,
                        ResultSection& minima) {
    const int base = static_cast<int>(rows.size());
    rows.resize(base + thetas.size());
    parallel_map(static_cast<int>(thetas.size()), workers, [&](int i) {
        const auto s = pa.sample(thetas[i]);
        rows[base + i] = {double(n), s.theta, s.signal,
                          s.divergent ? sensitivity_sentinel
                                      : n * s.sensitivity,
                          mode_tag};
    });
    const auto curve =
        pa.scan(thetas.front(), thetas.back(),
                static_cast<int>(thetas.size()));
    for (const auto& m : curve.minima)
        minima.rows.push_back(
            {double(n), mode_tag, m.theta_opt, n * m.sensitivity_min});
}

} // namespace detail

// ancilla-parity sensitivity curves, t2 = 3 t1
inline ResultTable run_fig5(const ExperimentSpec& spec) {
    std::vector<double> thetas;
    if (const GridAxis* g = detail::find_grid(spec, "theta"))
        thetas = g->values();
    else
        thetas = GridAxis{"theta", -pi / 2, pi / 2, 201, false}.values();

    ResultTable table;
    table.metadata = {"metrology fig5",
                      "ancilla parity, time-reversal second stage",
                      "sensitivity sentinel: -1 marks a divergent sample"};
    table.columns = {"N", "theta", "signal", "sensitivity_times_N", "mode"};
    ResultSection minima{"minima",
                         {"N", "mode", "theta_opt", "sensitivity_times_N"},
                         {}};
    for (int n : {1, 5, 10}) {
        ProtocolConfig cfg = strong_parity_config(n);
        cfg.t2 = t2_time_reversal(cfg.t1, cfg.n2);
        table.metadata.push_back(config_echo(cfg));
        ParityAnalysis pa(cfg, ParityMode::ancilla);
        detail::parity_rows(pa, n, 0.0, thetas, spec.workers, table.rows,
                            minima);
    }
    table.sections.push_back(std::move(minima));
    return table;
}

// probe-parity sensitivity curves: t2 = 0, t2 = 4 t1, and the half-step
// g_z variant that interleaves the working points
inline ResultTable run_fig6(const ExperimentSpec& spec) {
    std::vector<double> thetas;
    if (const GridAxis* g = detail::find_grid(spec, "theta"))
        thetas = g->values();
    else
        thetas = GridAxis{"theta", -pi / 2, pi / 2, 201, false}.values();

    ResultTable table;
    table.metadata = {
        "metrology fig6",
        "probe parity; mode 0: t2=0, mode 1: t2=4t1, mode 2: t2=0 with "
        "g_z shifted by half a quantization step",
        "sensitivity sentinel: -1 marks a divergent sample"};
    table.columns = {"N", "theta", "signal", "sensitivity_times_N", "mode"};
    ResultSection minima{"minima",
                         {"N", "mode", "theta_opt", "sensitivity_times_N"},
                         {}};
    for (int n : {1, 5, 10}) {
        ProtocolConfig cfg = strong_parity_config(n);
        table.metadata.push_back(config_echo(cfg));
        ParityAnalysis p0(cfg, ParityMode::probe);
        detail::parity_rows(p0, n, 0.0, thetas, spec.workers, table.rows,
                            minima);
        ProtocolConfig rev = cfg;
        rev.t2 = t2_identity(cfg.t1, cfg.n3);
        ParityAnalysis p1(rev, ParityMode::probe);
        detail::parity_rows(p1, n, 1.0, thetas, spec.workers, table.rows,
                            minima);
        ProtocolConfig shifted = cfg;
        shifted.g_z += 2.0 * cfg.delta_a / ((n + 1.0) * (n + 1.0));
        shifted.g = coupling_from_gz(n, shifted.delta_a, shifted.g_z);
        ParityAnalysis p2(shifted, ParityMode::probe);
        detail::parity_rows(p2, n, 2.0, thetas, spec.workers, table.rows,
                            minima);
    }
    table.sections.push_back(std::move(minima));
    return table;
}

// generic sweep: one or two grid axes over config fields, branch QFI per
// grid point
inline ResultTable run_sweep(const ExperimentSpec& spec) {
    if (spec.grids.empty() || spec.grids.size() > 2)
        throw std::invalid_argument("sweep: one or two grid axes required");
    const ProtocolConfig base = detail::resolve_base(spec, 10);
    std::vector<std::vector<double>> axes;
    for (const auto& g : spec.grids) axes.push_back(g.values());

    ResultTable table;
    table.metadata = {"metrology sweep", config_echo(base)};
    for (const auto& g : spec.grids) table.columns.push_back(g.name);
    table.columns.insert(table.columns.end(),
                         {"f_plus", "f_minus", "f_total"});
    const int inner =
        axes.size() == 2 ? static_cast<int>(axes[1].size()) : 1;
    const int count = static_cast<int>(axes[0].size()) * inner;
    table.rows.assign(count, {});
    parallel_map(count, spec.workers, [&](int i) {
        ProtocolConfig cfg = base;
        std::vector<double> row;
        apply_override(cfg, spec.grids[0].name, axes[0][i / inner]);
        row.push_back(axes[0][i / inner]);
        if (axes.size() == 2) {
            apply_override(cfg, spec.grids[1].name, axes[1][i % inner]);
            row.push_back(axes[1][i % inner]);
        }
        cfg.validate();
        const auto rep = qfi_polarized_exact(cfg);
        row.insert(row.end(), {rep.f_plus, rep.f_minus, rep.f_total});
        table.rows[i] = std::move(row);
    });
    return table;
}

} // namespace metrology
