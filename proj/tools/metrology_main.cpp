// Command-line front end: figure reproductions, generic sweeps, and the
// validation matrix, all emitted as deterministic CSV.
//
// Exit codes: 0 success, 1 validation failure, 2 configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "metrology/acceptance.hpp"
#include "metrology/experiments.hpp"

namespace {

using metrology::ExperimentSpec;
using metrology::GridAxis;

// "start,stop,count[,log]" -> grid axis
GridAxis parse_grid(const std::string& name, const std::string& value) {
    GridAxis axis;
    axis.name = name;
    std::stringstream ss(value);
    std::string tok;
    std::vector<std::string> parts;
    while (std::getline(ss, tok, ',')) parts.push_back(tok);
    if (parts.size() != 3 && parts.size() != 4)
        throw std::invalid_argument("grid " + name +
                                    ": expected start,stop,count[,log]");
    axis.start = std::stod(parts[0]);
    axis.stop = std::stod(parts[1]);
    axis.count = std::stoi(parts[2]);
    if (parts.size() == 4) {
        if (parts[3] != "log" && parts[3] != "linear")
            throw std::invalid_argument("grid " + name +
                                        ": scale must be linear or log");
        axis.log_scale = parts[3] == "log";
    }
    return axis;
}

void apply_entry(ExperimentSpec& spec, const std::string& key,
                 const std::string& value) {
    if (key.rfind("grid.", 0) == 0) {
        const std::string name = key.substr(5);
        for (auto& g : spec.grids)
            if (g.name == name) {
                g = parse_grid(name, value);
                return;
            }
        spec.grids.push_back(parse_grid(name, value));
        return;
    }
    metrology::ProtocolConfig scratch; // reject unknown keys up front
    metrology::apply_override(scratch, key, std::stod(value));
    spec.overrides[key] = std::stod(value);
}

void load_config_file(ExperimentSpec& spec, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" +
                                        std::to_string(lineno) +
                                        ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string()
                                          : s.substr(b, e - b + 1);
        };
        apply_entry(spec, trim(line.substr(0, eq)),
                    trim(line.substr(eq + 1)));
    }
}

int emit(const metrology::ResultTable& table, const std::string& out_path) {
    const std::string csv = table.to_csv();
    if (out_path.empty()) {
        std::fwrite(csv.data(), 1, csv.size(), stdout);
        return 0;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot open output path: " << out_path << "\n";
        return 2;
    }
    out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"measurement-based Heisenberg-scaling metrology simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    std::string out_path;
    int workers = 1;
    app.add_option("--config", config_path, "flat key=value config file");
    app.add_option("--set", sets, "override key=value (repeatable)");
    app.add_option("--out", out_path, "output CSV path (default stdout)");
    app.add_option("--workers", workers, "worker thread count")
        ->check(CLI::PositiveNumber);

    for (const char* kind :
         {"fig2", "fig3", "fig4", "fig5", "fig6", "sweep", "validate"})
        app.add_subcommand(kind)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    ExperimentSpec spec;
    spec.kind = app.get_subcommands().front()->get_name();
    spec.output_path = out_path;
    spec.workers = workers;
    try {
        if (!config_path.empty()) load_config_file(spec, config_path);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("--set expects key=value: " + s);
            apply_entry(spec, s.substr(0, eq), s.substr(eq + 1));
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        metrology::ResultTable table;
        bool validated_ok = true;
        if (spec.kind == "fig2") table = metrology::run_fig2(spec);
        else if (spec.kind == "fig3") table = metrology::run_fig3(spec);
        else if (spec.kind == "fig4") table = metrology::run_fig4(spec);
        else if (spec.kind == "fig5") table = metrology::run_fig5(spec);
        else if (spec.kind == "fig6") table = metrology::run_fig6(spec);
        else if (spec.kind == "sweep") table = metrology::run_sweep(spec);
        else {
            table = metrology::run_validate(spec);
            for (const auto& row : table.rows)
                validated_ok = validated_ok && row.back() == 1.0;
        }
        const int rc = emit(table, spec.output_path);
        if (rc != 0) return rc;
        return validated_ok ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
