#pragma once

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crowdflow/analysis.hpp"
#include "crowdflow/config.hpp"
#include "crowdflow/eikonal.hpp"
#include "crowdflow/hughes.hpp"
#include "crowdflow/io.hpp"
#include "crowdflow/mfg.hpp"
#include "crowdflow/validate.hpp"

namespace crowdflow {

inline int exit_code(ErrorCategory cat) {
    switch (cat) {
        case ErrorCategory::Usage: return 2;
        case ErrorCategory::Parse: return 3;
        case ErrorCategory::Config: return 4;
        case ErrorCategory::Io: return 5;
        case ErrorCategory::Solver: return 6;
        case ErrorCategory::Numerical: return 7;
    }
    return 1;
}

namespace detail {

inline SimConfig load_config(const std::string& config_path,
                             const std::vector<std::string>& overrides,
                             const std::string& out_dir) {
    json doc = config_path.empty() ? json::object() : load_json_file(config_path);
    for (const auto& ov : overrides) apply_override(doc, ov);
    SimConfig cfg = config_from_json(doc);
    if (!out_dir.empty()) cfg.output.directory = out_dir;
    return cfg;
}

inline bool wants_field(const SimConfig& cfg, const std::string& name) {
    for (const auto& f : cfg.output.fields)
        if (f == name) return true;
    return false;
}

inline void write_hughes_outputs(const SimConfig& cfg, const Trajectory& traj,
                                 const std::string& dir) {
    ensure_directory(dir);
    for (size_t k = 0; k < traj.times.size(); ++k) {
        const std::string tag = time_label(traj.times[k]);
        if (wants_field(cfg, "rho"))
            write_snapshot(traj.rho_snapshots[k], dir + "/rho_t" + tag + ".csv");
        if (wants_field(cfg, "phi"))
            write_snapshot(traj.phi_snapshots[k], dir + "/phi_t" + tag + ".csv");
    }
    json metrics;
    metrics["model"] = "hughes";
    metrics["dt"] = traj.dt;
    metrics["snapshot_times"] = traj.times;
    metrics["mass_series"] = traj.mass_series;
    write_text_file(dir + "/metrics.json", metrics.dump(2) + "\n");
}

inline void write_mfg_outputs(const SimConfig& cfg, const ControlState& state,
                              const DescentReport& report, const std::string& dir) {
    ensure_directory(dir);
    const int n_last = static_cast<int>(state.rho.size()) - 1;
    std::vector<double> written_times;
    for (double t : cfg.numerics.snapshot_times) {
        const int k = std::clamp(static_cast<int>(std::llround(t / state.dt)), 0, n_last);
        const double tk = k * state.dt;
        if (!written_times.empty() && written_times.back() == tk) continue;
        written_times.push_back(tk);
        const std::string tag = time_label(tk);
        if (wants_field(cfg, "rho")) write_snapshot(state.rho[k], dir + "/rho_t" + tag + ".csv");
        if (wants_field(cfg, "phi")) write_snapshot(state.phi[k], dir + "/phi_t" + tag + ".csv");
        if (wants_field(cfg, "m")) write_snapshot(state.m[k], dir + "/m_t" + tag + ".csv");
    }
    std::vector<double> mass;
    mass.reserve(state.rho.size());
    for (const auto& r : state.rho) mass.push_back(total_mass(r));

    json metrics;
    metrics["model"] = "mfg";
    metrics["dt"] = state.dt;
    metrics["snapshot_times"] = written_times;
    metrics["cost"] = state.cost;
    metrics["grad_norm"] = state.grad_norm;
    metrics["iterations"] = report.iterations;
    metrics["termination"] = to_string(report.termination);
    metrics["cost_history"] = report.cost_history;
    metrics["grad_norm_history"] = report.grad_norm_history;
    metrics["step_sizes"] = report.step_sizes;
    metrics["mass_series"] = mass;
    write_text_file(dir + "/metrics.json", metrics.dump(2) + "\n");
}

// Plain gnuplot script that redraws the comparison panels from the CSVs.
inline std::string figures_script(const SimConfig& cfg, const std::vector<double>& times) {
    std::ostringstream os;
    os << "# gnuplot script: density/potential evolution for both models.\n"
       << "# Run from the output directory: gnuplot figures.gp\n"
       << "set datafile separator ','\n"
       << "set key top right\n"
       << "set terminal pngcairo size 1200,900\n";
    const bool two_d = cfg.geometry.dim == 2;
    const char* using_clause = two_d ? "1:3" : "1:2";
    os << "set output 'fig_density.png'\n"
       << "set multiplot layout 2,1 title 'Density evolution'\n";
    for (const char* model : {"hughes", "mfg"}) {
        os << "set title '" << model << "'\nplot ";
        for (size_t k = 0; k < times.size(); ++k) {
            if (k) os << ", ";
            std::string tag = time_label(times[k]);
            os << "'" << model << "/rho_t" << tag << ".csv' every ::1 using " << using_clause
               << " with lines title 't=" << tag << "'";
        }
        os << "\n";
    }
    os << "unset multiplot\n"
       << "set output 'fig_potential.png'\n"
       << "set multiplot layout 2,1 title 'Potential evolution'\n";
    for (const char* model : {"hughes", "mfg"}) {
        os << "set title '" << model << "'\nplot ";
        for (size_t k = 0; k < times.size(); ++k) {
            if (k) os << ", ";
            std::string tag = time_label(times[k]);
            os << "'" << model << "/phi_t" << tag << ".csv' every ::1 using " << using_clause
               << " with lines title 't=" << tag << "'";
        }
        os << "\n";
    }
    os << "unset multiplot\n";
    if (two_d)
        os << "# 2D runs: the y=0 center-line slices are tabulated in report.json\n"
           << "# (centerline_hughes / centerline_mfg).\n";
    return os.str();
}

inline int cmd_hughes(const SimConfig& cfg) {
    Trajectory traj = run_hughes(cfg);
    write_hughes_outputs(cfg, traj, cfg.output.directory + "/hughes");
    std::cout << "hughes: " << traj.times.size() << " snapshots, final mass "
              << traj.mass_series.back() << "\n";
    return 0;
}

inline int cmd_mfg(const SimConfig& cfg) {
    auto [state, report] = steepest_descent(cfg);
    write_mfg_outputs(cfg, state, report, cfg.output.directory + "/mfg");
    std::cout << "mfg: " << to_string(report.termination) << " after " << report.iterations
              << " iterations, cost " << state.cost << ", grad_norm " << state.grad_norm << "\n";
    return 0;
}

inline int cmd_compare(const SimConfig& cfg) {
    Trajectory traj = run_hughes(cfg);
    write_hughes_outputs(cfg, traj, cfg.output.directory + "/hughes");
    auto [state, report] = steepest_descent(cfg);
    write_mfg_outputs(cfg, state, report, cfg.output.directory + "/mfg");
    ComparisonReport rep = compare_models(traj, state, params_for_mfg(cfg));
    write_text_file(cfg.output.directory + "/report.json", to_json(rep).dump(2) + "\n");
    write_text_file(cfg.output.directory + "/figures.gp", figures_script(cfg, traj.times));
    std::cout << "compare: report.json and figures.gp written to " << cfg.output.directory << "\n";
    return 0;
}

inline int cmd_eikonal(const SimConfig& cfg, const std::string& rho_csv) {
    auto [grid, bmap] = make_grid(cfg);
    ScalarField rho = rho_csv.empty() ? initial_density(cfg.model.rho0, grid)
                                      : read_scalar_csv(rho_csv, grid);
    EikonalSolution sol = solve_eikonal(rho, bmap, params_for_hughes(cfg));
    ensure_directory(cfg.output.directory);
    write_snapshot(sol.phi, cfg.output.directory + "/phi.csv");
    std::cout << "eikonal: converged in " << sol.iterations << " passes, residual "
              << sol.residual << "\n";
    return 0;
}

inline int cmd_validate() {
    std::vector<CheckResult> results = run_validation_suite();
    bool all = true;
    for (const auto& r : results) {
        all = all && r.pass;
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << " ("
                  << r.measured << " vs bound " << r.bound << ")\n";
    }
    return all ? 0 : exit_code(ErrorCategory::Solver);
}

}  // namespace detail

// Entry point shared by the binary and the tests. Exit codes: 0 success,
// 2 usage, 3 parse, 4 config, 5 io, 6 solver, 7 numerical.
inline int run_command(const std::vector<std::string>& args) {
    CLI::App app{
        "crowdflow: macroscopic pedestrian-evacuation solvers\n"
        "Exit codes: 0 ok, 2 usage, 3 parse, 4 config, 5 io, 6 solver, 7 numerical."};
    app.require_subcommand(1);

    std::string config_path, out_dir, rho_csv;
    std::vector<std::string> overrides;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (defaults reproduce the 1D corridor run)");
        sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
        sub->add_option("--override", overrides,
                        "config override section.key=value (repeatable)");
    };

    CLI::App* hughes = app.add_subcommand("hughes", "run the Hughes model");
    add_common(hughes);
    CLI::App* mfg = app.add_subcommand("mfg", "run the mean-field-game descent solver");
    add_common(mfg);
    CLI::App* compare = app.add_subcommand("compare", "run both models and compare");
    add_common(compare);
    CLI::App* eikonal = app.add_subcommand("eikonal", "standalone eikonal solve");
    add_common(eikonal);
    eikonal->add_option("--rho", rho_csv, "density snapshot CSV (defaults to the config rho0)");
    app.add_subcommand("validate", "run the built-in oracle checks");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help() << std::flush;
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "crowdflow: " << e.what() << "\n";
        return exit_code(ErrorCategory::Usage);
    }

    try {
        if (app.got_subcommand("validate")) return detail::cmd_validate();
        SimConfig cfg = detail::load_config(config_path, overrides, out_dir);
        if (app.got_subcommand("hughes")) return detail::cmd_hughes(cfg);
        if (app.got_subcommand("mfg")) return detail::cmd_mfg(cfg);
        if (app.got_subcommand("compare")) return detail::cmd_compare(cfg);
        if (app.got_subcommand("eikonal")) return detail::cmd_eikonal(cfg, rho_csv);
        std::cerr << "crowdflow: no subcommand\n";
        return exit_code(ErrorCategory::Usage);
    } catch (const Error& e) {
        std::cerr << "crowdflow: " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "crowdflow: internal error: " << e.what() << "\n";
        return 1;
    }
}

inline int run_command(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_command(args);
}

}  // namespace crowdflow
