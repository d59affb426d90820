#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "crowdflow/config.hpp"
#include "crowdflow/grid.hpp"

namespace crowdflow {

namespace detail {

// 17 significant digits: enough for exact double round-trips, so output
// files can be diffed bit-for-bit across runs.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

}  // namespace detail

// Snapshot CSV: header x[,y],value[,value_y], one row per node, rows ordered
// lexicographically in (y, x).
inline void write_snapshot(const ScalarField& f, const std::string& path) {
    auto out = detail::open_out(path);
    const GridSpec& g = f.grid;
    out << (g.dim == 1 ? "x,value\n" : "x,y,value\n");
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            out << detail::fmt17(g.x(i));
            if (g.dim == 2) out << ',' << detail::fmt17(g.y(j));
            out << ',' << detail::fmt17(f[g.index(i, j)]) << '\n';
        }
    if (!out) throw IoError("short write to " + path);
}

inline void write_snapshot(const VectorField& f, const std::string& path) {
    auto out = detail::open_out(path);
    const GridSpec& g = f.grid;
    out << (g.dim == 1 ? "x,value\n" : "x,y,value,value_y\n");
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const int idx = g.index(i, j);
            out << detail::fmt17(g.x(i));
            if (g.dim == 2) out << ',' << detail::fmt17(g.y(j));
            out << ',' << detail::fmt17(f.comp[0][idx]);
            if (g.dim == 2) out << ',' << detail::fmt17(f.comp[1][idx]);
            out << '\n';
        }
    if (!out) throw IoError("short write to " + path);
}

// Reads a scalar snapshot back onto a known grid, checking node count and
// coordinates. Used for CSV initial densities and the standalone eikonal
// subcommand.
inline ScalarField read_scalar_csv(const std::string& path, const GridSpec& grid) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + " is empty");

    ScalarField f(grid);
    int row = 0;
    const double tol = 1e-9 * std::max(1.0, std::abs(grid.hi[0] - grid.lo[0]));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= grid.node_count())
            throw ConfigError(path + " has more rows than the configured grid has nodes");
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> cols;
        while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
        const size_t want = grid.dim == 1 ? 2 : 3;
        if (cols.size() != want)
            throw ConfigError(path + ": expected " + std::to_string(want) + " columns");
        const int i = row % grid.nx();
        const int j = row / grid.nx();
        if (std::abs(cols[0] - grid.x(i)) > tol ||
            (grid.dim == 2 && std::abs(cols[1] - grid.y(j)) > tol))
            throw ConfigError(path + ": row " + std::to_string(row) +
                              " coordinates do not match the configured grid");
        f[row] = cols[grid.dim == 1 ? 1 : 2];
        ++row;
    }
    if (row != grid.node_count())
        throw ConfigError(path + " has " + std::to_string(row) + " rows, grid needs " +
                          std::to_string(grid.node_count()));
    if (!f.all_finite()) throw NumericalError(path + " contains non-finite values");
    return f;
}

inline ScalarField initial_density(const Rho0Spec& spec, const GridSpec& grid) {
    switch (spec.kind) {
        case Rho0Spec::Kind::Constant:
            return ScalarField(grid, spec.value);
        case Rho0Spec::Kind::CosineBump:
            return ScalarField::from_function(grid, [&](double x, double y) {
                const double pi = 3.14159265358979323846;
                double xh = (2.0 * x - grid.lo[0] - grid.hi[0]) / (grid.hi[0] - grid.lo[0]);
                double v = spec.base + spec.amplitude * std::cos(pi * xh) *
                                           (grid.dim == 2
                                                ? std::cos(pi * (2.0 * y - grid.lo[1] - grid.hi[1]) /
                                                           (grid.hi[1] - grid.lo[1]))
                                                : 1.0);
                return v;
            });
        case Rho0Spec::Kind::Csv:
            return read_scalar_csv(spec.path, grid);
    }
    throw ConfigError("unhandled rho0 kind");
}

inline void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

inline void write_text_file(const std::string& path, const std::string& text) {
    auto out = detail::open_out(path);
    out << text;
    if (!out) throw IoError("short write to " + path);
}

// Compact, deterministic label for snapshot filenames.
inline std::string time_label(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", t);
    return buf;
}

}  // namespace crowdflow
