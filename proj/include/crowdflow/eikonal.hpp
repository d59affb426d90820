#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "crowdflow/grid.hpp"
#include "crowdflow/params.hpp"

namespace crowdflow {

// Potential solve result: weighted travel cost to the exits, plus sweep
// bookkeeping. phi is 0 exactly on exit nodes and nonnegative everywhere.
struct EikonalSolution {
    ScalarField phi;
    int iterations = 0;   // full passes (each pass runs all 2^d sweep orderings)
    double residual = 0;  // max node change in the final pass
};

constexpr double kEikonalSentinel = 1e10;

// Godunov upwind update in 1D: a is the smaller upwind neighbor value.
inline double eikonal_local_update(double a, double h, double s) { return a + h * s; }

// Godunov upwind update in 2D from the two axis minima. Falls back to the
// one-sided update when the axes differ by at least h*s (which is how
// sentinel-large wall/unreached neighbors are absorbed).
inline double eikonal_local_update(double a, double b, double h, double s) {
    if (a > b) std::swap(a, b);
    const double hs = h * s;
    if (b - a >= hs) return a + hs;
    const double d = a - b;
    return 0.5 * (a + b + std::sqrt(2.0 * hs * hs - d * d));
}

// Slowness 1/f(rho) with the regularization floor that keeps the equation
// solvable as rho approaches rho_max.
inline double slowness(double rho, const ModelParams& p) {
    return 1.0 / std::max(p.rho_max - rho, p.eps_f);
}

// Fast sweeping for |grad phi| = 1/f(rho): Gauss-Seidel passes over all 2^d
// axis orderings with monotone (min) Godunov updates, phi fixed at 0 on
// exits and initialized sentinel-large elsewhere. Wall boundary nodes are
// never pinned; they take one-sided updates from inward neighbors, which is
// what "phi = infinity on walls" means discretely: no path leaves there.
inline EikonalSolution solve_eikonal(const ScalarField& rho, const BoundaryMap& bmap,
                                     const ModelParams& params) {
    const GridSpec& g = rho.grid;
    if (bmap.exit_count() == 0) throw ConfigError("eikonal solve requires a nonempty exit set");

    const int nx = g.nx(), ny = g.ny();
    const double h = g.h;

    std::vector<double> slow(static_cast<size_t>(g.node_count()));
    for (int idx = 0; idx < g.node_count(); ++idx) slow[idx] = slowness(rho[idx], params);

    EikonalSolution sol;
    sol.phi = ScalarField(g, kEikonalSentinel);
    for (int idx = 0; idx < g.node_count(); ++idx)
        if (bmap.is_exit(idx)) sol.phi[idx] = 0.0;

    auto& phi = sol.phi.values;

    auto update_node = [&](int i, int j) -> double {
        const int idx = g.index(i, j);
        if (bmap.is_exit(idx)) return 0.0;
        double ax = kEikonalSentinel;
        if (i > 0) ax = phi[g.index(i - 1, j)];
        if (i < nx - 1) ax = std::min(ax, phi[g.index(i + 1, j)]);
        double cand;
        if (g.dim == 1) {
            cand = eikonal_local_update(ax, h, slow[idx]);
        } else {
            double ay = kEikonalSentinel;
            if (j > 0) ay = phi[g.index(i, j - 1)];
            if (j < ny - 1) ay = std::min(ay, phi[g.index(i, j + 1)]);
            cand = eikonal_local_update(ax, ay, h, slow[idx]);
        }
        const double old = phi[idx];
        if (cand < old) {
            phi[idx] = cand;
            return old - cand;
        }
        return 0.0;
    };

    for (int pass = 1; pass <= params.max_sweeps; ++pass) {
        double change = 0.0;
        if (g.dim == 1) {
            for (int i = 0; i < nx; ++i) change = std::max(change, update_node(i, 0));
            for (int i = nx - 1; i >= 0; --i) change = std::max(change, update_node(i, 0));
        } else {
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) change = std::max(change, update_node(i, j));
            for (int j = 0; j < ny; ++j)
                for (int i = nx - 1; i >= 0; --i) change = std::max(change, update_node(i, j));
            for (int j = ny - 1; j >= 0; --j)
                for (int i = 0; i < nx; ++i) change = std::max(change, update_node(i, j));
            for (int j = ny - 1; j >= 0; --j)
                for (int i = nx - 1; i >= 0; --i) change = std::max(change, update_node(i, j));
        }
        sol.iterations = pass;
        sol.residual = change;
        if (change <= params.tol_eik) return sol;
    }
    throw SolverError("eikonal fast sweeping did not converge in " +
                      std::to_string(params.max_sweeps) +
                      " passes, last residual = " + std::to_string(sol.residual));
}

}  // namespace crowdflow
