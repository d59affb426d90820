#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "crowdflow/config.hpp"
#include "crowdflow/eikonal.hpp"
#include "crowdflow/io.hpp"
#include "crowdflow/stencils.hpp"

namespace crowdflow {

// Density-dependent speed weighting f(rho) = rho_max - rho.
inline double f_mobility(double rho, double rho_max) { return rho_max - rho; }

// Time-ordered field snapshots plus the per-step mass record of a run.
struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;  // snapshot instants (subset of step times)
    std::vector<ScalarField> rho_snapshots;
    std::vector<ScalarField> phi_snapshots;
    std::vector<double> mass_series;  // one entry per time level, starting at t=0
};

namespace detail {

// Physical advective face fluxes -rho f(rho)^2 dPhi/dx with arithmetic-mean
// face densities and one-cell Phi differences (the conservative FTCS form).
inline FaceFluxes hughes_fluxes(const ScalarField& rho, const ScalarField& phi,
                                const ModelParams& p) {
    const GridSpec& g = rho.grid;
    FaceFluxes adv(g);
    const int nx = g.nx(), ny = g.ny();
    const double h = g.h;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            const double rbar = 0.5 * (rho[g.index(i, j)] + rho[g.index(i + 1, j)]);
            const double fr = f_mobility(rbar, p.rho_max);
            adv.x[adv.xface(i, j)] =
                -rbar * fr * fr * (phi[g.index(i + 1, j)] - phi[g.index(i, j)]) / h;
        }
    if (g.dim == 2)
        for (int j = 0; j + 1 < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const double rbar = 0.5 * (rho[g.index(i, j)] + rho[g.index(i, j + 1)]);
                const double fr = f_mobility(rbar, p.rho_max);
                adv.y[adv.yface(i, j)] =
                    -rbar * fr * fr * (phi[g.index(i, j + 1)] - phi[g.index(i, j)]) / h;
            }
    return adv;
}

inline void check_density(const ScalarField& rho, double neg_tol, const char* who) {
    double mn = rho[0];
    int at = 0;
    for (int idx = 0; idx < rho.grid.node_count(); ++idx) {
        if (!std::isfinite(rho[idx]))
            throw NumericalError(std::string(who) + " produced a non-finite density at node " +
                                 std::to_string(idx));
        if (rho[idx] < mn) {
            mn = rho[idx];
            at = idx;
        }
    }
    if (mn < -neg_tol)
        throw SolverError(std::string(who) + " density went negative (" + std::to_string(mn) +
                          " at node " + std::to_string(at) + ")");
}

// Maps requested snapshot instants to step indices (nearest step, t=0 always
// included first).
inline std::vector<int> snapshot_steps(const std::vector<double>& times, double dt, int n_steps) {
    std::set<int> steps{0};
    for (double t : times) {
        int k = static_cast<int>(std::llround(t / dt));
        steps.insert(std::clamp(k, 0, n_steps));
    }
    return {steps.begin(), steps.end()};
}

}  // namespace detail

// One FTCS update of the conservation law: rho + dt*[div(rho f^2 grad Phi)
// + nu*Lap(rho)], boundary closure: zero total outward flux at walls,
// beta*rho at exits.
inline ScalarField hughes_step(const ScalarField& rho, const ScalarField& phi,
                               const BoundaryMap& bmap, const ModelParams& params) {
    FaceFluxes adv = detail::hughes_fluxes(rho, phi, params);
    ScalarField next = explicit_flux_step(rho, &adv, bmap, params.nu, params.dt);
    detail::check_density(next, params.neg_tol, "hughes_step");
    return next;
}

// Full Hughes march: every step re-solves the Eikonal equation for the
// current density, then advances the conservation law.
inline Trajectory run_hughes(const GridSpec& grid, const BoundaryMap& bmap,
                             const ModelParams& params, const ScalarField& rho0,
                             const std::vector<double>& snapshot_times) {
    params.validate(grid);
    const int n_steps = params.steps();
    const std::vector<int> snaps = detail::snapshot_steps(snapshot_times, params.dt, n_steps);

    Trajectory traj;
    traj.dt = params.dt;
    traj.mass_series.reserve(n_steps + 1);

    ScalarField rho = rho0;
    size_t next_snap = 0;
    for (int n = 0; n <= n_steps; ++n) {
        traj.mass_series.push_back(trapezoid_integral(rho));
        const bool want_snap = next_snap < snaps.size() && snaps[next_snap] == n;
        if (!want_snap && n == n_steps) break;
        try {
            EikonalSolution eik = solve_eikonal(rho, bmap, params);
            if (want_snap) {
                traj.times.push_back(n * params.dt);
                traj.rho_snapshots.push_back(rho);
                traj.phi_snapshots.push_back(eik.phi);
                ++next_snap;
            }
            if (n < n_steps) rho = hughes_step(rho, eik.phi, bmap, params);
        } catch (const Error& e) {
            throw Error(e.category(),
                        std::string(e.what()) + " (hughes step " + std::to_string(n) + ")");
        }
    }
    return traj;
}

inline Trajectory run_hughes(const SimConfig& cfg) {
    auto [grid, bmap] = make_grid(cfg);
    ModelParams params = params_for_hughes(cfg);
    ScalarField rho0 = initial_density(cfg.model.rho0, grid);
    return run_hughes(grid, bmap, params, rho0, cfg.numerics.snapshot_times);
}

}  // namespace crowdflow
