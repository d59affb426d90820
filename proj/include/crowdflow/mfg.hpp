#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "crowdflow/config.hpp"
#include "crowdflow/io.hpp"
#include "crowdflow/stencils.hpp"

namespace crowdflow {

// Nonlinear mobility F(rho) = rho f(rho)^2 and its derivative.
inline std::pair<double, double> F_mobility(double rho, double rho_max) {
    const double f = rho_max - rho;
    return {rho * f * f, f * f - 2.0 * rho * f};
}

// Mobility with the floor that keeps 1/F integrable at vacuum/saturation.
inline double F_mobility_floored(double rho, const ModelParams& p) {
    return std::max(F_mobility(rho, p.rho_max).first, p.eps_F);
}

// Momentum iterate plus the fields it induces. All series live on the same
// uniform time grid t_n = n*dt, n = 0..N.
struct ControlState {
    double dt = 0.0;
    std::vector<VectorField> m;
    std::vector<ScalarField> rho;
    std::vector<ScalarField> phi;  // adjoint value function, phi[N] == 0
    double cost = 0.0;
    double grad_norm = 0.0;
};

enum class Termination { Converged, MaxIter, LineSearchFailed };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::Converged: return "Converged";
        case Termination::MaxIter: return "MaxIter";
        case Termination::LineSearchFailed: return "LineSearchFailed";
    }
    return "?";
}

struct DescentReport {
    int iterations = 0;
    std::vector<double> cost_history;
    std::vector<double> grad_norm_history;
    std::vector<double> step_sizes;  // 0 marks the terminating entry
    Termination termination = Termination::MaxIter;
};

namespace detail {

inline double time_weight(int n, int n_last, double dt) {
    return (n == 0 || n == n_last) ? 0.5 * dt : dt;
}

inline FaceFluxes momentum_fluxes(const VectorField& m) {
    const GridSpec& g = m.grid;
    FaceFluxes adv(g);
    const int nx = g.nx(), ny = g.ny();
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i)
            adv.x[adv.xface(i, j)] = 0.5 * (m.comp[0][g.index(i, j)] + m.comp[0][g.index(i + 1, j)]);
    if (g.dim == 2)
        for (int j = 0; j + 1 < ny; ++j)
            for (int i = 0; i < nx; ++i)
                adv.y[adv.yface(i, j)] =
                    0.5 * (m.comp[1][g.index(i, j)] + m.comp[1][g.index(i, j + 1)]);
    return adv;
}

}  // namespace detail

// Forward Fokker-Planck march: rho_{n+1} = rho_n + dt*[-div(m_n) +
// nu*Lap(rho_n)], total outward flux 0 at walls and beta*rho at exits.
inline std::vector<ScalarField> fp_forward(const std::vector<VectorField>& m,
                                           const ScalarField& rho0, const BoundaryMap& bmap,
                                           const ModelParams& params) {
    ensure(!m.empty(), ErrorCategory::Config, "fp_forward needs at least one momentum level");
    const int n_steps = static_cast<int>(m.size()) - 1;
    std::vector<ScalarField> rho;
    rho.reserve(m.size());
    rho.push_back(rho0);
    for (int n = 0; n < n_steps; ++n) {
        FaceFluxes adv = detail::momentum_fluxes(m[n]);
        ScalarField next = explicit_flux_step(rho.back(), &adv, bmap, params.nu, params.dt);
        double mn = 0.0;
        int at = 0;
        for (int idx = 0; idx < next.grid.node_count(); ++idx) {
            if (!std::isfinite(next[idx]))
                throw NumericalError("fp_forward produced a non-finite density at step " +
                                     std::to_string(n + 1));
            if (next[idx] < mn) {
                mn = next[idx];
                at = idx;
            }
        }
        if (mn < -params.neg_tol)
            throw SolverError("fp_forward density went negative (" + std::to_string(mn) +
                              " at node " + std::to_string(at) + ", step " + std::to_string(n + 1) +
                              ")");
        rho.push_back(std::move(next));
    }
    return rho;
}

// Total cost: (1/2) iint |m|^2 / F_eps(rho) + (alpha/2) iint rho, trapezoid
// rule in both space and time.
inline double cost_functional(const std::vector<ScalarField>& rho,
                              const std::vector<VectorField>& m, const ModelParams& params) {
    ensure(rho.size() == m.size() && !rho.empty(), ErrorCategory::Config,
           "cost_functional needs matching rho/m series");
    const int n_last = static_cast<int>(rho.size()) - 1;
    const GridSpec& g = rho[0].grid;
    double total = 0.0;
    for (int n = 0; n <= n_last; ++n) {
        double slice = 0.0;
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const int idx = g.index(i, j);
                const double r = rho[n][idx];
                slice += g.weight(i, j) * (0.5 * m[n].norm_sq_at(idx) / F_mobility_floored(r, params) +
                                           0.5 * params.alpha * r);
            }
        total += detail::time_weight(n, n_last, params.dt) * slice;
    }
    return total;
}

namespace detail {

// Right-hand side weight of the backward equation,
// src = alpha/2 - (1/2)|m|^2 F'(rho)/F(rho)^2 (zero derivative inside the
// floored region).
inline ScalarField adjoint_source(const ScalarField& rho, const VectorField& m,
                                  const ModelParams& params) {
    ScalarField src(rho.grid, 0.5 * params.alpha);
    for (int idx = 0; idx < rho.grid.node_count(); ++idx) {
        auto [F, dF] = F_mobility(rho[idx], params.rho_max);
        if (F > params.eps_F) src[idx] -= 0.5 * m.norm_sq_at(idx) * dF / (F * F);
    }
    return src;
}

}  // namespace detail

// Backward adjoint march with terminal condition phi(T) = 0:
// phi_n = phi_{n+1} + dt*[nu*Lap(phi_{n+1}) - w_{n+1} src_{n+1}], wall
// closure dphi/dn = 0, exit closure nu*dphi/dn + beta*phi = 0 (or the
// literal beta*rho variant when configured). The source weight w matches
// the trapezoid rule of the cost (1/2 on the terminal slice, 1 inside);
// with that placement the march is the exact transpose of the forward
// scheme, so the descent gradient agrees with finite differences of the
// discrete cost to roundoff.
inline std::vector<ScalarField> adjoint_backward(const std::vector<ScalarField>& rho,
                                                 const std::vector<VectorField>& m,
                                                 const BoundaryMap& bmap,
                                                 const ModelParams& params) {
    ensure(rho.size() == m.size() && !rho.empty(), ErrorCategory::Config,
           "adjoint_backward needs matching rho/m series");
    const int n_last = static_cast<int>(rho.size()) - 1;
    const GridSpec& g = rho[0].grid;
    std::vector<ScalarField> phi(rho.size());
    phi[n_last] = ScalarField(g, 0.0);
    for (int n = n_last - 1; n >= 0; --n) {
        const ScalarField* exit_src =
            params.adjoint_exit_bc == AdjointExitBc::BetaRho ? &rho[n + 1] : nullptr;
        ScalarField next =
            explicit_flux_step(phi[n + 1], nullptr, bmap, params.nu, params.dt, exit_src);
        ScalarField src = detail::adjoint_source(rho[n + 1], m[n + 1], params);
        const double w = (n + 1 == n_last) ? 0.5 : 1.0;
        for (int idx = 0; idx < g.node_count(); ++idx) {
            next[idx] -= w * params.dt * src[idx];
            if (!std::isfinite(next[idx]))
                throw NumericalError("adjoint_backward produced a non-finite value at step " +
                                     std::to_string(n));
        }
        phi[n] = std::move(next);
    }
    return phi;
}

// Descent direction source: g_n = m_n / F_eps(rho_n) - c_n grad(phi_n).
// c_n = dt / wt_n undoes the trapezoid half-weight of the end slices
// (2 there, 1 inside); with it the series is the exact Riesz gradient of
// the discrete cost in the space-time inner product, so finite differences
// of cost_functional(fp_forward(.)) reproduce it to roundoff.
inline std::vector<VectorField> descent_gradient(const std::vector<VectorField>& m,
                                                 const std::vector<ScalarField>& rho,
                                                 const std::vector<ScalarField>& phi,
                                                 const ModelParams& params) {
    ensure(m.size() == rho.size() && m.size() == phi.size() && !m.empty(), ErrorCategory::Config,
           "descent_gradient needs matching series");
    const GridSpec& g = rho[0].grid;
    const int n_last = static_cast<int>(m.size()) - 1;
    std::vector<VectorField> grad;
    grad.reserve(m.size());
    for (int n = 0; n <= n_last; ++n) {
        const double c = params.dt / detail::time_weight(n, n_last, params.dt);
        VectorField gn = gradient_central(phi[n]);
        for (int a = 0; a < g.dim; ++a)
            for (int idx = 0; idx < g.node_count(); ++idx)
                gn.comp[a][idx] = m[n].comp[a][idx] / F_mobility_floored(rho[n][idx], params) -
                                  c * gn.comp[a][idx];
        grad.push_back(std::move(gn));
    }
    return grad;
}

// Discrete space-time L2 inner product (trapezoid weights in both axes),
// the metric behind grad_norm and the Armijo decrease test.
inline double spacetime_inner(const std::vector<VectorField>& a, const std::vector<VectorField>& b,
                              double dt) {
    const int n_last = static_cast<int>(a.size()) - 1;
    const GridSpec& g = a[0].grid;
    double total = 0.0;
    for (int n = 0; n <= n_last; ++n) {
        double slice = 0.0;
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const int idx = g.index(i, j);
                double dot = a[n].comp[0][idx] * b[n].comp[0][idx];
                if (g.dim == 2) dot += a[n].comp[1][idx] * b[n].comp[1][idx];
                slice += g.weight(i, j) * dot;
            }
        total += detail::time_weight(n, n_last, dt) * slice;
    }
    return total;
}

// Adjoint-based steepest descent on the momentum with Armijo backtracking.
// Solver failures on trial steps count as insufficient decrease; failures on
// the accepted path propagate.
inline std::pair<ControlState, DescentReport> steepest_descent(const GridSpec& grid,
                                                               const BoundaryMap& bmap,
                                                               const ModelParams& params,
                                                               const ScalarField& rho0) {
    params.validate(grid);
    const int n_steps = params.steps();
    ensure(n_steps >= 1, ErrorCategory::Config, "T/dt must give at least one step");

    ControlState state;
    state.dt = params.dt;
    state.m.assign(static_cast<size_t>(n_steps) + 1, VectorField(grid, 0.0));
    state.rho = fp_forward(state.m, rho0, bmap, params);
    state.cost = cost_functional(state.rho, state.m, params);

    DescentReport report;
    const double inf = std::numeric_limits<double>::infinity();

    while (true) {
        state.phi = adjoint_backward(state.rho, state.m, bmap, params);
        std::vector<VectorField> g = descent_gradient(state.m, state.rho, state.phi, params);
        const double gn2 = spacetime_inner(g, g, params.dt);
        state.grad_norm = std::sqrt(gn2);

        report.cost_history.push_back(state.cost);
        report.grad_norm_history.push_back(state.grad_norm);

        if (state.grad_norm <= params.tol_desc) {
            report.termination = Termination::Converged;
            report.step_sizes.push_back(0.0);
            break;
        }
        if (static_cast<int>(report.cost_history.size()) - 1 >= params.max_iter) {
            report.termination = Termination::MaxIter;
            report.step_sizes.push_back(0.0);
            break;
        }

        double tau = params.tau0;
        bool accepted = false;
        std::vector<VectorField> m_try;
        std::vector<ScalarField> rho_try;
        double cost_try = inf;
        while (tau >= params.tau_min) {
            m_try = state.m;
            for (size_t n = 0; n < m_try.size(); ++n)
                for (int a = 0; a < grid.dim; ++a)
                    for (int idx = 0; idx < grid.node_count(); ++idx)
                        m_try[n].comp[a][idx] -= tau * g[n].comp[a][idx];
            try {
                rho_try = fp_forward(m_try, rho0, bmap, params);
                cost_try = cost_functional(rho_try, m_try, params);
            } catch (const SolverError&) {
                cost_try = inf;
            } catch (const NumericalError&) {
                cost_try = inf;
            }
            if (cost_try < state.cost && cost_try <= state.cost - params.armijo_c * tau * gn2) {
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted) {
            report.termination = Termination::LineSearchFailed;
            report.step_sizes.push_back(0.0);
            break;
        }
        state.m = std::move(m_try);
        state.rho = std::move(rho_try);
        state.cost = cost_try;
        report.step_sizes.push_back(tau);
    }

    report.iterations = static_cast<int>(report.cost_history.size()) - 1;
    return {std::move(state), report};
}

inline std::pair<ControlState, DescentReport> steepest_descent(const SimConfig& cfg) {
    auto [grid, bmap] = make_grid(cfg);
    ModelParams params = params_for_mfg(cfg);
    ScalarField rho0 = initial_density(cfg.model.rho0, grid);
    return steepest_descent(grid, bmap, params, rho0);
}

}  // namespace crowdflow
