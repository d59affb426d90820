#pragma once

#include <cmath>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "crowdflow/analysis.hpp"
#include "crowdflow/eikonal.hpp"
#include "crowdflow/hughes.hpp"
#include "crowdflow/mfg.hpp"

namespace crowdflow {

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double bound = 0.0;
    std::string detail;
};

// Multi-source shortest path on the 4-neighbor grid graph with edge weight
// h*(s_u+s_v)/2; an eikonal oracle independent of the sweeping solver.
inline std::vector<double> grid_graph_distance(const GridSpec& g, const BoundaryMap& bmap,
                                               const std::vector<double>& slowness) {
    const int n = g.node_count();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (int idx = 0; idx < n; ++idx)
        if (bmap.is_exit(idx)) {
            dist[idx] = 0.0;
            heap.push({0.0, idx});
        }
    auto relax = [&](int from, int to) {
        const double w = 0.5 * g.h * (slowness[from] + slowness[to]);
        if (dist[from] + w < dist[to]) {
            dist[to] = dist[from] + w;
            heap.push({dist[to], to});
        }
    };
    while (!heap.empty()) {
        auto [d, idx] = heap.top();
        heap.pop();
        if (d > dist[idx]) continue;
        const int i = idx % g.nx(), j = idx / g.nx();
        if (i > 0) relax(idx, g.index(i - 1, j));
        if (i < g.nx() - 1) relax(idx, g.index(i + 1, j));
        if (g.dim == 2 && j > 0) relax(idx, g.index(i, j - 1));
        if (g.dim == 2 && j < g.ny() - 1) relax(idx, g.index(i, j + 1));
    }
    return dist;
}

// 1D corridor with rho = 1/3: the potential is (3/2)(1 - |x|) exactly.
inline CheckResult check_eikonal_1d_analytic() {
    Geometry geom;  // defaults: [-1,1], 201 nodes, exits at both ends
    auto [grid, bmap] = build_grid(geom, 1.0);
    ModelParams p;
    ScalarField rho(grid, 1.0 / 3.0);
    EikonalSolution sol = solve_eikonal(rho, bmap, p);
    double err = 0.0;
    for (int i = 0; i < grid.nx(); ++i)
        err = std::max(err, std::abs(sol.phi[i] - 1.5 * (1.0 - std::abs(grid.x(i)))));
    return {"eikonal_1d_analytic", err <= 2.0 * grid.h, err, 2.0 * grid.h,
            "max |phi - 1.5(1-|x|)| on the 1D corridor"};
}

// 2D empty-density solve with the whole boundary as exit, against Dijkstra.
inline CheckResult check_eikonal_2d_oracle(int nodes_per_axis = 101) {
    GridSpec grid = GridSpec::rectangle(-1, 1, nodes_per_axis, -1, 1, nodes_per_axis);
    BoundaryMap bmap;
    bmap.beta = 1.0;
    bmap.label.assign(static_cast<size_t>(grid.node_count()), NodeLabel::Interior);
    for (int j = 0; j < grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i)
            if (grid.on_boundary(i, j)) bmap.label[grid.index(i, j)] = NodeLabel::Exit;
    ModelParams p;
    ScalarField rho(grid, 0.0);
    EikonalSolution sol = solve_eikonal(rho, bmap, p);
    std::vector<double> slow(static_cast<size_t>(grid.node_count()), 1.0);
    std::vector<double> oracle = grid_graph_distance(grid, bmap, slow);
    double err = 0.0;
    for (int idx = 0; idx < grid.node_count(); ++idx)
        err = std::max(err, std::abs(sol.phi[idx] - oracle[idx]));
    return {"eikonal_2d_graph_oracle", err <= 2.0 * grid.h, err, 2.0 * grid.h,
            "max |phi - shortest path| with full-boundary exits"};
}

// Forward solver against the separated heat-equation solution
// 1/3 + 0.1 exp(-nu pi^2 t) cos(pi x) on a closed (all-wall) corridor.
inline CheckResult check_heat_decay() {
    Geometry geom;
    geom.exits.clear();
    auto [grid, bmap] = build_grid(geom, 0.0);
    ModelParams p;
    p.beta = 0.0;
    p.dt = 1e-3;
    p.T = 1.0;
    const double pi = 3.14159265358979323846;
    ScalarField rho0 = ScalarField::from_function(
        grid, [&](double x, double) { return 1.0 / 3.0 + 0.1 * std::cos(pi * x); });
    const int n_steps = p.steps();
    std::vector<VectorField> m(static_cast<size_t>(n_steps) + 1, VectorField(grid, 0.0));
    std::vector<ScalarField> rho = fp_forward(m, rho0, bmap, p);
    const double decay = std::exp(-p.nu * pi * pi * p.T);
    double err = 0.0;
    for (int i = 0; i < grid.nx(); ++i)
        err = std::max(err, std::abs(rho.back()[i] -
                                     (1.0 / 3.0 + 0.1 * decay * std::cos(pi * grid.x(i)))));
    return {"heat_decay_oracle", err <= 5e-3, err, 5e-3,
            "max error vs analytic cosine decay at t = 1"};
}

// Componentwise central finite differences of cost_functional(fp_forward(m))
// against the adjoint descent gradient, on a small randomized instance.
inline CheckResult check_adjoint_gradient(unsigned seed = 7) {
    Geometry geom;
    geom.nodes = {11, 1};
    auto gb = build_grid(geom, 1.0);
    const GridSpec& grid = gb.first;
    const BoundaryMap& bmap = gb.second;

    ModelParams p;
    p.dt = 1e-3;
    p.T = 0.01;  // 10 steps
    const int n_steps = p.steps();

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    std::vector<VectorField> m(static_cast<size_t>(n_steps) + 1, VectorField(grid, 0.0));
    for (auto& level : m)
        for (auto& v : level.comp[0]) v = dist(rng);

    ScalarField rho0(grid, 1.0 / 3.0);
    auto cost_of = [&](const std::vector<VectorField>& mm) {
        return cost_functional(fp_forward(mm, rho0, bmap, p), mm, p);
    };

    std::vector<ScalarField> rho = fp_forward(m, rho0, bmap, p);
    std::vector<ScalarField> phi = adjoint_backward(rho, m, bmap, p);
    std::vector<VectorField> g = descent_gradient(m, rho, phi, p);

    const double eps = 1e-5;
    double num = 0.0, den = 0.0;
    for (int n = 0; n <= n_steps; ++n) {
        const double wt = detail::time_weight(n, n_steps, p.dt);
        for (int i = 0; i < grid.node_count(); ++i) {
            std::vector<VectorField> mp = m, mm2 = m;
            mp[n].comp[0][i] += eps;
            mm2[n].comp[0][i] -= eps;
            const double fd = (cost_of(mp) - cost_of(mm2)) / (2.0 * eps);
            const double fd_riesz = fd / (wt * grid.weight(i, 0));
            const double w = wt * grid.weight(i, 0);
            num += w * (g[n].comp[0][i] - fd_riesz) * (g[n].comp[0][i] - fd_riesz);
            den += w * fd_riesz * fd_riesz;
        }
    }
    const double rel = std::sqrt(num / den);
    return {"adjoint_gradient_check", rel <= 1e-4, rel, 1e-4,
            "relative L2 error vs central finite differences"};
}

// Wiring check of the limit relation at rho = 1/3 (coefficient vanishes).
inline CheckResult check_limit_residual_spot() {
    GridSpec grid = GridSpec::line(-1.0, 1.0, 21);
    ModelParams p;
    ScalarField rho(grid, 1.0 / 3.0);
    ScalarField phi = ScalarField::from_function(grid, [](double x, double) { return x * x; });
    ScalarField res = limit_residual(rho, phi, p);
    double err = 0.0;
    for (int i = 1; i + 1 < grid.nx(); ++i) err = std::max(err, std::abs(res[i] + 1.5));
    return {"limit_residual_spot", err <= 1e-12, err, 1e-12,
            "residual at rho = 1/3 equals -3/2 at interior nodes"};
}

namespace detail {

// Per-step mass identity |M_{n+1} - M_n + dt * sum_exits beta rho ell| with
// ell = h^(d-1); returns the worst step.
template <class StepFn>
double worst_mass_balance(ScalarField rho, const BoundaryMap& bmap, const ModelParams& p,
                          int steps, StepFn step) {
    const GridSpec& g = rho.grid;
    const double ell = g.dim == 1 ? 1.0 : g.h;
    double worst = 0.0;
    double mass = trapezoid_integral(rho);
    for (int n = 0; n < steps; ++n) {
        double outflow = 0.0;
        for (int idx = 0; idx < g.node_count(); ++idx)
            if (bmap.is_exit(idx)) outflow += bmap.beta * rho[idx] * ell;
        rho = step(rho);
        const double mass_next = trapezoid_integral(rho);
        worst = std::max(worst, std::abs(mass_next - mass + p.dt * outflow));
        mass = mass_next;
    }
    return worst;
}

}  // namespace detail

inline CheckResult check_mass_balance_hughes(int steps = 1000) {
    Geometry geom;
    auto [grid, bmap] = build_grid(geom, 1.0);
    ModelParams p;
    ScalarField rho0(grid, 1.0 / 3.0);
    auto& bm = bmap;
    auto& pp = p;
    double worst = detail::worst_mass_balance(rho0, bmap, p, steps, [&](const ScalarField& r) {
        EikonalSolution eik = solve_eikonal(r, bm, pp);
        return hughes_step(r, eik.phi, bm, pp);
    });
    return {"mass_balance_hughes", worst <= 1e-12, worst, 1e-12,
            "per-step |dM + dt*sum beta*rho*ell| over the reference corridor"};
}

inline CheckResult check_mass_balance_fp(int steps = 1000) {
    Geometry geom;
    auto [grid, bmap] = build_grid(geom, 1.0);
    ModelParams p;
    p.dt = 1e-3;
    ScalarField rho0(grid, 1.0 / 3.0);
    VectorField zero_m(grid, 0.0);
    auto& bm = bmap;
    auto& pp = p;
    FaceFluxes adv = detail::momentum_fluxes(zero_m);
    double worst = detail::worst_mass_balance(rho0, bmap, p, steps, [&](const ScalarField& r) {
        return explicit_flux_step(r, &adv, bm, pp.nu, pp.dt);
    });
    return {"mass_balance_fp", worst <= 1e-12, worst, 1e-12,
            "per-step |dM + dt*sum beta*rho*ell| for the zero-momentum march"};
}

inline CheckResult check_mass_constant_closed(int steps = 1000) {
    Geometry geom;
    geom.exits.clear();
    auto [grid, bmap] = build_grid(geom, 0.0);
    ModelParams p;
    p.beta = 0.0;
    ScalarField rho = ScalarField::from_function(
        grid, [](double x, double) { return 1.0 / 3.0 + 0.1 * std::cos(3.14159265358979 * x); });
    const double m0 = trapezoid_integral(rho);
    ScalarField phi(grid, 0.0);  // closed domain: no exits, no potential drive
    double worst = 0.0;
    for (int n = 0; n < steps; ++n) {
        rho = hughes_step(rho, phi, bmap, p);
        worst = std::max(worst, std::abs(trapezoid_integral(rho) - m0));
    }
    return {"mass_constant_closed", worst <= 1e-10, worst, 1e-10,
            "mass drift of the closed (beta = 0) corridor"};
}

inline CheckResult check_mass_constant_closed_fp(int steps = 1000) {
    Geometry geom;
    geom.exits.clear();
    auto [grid, bmap] = build_grid(geom, 0.0);
    ModelParams p;
    p.beta = 0.0;
    p.dt = 1e-3;
    ScalarField rho0 = ScalarField::from_function(
        grid, [](double x, double) { return 1.0 / 3.0 + 0.1 * std::cos(3.14159265358979 * x); });
    std::vector<VectorField> m(static_cast<size_t>(steps) + 1, VectorField(grid, 0.0));
    std::vector<ScalarField> rho = fp_forward(m, rho0, bmap, p);
    const double m0 = trapezoid_integral(rho[0]);
    double worst = 0.0;
    for (const auto& r : rho) worst = std::max(worst, std::abs(trapezoid_integral(r) - m0));
    return {"mass_constant_closed_fp", worst <= 1e-10, worst, 1e-10,
            "mass drift of the closed (beta = 0) zero-momentum march"};
}

inline std::vector<CheckResult> run_validation_suite() {
    std::vector<CheckResult> out;
    out.push_back(check_eikonal_1d_analytic());
    out.push_back(check_eikonal_2d_oracle());
    out.push_back(check_heat_decay());
    out.push_back(check_adjoint_gradient());
    out.push_back(check_limit_residual_spot());
    out.push_back(check_mass_balance_hughes());
    out.push_back(check_mass_balance_fp());
    out.push_back(check_mass_constant_closed());
    out.push_back(check_mass_constant_closed_fp());
    return out;
}

}  // namespace crowdflow
