#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "crowdflow/eikonal.hpp"
#include "crowdflow/validate.hpp"

using namespace crowdflow;

TEST_CASE("godunov local updates") {
    // 1D: min neighbor plus h*s.
    CHECK(eikonal_local_update(0.3, 0.1, 1.5) == Catch::Approx(0.45).margin(1e-15));
    // 2D two-sided quadratic with a = b = 0.
    CHECK(eikonal_local_update(0.0, 0.0, 0.1, 1.0) ==
          Catch::Approx(std::sqrt(0.02) / 2.0).margin(1e-12));
    // A sentinel-large side degenerates to the one-sided update.
    CHECK(eikonal_local_update(0.0, 1e10, 0.1, 1.0) == Catch::Approx(0.1).margin(1e-15));
}

TEST_CASE("1D corridor solves match the weighted distance") {
    Geometry geom;
    auto [grid, bmap] = build_grid(geom, 1.0);
    ModelParams p;

    SECTION("rho = 1/3: phi = (3/2)(1-|x|)") {
        ScalarField rho(grid, 1.0 / 3.0);
        EikonalSolution sol = solve_eikonal(rho, bmap, p);
        double err = 0.0;
        for (int i = 0; i < grid.nx(); ++i)
            err = std::max(err, std::abs(sol.phi[i] - 1.5 * (1.0 - std::abs(grid.x(i)))));
        CHECK(err <= 2.0 * grid.h);
        CHECK(sol.phi[100] == Catch::Approx(1.5).margin(1e-12));
        CHECK(sol.phi[0] == 0.0);
        CHECK(sol.phi[200] == 0.0);
        // Constant slowness in 1D reaches the fixed point in one pass; the
        // second pass only certifies it.
        CHECK(sol.iterations == 2);
        CHECK(sol.residual == 0.0);
    }

    SECTION("rho = 0: plain distance to the exits") {
        ScalarField rho(grid, 0.0);
        EikonalSolution sol = solve_eikonal(rho, bmap, p);
        for (int i = 0; i < grid.nx(); ++i)
            CHECK(sol.phi[i] ==
                  Catch::Approx(1.0 - std::abs(grid.x(i))).margin(2.0 * grid.h));
    }
}

TEST_CASE("2D empty density vs grid-graph oracle") {
    CheckResult r = check_eikonal_2d_oracle(21);
    INFO(r.detail);
    CHECK(r.pass);
}

TEST_CASE("monotone in density on random small grids") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> dist(0.0, 0.45);
    ModelParams p;
    for (int trial = 0; trial < 5; ++trial) {
        Geometry geom;
        geom.dim = 2;
        geom.nodes = {9, 9};
        geom.exits = {{1, 1}, {-1, -1}};
        geom.exit_width = 0.5;
        auto [grid, bmap] = build_grid(geom, 1.0);
        ScalarField r1(grid), r2(grid);
        for (int idx = 0; idx < grid.node_count(); ++idx) {
            r1[idx] = dist(rng);
            r2[idx] = r1[idx] + dist(rng);  // r2 >= r1, still below rho_max
        }
        ScalarField p1 = solve_eikonal(r1, bmap, p).phi;
        ScalarField p2 = solve_eikonal(r2, bmap, p).phi;
        for (int idx = 0; idx < grid.node_count(); ++idx)
            CHECK(p1[idx] <= p2[idx] + 1e-12);
    }
}

TEST_CASE("causality: non-exit values exceed their smallest neighbor") {
    Geometry geom;
    geom.dim = 2;
    geom.nodes = {15, 15};
    geom.exits = {{-1, -1}};
    geom.exit_width = 0.3;
    auto [grid, bmap] = build_grid(geom, 1.0);
    ModelParams p;
    ScalarField rho = ScalarField::from_function(
        grid, [](double x, double y) { return 0.2 + 0.1 * std::sin(3 * x) * std::cos(2 * y); });
    ScalarField phi = solve_eikonal(rho, bmap, p).phi;
    for (int j = 0; j < grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i) {
            const int idx = grid.index(i, j);
            if (bmap.is_exit(idx)) continue;
            double best = 1e300;
            if (i > 0) best = std::min(best, phi[grid.index(i - 1, j)]);
            if (i < grid.nx() - 1) best = std::min(best, phi[grid.index(i + 1, j)]);
            if (j > 0) best = std::min(best, phi[grid.index(i, j - 1)]);
            if (j < grid.ny() - 1) best = std::min(best, phi[grid.index(i, j + 1)]);
            CHECK(phi[idx] > best);
        }
}

TEST_CASE("mirror-symmetric data gives mirror-symmetric potential") {
    Geometry geom;
    auto [grid, bmap] = build_grid(geom, 1.0);
    ModelParams p;
    ScalarField rho = ScalarField::from_function(
        grid, [](double x, double) { return 0.3 + 0.05 * std::cos(4.0 * x); });
    ScalarField phi = solve_eikonal(rho, bmap, p).phi;
    for (int i = 0; i < grid.nx(); ++i)
        CHECK(phi[i] == Catch::Approx(phi[grid.nx() - 1 - i]).margin(1e-12));
}

TEST_CASE("solver error paths") {
    Geometry closed;
    closed.exits.clear();
    auto [grid, bmap] = build_grid(closed, 0.0);
    ModelParams p;
    ScalarField rho(grid, 0.0);
    CHECK_THROWS_AS(solve_eikonal(rho, bmap, p), ConfigError);

    Geometry corner;
    corner.dim = 2;
    corner.nodes = {15, 15};
    corner.exits = {{1, 1}};
    auto [g2, b2] = build_grid(corner, 1.0);
    ModelParams tight;
    tight.max_sweeps = 1;  // first pass cannot certify convergence
    ScalarField rho2(g2, 0.0);
    CHECK_THROWS_AS(solve_eikonal(rho2, b2, tight), SolverError);
}
