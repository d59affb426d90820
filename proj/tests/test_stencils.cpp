#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <random>

#include "crowdflow/grid.hpp"
#include "crowdflow/stencils.hpp"

using namespace crowdflow;

TEST_CASE("central gradient on linear and quadratic fields") {
    // Three nodes, h = 0.5: gradient at the center of [0, 0.5, 1.0] is 1.
    GridSpec g3 = GridSpec::line(0.0, 1.0, 3);
    ScalarField f3(g3);
    f3.values = {0.0, 0.5, 1.0};
    VectorField grad3 = gradient_central(f3);
    CHECK(grad3.comp[0][1] == Catch::Approx(1.0).margin(1e-15));

    // Quadratic: central stencil is exact at interior nodes.
    GridSpec g = GridSpec::line(-1.0, 1.0, 21);
    ScalarField fq = ScalarField::from_function(g, [](double x, double) { return x * x; });
    VectorField gq = gradient_central(fq);
    for (int i = 1; i + 1 < g.nx(); ++i)
        CHECK(gq.comp[0][i] == Catch::Approx(2.0 * g.x(i)).margin(1e-12));

    // Linear 2D field: gradient (3, -2) everywhere, one-sided ends included.
    GridSpec g2 = GridSpec::rectangle(-1.0, 1.0, 11, -1.0, 1.0, 11);
    ScalarField fl =
        ScalarField::from_function(g2, [](double x, double y) { return 3.0 * x - 2.0 * y; });
    VectorField gl = gradient_central(fl);
    for (int idx = 0; idx < g2.node_count(); ++idx) {
        CHECK(gl.comp[0][idx] == Catch::Approx(3.0).margin(1e-12));
        CHECK(gl.comp[1][idx] == Catch::Approx(-2.0).margin(1e-12));
    }
}

TEST_CASE("laplacian with flux closure") {
    Geometry geom;
    geom.nodes = {21, 1};
    auto [g, bmap] = build_grid(geom, 1.0);

    SECTION("constants with zero flux are discretely harmonic") {
        ScalarField f(g, 3.25);
        ScalarField lap = laplacian_bc(f, bmap, FluxBC::zero(g, 0.01));
        for (int i = 0; i < g.nx(); ++i) CHECK(lap[i] == Catch::Approx(0.0).margin(1e-12));
    }

    SECTION("quadratics are exact at interior nodes") {
        GridSpec gq = GridSpec::line(-1.0, 1.0, 21);
        ScalarField f = ScalarField::from_function(gq, [](double x, double) { return x * x; });
        Geometry gm;
        gm.nodes = {21, 1};
        auto [g2, b2] = build_grid(gm, 1.0);
        ScalarField lap = laplacian_bc(f, b2, FluxBC::zero(g2, 0.01));
        for (int i = 1; i + 1 < g2.nx(); ++i) CHECK(lap[i] == Catch::Approx(2.0).margin(1e-12));
    }

    SECTION("exit ghost value: hand evaluation and mass balance") {
        Geometry corridor;  // 201 nodes, h = 0.01
        auto [gp, bp] = build_grid(corridor, 1.0);
        const double nu = 0.01;
        ScalarField f(gp, 1.0 / 3.0);
        FluxBC bc = FluxBC::robin_outflow(f, bp, nu);
        ScalarField lap = laplacian_bc(f, bp, bc);

        // Uniform field: interior Laplacian is 0, the exit node carries the
        // ghost outflow term -2q/(nu h) with q = beta*rho = 1/3.
        const double expected = -2.0 * (1.0 / 3.0) / (nu * gp.h);
        CHECK(lap[0] == Catch::Approx(expected).epsilon(1e-12));
        CHECK(lap[200] == Catch::Approx(expected).epsilon(1e-12));
        for (int i = 1; i < 200; ++i) CHECK(lap[i] == Catch::Approx(0.0).margin(1e-12));

        // Discrete mass balance: nu * sum_i w_i lap_i = -sum_exits q.
        double acc = 0.0;
        for (int i = 0; i < gp.nx(); ++i) acc += gp.weight(i, 0) * lap[i];
        CHECK(nu * acc == Catch::Approx(-2.0 / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("stencils commute with mirror reflection") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);

    GridSpec g = GridSpec::line(-1.0, 1.0, 33);
    ScalarField f(g);
    for (auto& v : f.values) v = dist(rng);
    ScalarField fr(g);
    for (int i = 0; i < g.nx(); ++i) fr[i] = f[g.nx() - 1 - i];

    VectorField gf = gradient_central(f);
    VectorField gfr = gradient_central(fr);
    for (int i = 0; i < g.nx(); ++i)
        CHECK(std::abs(gfr.comp[0][i] + gf.comp[0][g.nx() - 1 - i]) <= 1e-15);

    Geometry geom;
    geom.nodes = {33, 1};
    auto [g2, bmap] = build_grid(geom, 1.0);
    ScalarField lf = laplacian_bc(f, bmap, FluxBC::zero(g2, 0.01));
    ScalarField lfr = laplacian_bc(fr, bmap, FluxBC::zero(g2, 0.01));
    for (int i = 0; i < g.nx(); ++i)
        CHECK(std::abs(lfr[i] - lf[g.nx() - 1 - i]) <= 1e-15);
}

TEST_CASE("zero-flux laplacian conserves the discrete integral") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(0.0, 1.0);

    Geometry geom;
    geom.dim = 2;
    geom.nodes = {13, 13};
    geom.exits = {{1, 1}};
    auto [g, bmap] = build_grid(geom, 1.0);
    ScalarField f(g);
    for (auto& v : f.values) v = dist(rng);
    ScalarField lap = laplacian_bc(f, bmap, FluxBC::zero(g, 0.01));
    double acc = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) acc += g.weight(i, j) * lap[g.index(i, j)];
    CHECK(acc == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("explicit step is bitwise identical for any thread count") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(0.0, 0.5);

    Geometry geom;
    geom.dim = 2;
    geom.nodes = {31, 31};
    geom.exits = {{1, 1}, {-1, -1}};
    auto [g, bmap] = build_grid(geom, 1.0);
    ScalarField rho(g);
    for (auto& v : rho.values) v = dist(rng);
    FaceFluxes adv(g);
    for (auto& v : adv.x) v = dist(rng) - 0.25;
    for (auto& v : adv.y) v = dist(rng) - 0.25;

    setenv("CROWDFLOW_THREADS", "1", 1);
    ScalarField one = explicit_flux_step(rho, &adv, bmap, 0.01, 1e-4);
    setenv("CROWDFLOW_THREADS", "4", 1);
    ScalarField four = explicit_flux_step(rho, &adv, bmap, 0.01, 1e-4);
    setenv("CROWDFLOW_THREADS", "1", 1);
    REQUIRE(one.values == four.values);
}
