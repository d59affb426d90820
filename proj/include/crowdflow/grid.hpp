#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "crowdflow/errors.hpp"

namespace crowdflow {

// Uniform node-centered Cartesian grid on a segment (1D) or rectangle (2D).
// Nodes include the boundary; spacing h is identical on both axes in 2D.
struct GridSpec {
    int dim = 1;
    std::array<double, 2> lo{-1.0, 0.0};
    std::array<double, 2> hi{1.0, 0.0};
    std::array<int, 2> n{2, 1};  // nodes per axis; n[1] == 1 in 1D
    double h = 1.0;

    static GridSpec line(double lo, double hi, int nodes) {
        ensure(nodes >= 3, ErrorCategory::Config, "grid needs at least 3 nodes per axis");
        ensure(hi > lo, ErrorCategory::Config, "grid extent must be nonempty");
        GridSpec g;
        g.dim = 1;
        g.lo = {lo, 0.0};
        g.hi = {hi, 0.0};
        g.n = {nodes, 1};
        g.h = (hi - lo) / (nodes - 1);
        return g;
    }

    static GridSpec rectangle(double lox, double hix, int nx, double loy, double hiy, int ny) {
        ensure(nx >= 3 && ny >= 3, ErrorCategory::Config, "grid needs at least 3 nodes per axis");
        ensure(hix > lox && hiy > loy, ErrorCategory::Config, "grid extent must be nonempty");
        GridSpec g;
        g.dim = 2;
        g.lo = {lox, loy};
        g.hi = {hix, hiy};
        g.n = {nx, ny};
        g.h = (hix - lox) / (nx - 1);
        double hy = (hiy - loy) / (ny - 1);
        ensure(std::abs(g.h - hy) <= 1e-12 * std::max(std::abs(g.h), std::abs(hy)),
               ErrorCategory::Config, "2D spacing must be identical on both axes");
        return g;
    }

    int nx() const { return n[0]; }
    int ny() const { return n[1]; }
    int node_count() const { return n[0] * n[1]; }

    int index(int i, int j = 0) const { return j * n[0] + i; }

    double x(int i) const { return lo[0] + i * h; }
    double y(int j) const { return dim == 2 ? lo[1] + j * h : 0.0; }

    bool on_boundary(int i, int j = 0) const {
        if (i == 0 || i == n[0] - 1) return true;
        return dim == 2 && (j == 0 || j == n[1] - 1);
    }

    // Trapezoid quadrature weight of a node (h/2 at axis ends, h inside,
    // product over axes in 2D).
    double weight(int i, int j = 0) const {
        double w = (i == 0 || i == n[0] - 1) ? 0.5 * h : h;
        if (dim == 2) w *= (j == 0 || j == n[1] - 1) ? 0.5 * h : h;
        return w;
    }

    bool operator==(const GridSpec& o) const {
        return dim == o.dim && lo == o.lo && hi == o.hi && n == o.n;
    }
};

enum class NodeLabel : std::uint8_t { Interior, Wall, Exit };

// Boundary classification: every boundary node is a Wall or an Exit,
// interior nodes carry no label. beta is the exit outflow rate.
struct BoundaryMap {
    std::vector<NodeLabel> label;
    double beta = 1.0;

    NodeLabel at(int idx) const { return label[idx]; }
    bool is_exit(int idx) const { return label[idx] == NodeLabel::Exit; }
    bool is_wall(int idx) const { return label[idx] == NodeLabel::Wall; }

    int exit_count() const {
        int c = 0;
        for (auto l : label)
            if (l == NodeLabel::Exit) ++c;
        return c;
    }
};

// Real-valued field sampled at every grid node.
struct ScalarField {
    GridSpec grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g, double fill = 0.0)
        : grid(g), values(static_cast<size_t>(g.node_count()), fill) {}

    double& operator[](int idx) { return values[idx]; }
    double operator[](int idx) const { return values[idx]; }
    double& at(int i, int j) { return values[grid.index(i, j)]; }
    double at(int i, int j) const { return values[grid.index(i, j)]; }

    template <class Fn>
    static ScalarField from_function(const GridSpec& g, Fn f) {
        ScalarField out(g);
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i)
                out.values[g.index(i, j)] = (g.dim == 1) ? f(g.x(i), 0.0) : f(g.x(i), g.y(j));
        return out;
    }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

// d-component vector field (momentum, gradients), one plane per component.
struct VectorField {
    GridSpec grid;
    std::array<std::vector<double>, 2> comp;

    VectorField() = default;
    explicit VectorField(const GridSpec& g, double fill = 0.0) : grid(g) {
        comp[0].assign(static_cast<size_t>(g.node_count()), fill);
        if (g.dim == 2) comp[1].assign(static_cast<size_t>(g.node_count()), fill);
    }

    std::vector<double>& component(int axis) { return comp[axis]; }
    const std::vector<double>& component(int axis) const { return comp[axis]; }

    double norm_sq_at(int idx) const {
        double s = comp[0][idx] * comp[0][idx];
        if (grid.dim == 2) s += comp[1][idx] * comp[1][idx];
        return s;
    }

    bool all_finite() const {
        for (int a = 0; a < grid.dim; ++a)
            for (double v : comp[a])
                if (!std::isfinite(v)) return false;
        return true;
    }
};

// Trapezoid-rule integral over the domain, the quadrature used everywhere.
inline double trapezoid_integral(const ScalarField& f) {
    const GridSpec& g = f.grid;
    double acc = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) acc += g.weight(i, j) * f[g.index(i, j)];
    return acc;
}

// Geometry section of a simulation config (see config.hpp for parsing).
// 1D exits are endpoint coordinates; 2D exits are corner coordinates and
// extend an arc of width exit_width centered at the corner.
struct Geometry {
    int dim = 1;
    std::array<std::array<double, 2>, 2> extents{{{-1.0, 1.0}, {-1.0, 1.0}}};
    std::array<int, 2> nodes{201, 201};
    std::vector<std::array<double, 2>> exits{{{-1.0, 0.0}}, {{1.0, 0.0}}};
    double exit_width = 0.2;

    bool operator==(const Geometry&) const = default;
};

namespace detail {

inline bool close(double a, double b, double scale) {
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(scale));
}

}  // namespace detail

// Builds the grid and its boundary classification. 1D exits sit at the
// listed endpoints; 2D exits cover boundary nodes within arc distance
// exit_width/2 of each listed corner. Walls are every other boundary node.
inline std::pair<GridSpec, BoundaryMap> build_grid(const Geometry& geom, double beta) {
    ensure(geom.dim == 1 || geom.dim == 2, ErrorCategory::Config, "dim must be 1 or 2");
    GridSpec grid = (geom.dim == 1)
                        ? GridSpec::line(geom.extents[0][0], geom.extents[0][1], geom.nodes[0])
                        : GridSpec::rectangle(geom.extents[0][0], geom.extents[0][1], geom.nodes[0],
                                              geom.extents[1][0], geom.extents[1][1], geom.nodes[1]);

    if (geom.exits.empty() && beta > 0.0)
        throw ConfigError("no exits requested but beta > 0; outflow has nowhere to leave");

    BoundaryMap bmap;
    bmap.beta = beta;
    bmap.label.assign(static_cast<size_t>(grid.node_count()), NodeLabel::Interior);

    if (geom.dim == 1) {
        bmap.label[0] = NodeLabel::Wall;
        bmap.label[grid.nx() - 1] = NodeLabel::Wall;
        for (const auto& e : geom.exits) {
            if (detail::close(e[0], grid.lo[0], grid.hi[0] - grid.lo[0]))
                bmap.label[0] = NodeLabel::Exit;
            else if (detail::close(e[0], grid.hi[0], grid.hi[0] - grid.lo[0]))
                bmap.label[grid.nx() - 1] = NodeLabel::Exit;
            else
                throw ConfigError("1D exit must sit at a domain endpoint, got x=" +
                                  std::to_string(e[0]));
        }
        return {grid, bmap};
    }

    const double side = std::min(grid.hi[0] - grid.lo[0], grid.hi[1] - grid.lo[1]);
    ensure(geom.exits.empty() || geom.exit_width > 0.0, ErrorCategory::Config,
           "exit_width must be positive");
    if (geom.exit_width > side)
        throw ConfigError("exit_width " + std::to_string(geom.exit_width) +
                          " exceeds the shortest side " + std::to_string(side));

    const int nx = grid.nx(), ny = grid.ny();
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            if (grid.on_boundary(i, j)) bmap.label[grid.index(i, j)] = NodeLabel::Wall;

    // Exit arcs: nodes within kmax grid steps of the corner along either
    // incident edge, kmax = floor(w / 2h) computed in index space to keep
    // the cutoff exact on node coordinates.
    const int kmax = static_cast<int>(std::floor(geom.exit_width / (2.0 * grid.h) + 1e-9));
    for (const auto& e : geom.exits) {
        int ci, cj;
        if (detail::close(e[0], grid.lo[0], side))
            ci = 0;
        else if (detail::close(e[0], grid.hi[0], side))
            ci = nx - 1;
        else
            throw ConfigError("2D exit must sit at a domain corner");
        if (detail::close(e[1], grid.lo[1], side))
            cj = 0;
        else if (detail::close(e[1], grid.hi[1], side))
            cj = ny - 1;
        else
            throw ConfigError("2D exit must sit at a domain corner");

        int di = (ci == 0) ? 1 : -1;
        int dj = (cj == 0) ? 1 : -1;
        for (int k = 0; k <= std::min(kmax, nx - 1); ++k)
            bmap.label[grid.index(ci + di * k, cj)] = NodeLabel::Exit;
        for (int k = 0; k <= std::min(kmax, ny - 1); ++k)
            bmap.label[grid.index(ci, cj + dj * k)] = NodeLabel::Exit;
    }
    return {grid, bmap};
}

}  // namespace crowdflow
