#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdflow/errors.hpp"
#include "crowdflow/grid.hpp"
#include "crowdflow/params.hpp"

namespace crowdflow {

using json = nlohmann::ordered_json;

// Initial density: a constant, the cosine bump profile
// base + amplitude * prod_axes cos(pi * xhat) with xhat in [-1,1], or a
// snapshot CSV on the configured grid.
struct Rho0Spec {
    enum class Kind { Constant, CosineBump, Csv };
    Kind kind = Kind::Constant;
    double value = 1.0 / 3.0;
    double base = 1.0 / 3.0;
    double amplitude = 0.1;
    std::string path;

    bool operator==(const Rho0Spec&) const = default;
};

// Full run configuration. The defaults reproduce the 1D corridor experiment:
// [-1,1] with exits at both ends, h = 0.01, rho0 = 1/3,
// rho_max = alpha = beta = 1, nu = 0.01, T = 3, dt = 1e-4 (Hughes) and
// 1e-3 (MFG).
struct SimConfig {
    Geometry geometry;

    struct Model {
        double rho_max = 1.0;
        double alpha = 1.0;
        double beta = 1.0;
        double nu = 0.01;
        Rho0Spec rho0;
        double T = 3.0;
        AdjointExitBc adjoint_exit_bc = AdjointExitBc::BetaPhi;
        bool operator==(const Model&) const = default;
    } model;

    struct Numerics {
        double dt_hughes = 1e-4;
        double dt_mfg = 1e-3;
        double tol_eik = 1e-8;
        int max_sweeps = 1000;
        double tol_desc = 1e-4;
        int max_iter = 500;
        double tau0 = 1.0;
        double tau_min = 1e-12;
        double neg_tol = 1e-8;
        std::vector<double> snapshot_times;  // filled with linspace(0,T,7) when empty
        bool operator==(const Numerics&) const = default;
    } numerics;

    struct Output {
        std::string directory = "out";
        std::vector<std::string> fields{"rho", "phi", "m"};
        bool operator==(const Output&) const = default;
    } output;

    bool operator==(const SimConfig&) const = default;
};

namespace detail {

// Tracks which keys of a JSON object were consumed; anything left over is a
// typo we refuse to ignore.
class StrictObject {
public:
    StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError("expected an object at " + path_);
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& at(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(path_ + "." + key + " must be a number");
        return v.get<double>();
    }

    int integer(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(path_ + "." + key + " must be an integer");
        return v.get<int>();
    }

    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(path_ + "." + key + " must be a string");
        return v.get<std::string>();
    }

    void finish() const {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key()))
                throw ConfigError("unknown config key \"" + item.key() + "\" in " + path_);
    }

    const std::string& path() const { return path_; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline std::vector<double> number_list(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(path + " must contain only numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

}  // namespace detail

inline Rho0Spec rho0_from_json(const json& v, const std::string& path) {
    Rho0Spec spec;
    if (v.is_number()) {
        spec.kind = Rho0Spec::Kind::Constant;
        spec.value = v.get<double>();
        return spec;
    }
    detail::StrictObject o(v, path);
    std::string type = o.text("type", "constant");
    if (type == "constant") {
        spec.kind = Rho0Spec::Kind::Constant;
        spec.value = o.number("value", spec.value);
    } else if (type == "cosine_bump") {
        spec.kind = Rho0Spec::Kind::CosineBump;
        spec.base = o.number("base", spec.base);
        spec.amplitude = o.number("amplitude", spec.amplitude);
    } else if (type == "csv") {
        spec.kind = Rho0Spec::Kind::Csv;
        if (!o.has("path")) throw ConfigError(path + ": csv rho0 needs a \"path\"");
        spec.path = o.text("path", "");
    } else {
        throw ConfigError(path + ".type must be one of constant, cosine_bump, csv");
    }
    o.finish();
    return spec;
}

inline Geometry geometry_from_json(const json& j, const std::string& path) {
    Geometry geom;
    detail::StrictObject o(j, path);
    geom.dim = o.integer("dim", 1);
    if (geom.dim != 1 && geom.dim != 2) throw ConfigError(path + ".dim must be 1 or 2");

    geom.extents = {{{-1.0, 1.0}, {-1.0, 1.0}}};
    if (o.has("extents")) {
        const json& e = o.at("extents");
        if (!e.is_array() || e.empty()) throw ConfigError(path + ".extents must be a nonempty array");
        if (e[0].is_number()) {
            auto iv = detail::number_list(e, path + ".extents");
            if (iv.size() != 2 || geom.dim != 1)
                throw ConfigError(path + ".extents: flat [lo,hi] form is 1D only");
            geom.extents[0] = {iv[0], iv[1]};
        } else {
            if (static_cast<int>(e.size()) != geom.dim)
                throw ConfigError(path + ".extents needs one [lo,hi] pair per axis");
            for (int a = 0; a < geom.dim; ++a) {
                auto iv = detail::number_list(e[a], path + ".extents");
                if (iv.size() != 2) throw ConfigError(path + ".extents entries must be [lo,hi]");
                geom.extents[a] = {iv[0], iv[1]};
            }
        }
    }
    for (int a = 0; a < geom.dim; ++a)
        if (!(geom.extents[a][1] > geom.extents[a][0]))
            throw ConfigError(path + ".extents must have hi > lo");

    geom.nodes = {201, 201};
    if (o.has("nodes")) {
        const json& nn = o.at("nodes");
        if (nn.is_number_integer()) {
            geom.nodes[0] = geom.nodes[1] = nn.get<int>();
        } else {
            auto iv = detail::number_list(nn, path + ".nodes");
            if (static_cast<int>(iv.size()) != geom.dim)
                throw ConfigError(path + ".nodes needs one count per axis");
            for (int a = 0; a < geom.dim; ++a) geom.nodes[a] = static_cast<int>(iv[a]);
        }
    }

    geom.exits.clear();
    if (o.has("exits")) {
        const json& ex = o.at("exits");
        if (!ex.is_array()) throw ConfigError(path + ".exits must be an array");
        for (const auto& e : ex) {
            if (geom.dim == 1) {
                if (!e.is_number()) throw ConfigError(path + ".exits: 1D exits are x positions");
                geom.exits.push_back({e.get<double>(), 0.0});
            } else {
                auto iv = detail::number_list(e, path + ".exits");
                if (iv.size() != 2) throw ConfigError(path + ".exits: 2D exits are [x,y] corners");
                geom.exits.push_back({iv[0], iv[1]});
            }
        }
    } else {
        // Default layout: endpoint exits in 1D, all four corners in 2D.
        if (geom.dim == 1) {
            geom.exits.push_back({geom.extents[0][0], 0.0});
            geom.exits.push_back({geom.extents[0][1], 0.0});
        } else {
            for (double xc : {geom.extents[0][0], geom.extents[0][1]})
                for (double yc : {geom.extents[1][0], geom.extents[1][1]})
                    geom.exits.push_back({xc, yc});
        }
    }

    geom.exit_width = o.number("exit_width", 0.2);
    o.finish();
    return geom;
}

inline SimConfig config_from_json(const json& root) {
    if (!root.is_object()) throw ConfigError("top-level config must be a JSON object");
    SimConfig cfg;
    detail::StrictObject top(root, "config");

    if (top.has("geometry")) cfg.geometry = geometry_from_json(top.at("geometry"), "geometry");

    if (top.has("model")) {
        detail::StrictObject o(top.at("model"), "model");
        cfg.model.rho_max = o.number("rho_max", cfg.model.rho_max);
        cfg.model.alpha = o.number("alpha", cfg.model.alpha);
        cfg.model.beta = o.number("beta", cfg.model.beta);
        cfg.model.nu = o.number("nu", cfg.model.nu);
        cfg.model.T = o.number("T", cfg.model.T);
        if (o.has("rho0")) cfg.model.rho0 = rho0_from_json(o.at("rho0"), "model.rho0");
        std::string bc = o.text("adjoint_exit_bc", "beta_phi");
        if (bc == "beta_phi")
            cfg.model.adjoint_exit_bc = AdjointExitBc::BetaPhi;
        else if (bc == "beta_rho")
            cfg.model.adjoint_exit_bc = AdjointExitBc::BetaRho;
        else
            throw ConfigError("model.adjoint_exit_bc must be beta_phi or beta_rho");
        o.finish();
    }

    if (top.has("numerics")) {
        detail::StrictObject o(top.at("numerics"), "numerics");
        cfg.numerics.dt_hughes = o.number("dt_hughes", cfg.numerics.dt_hughes);
        cfg.numerics.dt_mfg = o.number("dt_mfg", cfg.numerics.dt_mfg);
        cfg.numerics.tol_eik = o.number("tol_eik", cfg.numerics.tol_eik);
        cfg.numerics.max_sweeps = o.integer("max_sweeps", cfg.numerics.max_sweeps);
        cfg.numerics.tol_desc = o.number("tol_desc", cfg.numerics.tol_desc);
        cfg.numerics.max_iter = o.integer("max_iter", cfg.numerics.max_iter);
        cfg.numerics.tau0 = o.number("tau0", cfg.numerics.tau0);
        cfg.numerics.tau_min = o.number("tau_min", cfg.numerics.tau_min);
        cfg.numerics.neg_tol = o.number("neg_tol", cfg.numerics.neg_tol);
        if (o.has("snapshot_times"))
            cfg.numerics.snapshot_times =
                detail::number_list(o.at("snapshot_times"), "numerics.snapshot_times");
        o.finish();
    }

    if (top.has("output")) {
        detail::StrictObject o(top.at("output"), "output");
        cfg.output.directory = o.text("directory", cfg.output.directory);
        if (o.has("fields")) {
            const json& f = o.at("fields");
            if (!f.is_array()) throw ConfigError("output.fields must be an array");
            cfg.output.fields.clear();
            for (const auto& e : f) {
                std::string name = e.is_string() ? e.get<std::string>() : "";
                if (name != "rho" && name != "phi" && name != "m")
                    throw ConfigError("output.fields entries must be rho, phi or m");
                cfg.output.fields.push_back(name);
            }
        }
        o.finish();
    }
    top.finish();

    if (cfg.numerics.snapshot_times.empty()) {
        for (int k = 0; k < 7; ++k) cfg.numerics.snapshot_times.push_back(cfg.model.T * k / 6.0);
    }
    for (double t : cfg.numerics.snapshot_times)
        if (t < -1e-12 || t > cfg.model.T * (1.0 + 1e-12))
            throw ConfigError("snapshot time " + std::to_string(t) + " outside [0, T]");
    ensure(cfg.numerics.tau0 > 0.0, ErrorCategory::Config, "tau0 must be positive");
    ensure(cfg.numerics.max_iter >= 0, ErrorCategory::Config, "max_iter must be nonnegative");
    ensure(cfg.numerics.max_sweeps >= 1, ErrorCategory::Config, "max_sweeps must be >= 1");
    ensure(cfg.numerics.tol_eik > 0.0, ErrorCategory::Config, "tol_eik must be positive");

    return cfg;
}

inline ModelParams params_common(const SimConfig& cfg) {
    ModelParams p;
    p.rho_max = cfg.model.rho_max;
    p.alpha = cfg.model.alpha;
    p.beta = cfg.model.beta;
    p.nu = cfg.model.nu;
    p.T = cfg.model.T;
    p.tol_eik = cfg.numerics.tol_eik;
    p.max_sweeps = cfg.numerics.max_sweeps;
    p.tol_desc = cfg.numerics.tol_desc;
    p.max_iter = cfg.numerics.max_iter;
    p.tau0 = cfg.numerics.tau0;
    p.tau_min = cfg.numerics.tau_min;
    p.neg_tol = cfg.numerics.neg_tol;
    p.adjoint_exit_bc = cfg.model.adjoint_exit_bc;
    return p;
}

inline ModelParams params_for_hughes(const SimConfig& cfg) {
    ModelParams p = params_common(cfg);
    p.dt = cfg.numerics.dt_hughes;
    return p;
}

inline ModelParams params_for_mfg(const SimConfig& cfg) {
    ModelParams p = params_common(cfg);
    p.dt = cfg.numerics.dt_mfg;
    return p;
}

// Builds the grid and validates both time steps against it, so a bad
// configuration is rejected before any solver starts.
inline std::pair<GridSpec, BoundaryMap> make_grid(const SimConfig& cfg) {
    auto gb = build_grid(cfg.geometry, cfg.model.beta);
    params_for_hughes(cfg).validate(gb.first);
    params_for_mfg(cfg).validate(gb.first);
    return gb;
}

inline json to_json(const Rho0Spec& spec) {
    json v;
    switch (spec.kind) {
        case Rho0Spec::Kind::Constant:
            v = {{"type", "constant"}, {"value", spec.value}};
            break;
        case Rho0Spec::Kind::CosineBump:
            v = {{"type", "cosine_bump"}, {"base", spec.base}, {"amplitude", spec.amplitude}};
            break;
        case Rho0Spec::Kind::Csv:
            v = {{"type", "csv"}, {"path", spec.path}};
            break;
    }
    return v;
}

inline json to_json(const SimConfig& cfg) {
    json g;
    g["dim"] = cfg.geometry.dim;
    json extents = json::array();
    for (int a = 0; a < cfg.geometry.dim; ++a)
        extents.push_back({cfg.geometry.extents[a][0], cfg.geometry.extents[a][1]});
    g["extents"] = extents;
    json nodes = json::array();
    for (int a = 0; a < cfg.geometry.dim; ++a) nodes.push_back(cfg.geometry.nodes[a]);
    g["nodes"] = nodes;
    json exits = json::array();
    for (const auto& e : cfg.geometry.exits) {
        if (cfg.geometry.dim == 1)
            exits.push_back(e[0]);
        else
            exits.push_back({e[0], e[1]});
    }
    g["exits"] = exits;
    g["exit_width"] = cfg.geometry.exit_width;

    json m;
    m["rho_max"] = cfg.model.rho_max;
    m["alpha"] = cfg.model.alpha;
    m["beta"] = cfg.model.beta;
    m["nu"] = cfg.model.nu;
    m["rho0"] = to_json(cfg.model.rho0);
    m["T"] = cfg.model.T;
    m["adjoint_exit_bc"] =
        cfg.model.adjoint_exit_bc == AdjointExitBc::BetaPhi ? "beta_phi" : "beta_rho";

    json n;
    n["dt_hughes"] = cfg.numerics.dt_hughes;
    n["dt_mfg"] = cfg.numerics.dt_mfg;
    n["tol_eik"] = cfg.numerics.tol_eik;
    n["max_sweeps"] = cfg.numerics.max_sweeps;
    n["tol_desc"] = cfg.numerics.tol_desc;
    n["max_iter"] = cfg.numerics.max_iter;
    n["tau0"] = cfg.numerics.tau0;
    n["tau_min"] = cfg.numerics.tau_min;
    n["neg_tol"] = cfg.numerics.neg_tol;
    n["snapshot_times"] = cfg.numerics.snapshot_times;

    json o;
    o["directory"] = cfg.output.directory;
    o["fields"] = cfg.output.fields;

    return json{{"geometry", g}, {"model", m}, {"numerics", n}, {"output", o}};
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed JSON in " + path + ": " + e.what());
    }
}

// key=value override applied to the raw JSON document before validation.
// The key is a dotted path; the value is parsed as JSON when possible and
// falls back to a plain string.
inline void apply_override(json& root, const std::string& spec) {
    auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw UsageError("override must look like section.key=value, got \"" + spec + "\"");
    std::string path = spec.substr(0, eq);
    std::string text = spec.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        value = text;
    }
    json* node = &root;
    size_t start = 0;
    while (true) {
        size_t dot = path.find('.', start);
        std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw UsageError("override path has an empty component: " + path);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

inline SimConfig parse_config(const std::string& path) {
    return config_from_json(load_json_file(path));
}

inline SimConfig parse_config_text(const std::string& text) {
    try {
        return config_from_json(json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace crowdflow
