#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdflow/hughes.hpp"
#include "crowdflow/mfg.hpp"
#include "crowdflow/stencils.hpp"

namespace crowdflow {

inline double total_mass(const ScalarField& rho) { return trapezoid_integral(rho); }

// Values on the y = 0 node row of a 2D field, ordered by x. Needs an odd
// node count so the center row exists exactly.
inline std::vector<double> center_cross_section(const ScalarField& f) {
    const GridSpec& g = f.grid;
    if (g.dim != 2) throw ConfigError("center_cross_section needs a 2D field");
    if (g.ny() % 2 == 0)
        throw ConfigError("center_cross_section needs an odd node count (no y = 0 row)");
    const int j0 = (g.ny() - 1) / 2;
    if (std::abs(g.y(j0)) > 1e-9 * std::max(1.0, std::abs(g.hi[1] - g.lo[1])))
        throw ConfigError("grid has no node row at y = 0");
    std::vector<double> out(static_cast<size_t>(g.nx()));
    for (int i = 0; i < g.nx(); ++i) out[i] = f.at(i, j0);
    return out;
}

// Pointwise residual of the stationary limit relation
// (f + 2 rho f') |grad Phi|^2 - alpha / f with f = rho_max - rho; reported
// signed, including where the coefficient goes nonpositive.
inline ScalarField limit_residual(const ScalarField& rho, const ScalarField& phi,
                                  const ModelParams& params) {
    VectorField grad = gradient_central(phi);
    ScalarField out(rho.grid);
    for (int idx = 0; idx < rho.grid.node_count(); ++idx) {
        const double f = params.rho_max - rho[idx];
        const double coef = params.rho_max - 3.0 * rho[idx];  // f + 2 rho f', f' = -1
        out[idx] = coef * grad.norm_sq_at(idx) - params.alpha / std::max(f, params.eps_f);
    }
    return out;
}

// Largest discrete |d phi / dt| (max norm in space) over the window; small
// values mean the backward value function has equilibrated there.
inline double equilibration_measure(const std::vector<ScalarField>& phi_series,
                                    const std::vector<double>& times, double window_lo,
                                    double window_hi) {
    ensure(phi_series.size() == times.size(), ErrorCategory::Config,
           "equilibration_measure needs one time per snapshot");
    double worst = -1.0;
    for (size_t k = 0; k + 1 < phi_series.size(); ++k) {
        const double t0 = times[k], t1 = times[k + 1];
        if (t0 < window_lo - 1e-12 || t1 > window_hi + 1e-12) continue;
        const double dt = t1 - t0;
        ensure(dt > 0.0, ErrorCategory::Config, "times must be strictly increasing");
        double diff = 0.0;
        for (int idx = 0; idx < phi_series[k].grid.node_count(); ++idx)
            diff = std::max(diff, std::abs(phi_series[k + 1][idx] - phi_series[k][idx]));
        worst = std::max(worst, diff / dt);
    }
    if (worst < 0.0) throw ConfigError("equilibration window contains no snapshot pair");
    return worst;
}

namespace detail {

inline double l2_norm_diff(const ScalarField& a, const ScalarField& b) {
    const GridSpec& g = a.grid;
    double acc = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double d = a[g.index(i, j)] - b[g.index(i, j)];
            acc += g.weight(i, j) * d * d;
        }
    return std::sqrt(acc);
}

inline double max_norm_diff(const ScalarField& a, const ScalarField& b) {
    double acc = 0.0;
    for (int idx = 0; idx < a.grid.node_count(); ++idx)
        acc = std::max(acc, std::abs(a[idx] - b[idx]));
    return acc;
}

// Pearson correlation over nodes.
inline double correlation(const ScalarField& a, const ScalarField& b) {
    const int n = a.grid.node_count();
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (int i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

inline int center_index(const GridSpec& g) {
    const int i0 = (g.nx() - 1) / 2;
    const int j0 = g.dim == 2 ? (g.ny() - 1) / 2 : 0;
    return g.index(i0, j0);
}

inline std::optional<double> first_time_below(const std::vector<double>& series, double dt,
                                              double threshold) {
    for (size_t k = 0; k < series.size(); ++k)
        if (series[k] <= threshold) return k * dt;
    return std::nullopt;
}

}  // namespace detail

// Side-by-side diagnostics of a Hughes trajectory and an MFG iterate on
// matched configurations.
struct ComparisonReport {
    std::vector<double> snapshot_times;

    // Density differences per snapshot (Hughes vs MFG, nearest MFG step).
    std::vector<double> density_l2_diff;
    std::vector<double> density_max_diff;

    // Pearson correlation of -Phi_MFG against Phi_Hughes per snapshot.
    std::vector<double> phi_correlation;

    // Center density value per snapshot (x = 0, and y = 0 in 2D).
    std::vector<double> center_hughes;
    std::vector<double> center_mfg;

    // 2D only: density slices along the y = 0 row per snapshot.
    std::vector<std::vector<double>> centerline_hughes;
    std::vector<std::vector<double>> centerline_mfg;

    // Full mass curves on each solver's own step grid.
    double dt_hughes = 0.0;
    double dt_mfg = 0.0;
    std::vector<double> mass_hughes;
    std::vector<double> mass_mfg;

    // First time mass drops to threshold * initial mass.
    double evacuation_threshold = 0.01;
    std::optional<double> evacuation_time_hughes;
    std::optional<double> evacuation_time_mfg;

    // First time the center density falls below half its initial value.
    std::optional<double> waiting_time_hughes;
    std::optional<double> waiting_time_mfg;

    // Limit-relation residual statistics per snapshot; the Hughes pair is
    // evaluated with the sign flip (rho, -Phi_Hughes).
    std::vector<double> limit_residual_max_hughes;
    std::vector<double> limit_residual_l2_hughes;
    std::vector<double> limit_residual_max_mfg;
    std::vector<double> limit_residual_l2_mfg;

    // max |dPhi_MFG/dt| over the window [T/6, T/2].
    double equilibration_phi_mfg = 0.0;
};

inline ComparisonReport compare_models(const Trajectory& hughes, const ControlState& mfg,
                                       const ModelParams& params) {
    ensure(!hughes.rho_snapshots.empty() && !mfg.rho.empty(), ErrorCategory::Config,
           "compare_models needs nonempty runs");
    if (!(hughes.rho_snapshots[0].grid == mfg.rho[0].grid))
        throw ConfigError("compare_models: the two runs use different grids");

    const GridSpec& g = hughes.rho_snapshots[0].grid;
    ComparisonReport rep;
    rep.snapshot_times = hughes.times;
    rep.dt_hughes = hughes.dt;
    rep.dt_mfg = mfg.dt;
    rep.mass_hughes = hughes.mass_series;
    rep.mass_mfg.reserve(mfg.rho.size());
    for (const auto& r : mfg.rho) rep.mass_mfg.push_back(total_mass(r));

    const int mfg_last = static_cast<int>(mfg.rho.size()) - 1;
    const int ctr = detail::center_index(g);

    for (size_t k = 0; k < hughes.times.size(); ++k) {
        const double t = hughes.times[k];
        const int step = std::clamp(static_cast<int>(std::llround(t / mfg.dt)), 0, mfg_last);
        const ScalarField& rho_h = hughes.rho_snapshots[k];
        const ScalarField& rho_m = mfg.rho[step];
        const ScalarField& phi_h = hughes.phi_snapshots[k];
        const ScalarField& phi_m = mfg.phi[step];

        rep.density_l2_diff.push_back(detail::l2_norm_diff(rho_h, rho_m));
        rep.density_max_diff.push_back(detail::max_norm_diff(rho_h, rho_m));

        ScalarField neg_phi_m = phi_m;
        for (auto& v : neg_phi_m.values) v = -v;
        rep.phi_correlation.push_back(detail::correlation(neg_phi_m, phi_h));

        rep.center_hughes.push_back(rho_h[ctr]);
        rep.center_mfg.push_back(rho_m[ctr]);
        if (g.dim == 2) {
            rep.centerline_hughes.push_back(center_cross_section(rho_h));
            rep.centerline_mfg.push_back(center_cross_section(rho_m));
        }

        ScalarField neg_phi_h = phi_h;
        for (auto& v : neg_phi_h.values) v = -v;
        ScalarField res_h = limit_residual(rho_h, neg_phi_h, params);
        ScalarField res_m = limit_residual(rho_m, phi_m, params);
        ScalarField zero(g, 0.0);
        rep.limit_residual_max_hughes.push_back(detail::max_norm_diff(res_h, zero));
        rep.limit_residual_l2_hughes.push_back(detail::l2_norm_diff(res_h, zero));
        rep.limit_residual_max_mfg.push_back(detail::max_norm_diff(res_m, zero));
        rep.limit_residual_l2_mfg.push_back(detail::l2_norm_diff(res_m, zero));
    }

    if (!rep.mass_hughes.empty())
        rep.evacuation_time_hughes = detail::first_time_below(
            rep.mass_hughes, hughes.dt, rep.evacuation_threshold * rep.mass_hughes.front());
    if (!rep.mass_mfg.empty())
        rep.evacuation_time_mfg = detail::first_time_below(
            rep.mass_mfg, mfg.dt, rep.evacuation_threshold * rep.mass_mfg.front());

    if (!rep.center_hughes.empty()) {
        const double half_h = 0.5 * rep.center_hughes.front();
        for (size_t k = 0; k < rep.center_hughes.size(); ++k)
            if (rep.center_hughes[k] < half_h && !rep.waiting_time_hughes)
                rep.waiting_time_hughes = rep.snapshot_times[k];
        const double half_m = 0.5 * rep.center_mfg.front();
        for (size_t k = 0; k < rep.center_mfg.size(); ++k)
            if (rep.center_mfg[k] < half_m && !rep.waiting_time_mfg)
                rep.waiting_time_mfg = rep.snapshot_times[k];
    }

    {
        std::vector<double> mfg_times(mfg.phi.size());
        for (size_t n = 0; n < mfg.phi.size(); ++n) mfg_times[n] = n * mfg.dt;
        double lo = params.T / 6.0, hi = params.T / 2.0;
        if (hi - lo < 2.0 * mfg.dt) {  // too short to hold a step pair
            lo = 0.0;
            hi = mfg_times.back();
        }
        rep.equilibration_phi_mfg = equilibration_measure(mfg.phi, mfg_times, lo, hi);
    }
    return rep;
}

inline nlohmann::ordered_json to_json(const ComparisonReport& rep) {
    nlohmann::ordered_json j;
    j["snapshot_times"] = rep.snapshot_times;
    j["density_l2_diff"] = rep.density_l2_diff;
    j["density_max_diff"] = rep.density_max_diff;
    j["phi_correlation"] = rep.phi_correlation;
    j["center_hughes"] = rep.center_hughes;
    j["center_mfg"] = rep.center_mfg;
    if (!rep.centerline_hughes.empty()) {
        j["centerline_hughes"] = rep.centerline_hughes;
        j["centerline_mfg"] = rep.centerline_mfg;
    }
    j["dt_hughes"] = rep.dt_hughes;
    j["dt_mfg"] = rep.dt_mfg;
    j["mass_hughes"] = rep.mass_hughes;
    j["mass_mfg"] = rep.mass_mfg;
    j["evacuation_threshold"] = rep.evacuation_threshold;
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    j["evacuation_time_hughes"] = opt(rep.evacuation_time_hughes);
    j["evacuation_time_mfg"] = opt(rep.evacuation_time_mfg);
    j["waiting_time_hughes"] = opt(rep.waiting_time_hughes);
    j["waiting_time_mfg"] = opt(rep.waiting_time_mfg);
    j["limit_residual_max_hughes"] = rep.limit_residual_max_hughes;
    j["limit_residual_l2_hughes"] = rep.limit_residual_l2_hughes;
    j["limit_residual_max_mfg"] = rep.limit_residual_max_mfg;
    j["limit_residual_l2_mfg"] = rep.limit_residual_l2_mfg;
    j["equilibration_phi_mfg"] = rep.equilibration_phi_mfg;
    return j;
}

}  // namespace crowdflow
