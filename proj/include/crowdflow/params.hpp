#pragma once

#include <cmath>
#include <string>

#include "crowdflow/errors.hpp"
#include "crowdflow/grid.hpp"

namespace crowdflow {

// Exit boundary closure of the backward (adjoint) equation. BetaPhi is the
// variationally consistent nu*dPhi/dn + beta*Phi = 0; BetaRho keeps the
// literal beta*rho coupling for comparison runs.
enum class AdjointExitBc { BetaPhi, BetaRho };

// Physical constants and solver controls shared by every solver. dt is the
// step of whichever march the params are handed to (Hughes and MFG marches
// use different steps).
struct ModelParams {
    double rho_max = 1.0;  // density cap
    double alpha = 1.0;    // running-cost weight
    double beta = 1.0;     // exit rate
    double nu = 0.01;      // diffusion sigma^2/2
    double T = 3.0;        // horizon
    double dt = 1e-4;      // time step

    double tol_eik = 1e-8;
    int max_sweeps = 1000;
    double tol_desc = 1e-4;
    int max_iter = 500;
    double tau0 = 1.0;
    double tau_min = 1e-12;
    double armijo_c = 1e-4;
    double neg_tol = 1e-8;
    double eps_f = 1e-6;  // slowness regularization floor for f(rho)
    double eps_F = 1e-8;  // mobility floor for F(rho)
    AdjointExitBc adjoint_exit_bc = AdjointExitBc::BetaPhi;

    int steps() const { return static_cast<int>(std::llround(T / dt)); }

    // Parabolic stability bound of the explicit schemes, checked when a
    // configuration is accepted.
    void validate(const GridSpec& grid) const {
        ensure(rho_max > 0.0, ErrorCategory::Config, "rho_max must be positive");
        ensure(beta >= 0.0, ErrorCategory::Config, "beta must be nonnegative");
        ensure(nu >= 0.0, ErrorCategory::Config, "nu must be nonnegative");
        ensure(T > 0.0, ErrorCategory::Config, "T must be positive");
        ensure(dt > 0.0, ErrorCategory::Config, "dt must be positive");
        const double bound = grid.dim == 1 ? 0.5 : 0.25;
        const double number = nu * dt / (grid.h * grid.h);
        if (number > bound + 1e-12)
            throw ConfigError("parabolic stability violated: nu*dt/h^2 = " +
                              std::to_string(number) + " > " + std::to_string(bound));
    }
};

}  // namespace crowdflow
