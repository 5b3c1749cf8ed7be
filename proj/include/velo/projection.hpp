#pragma once

#include "velo/grid.hpp"
#include "velo/regularization.hpp"

#include <utility>

namespace velo {

/// How the divergence constraint enters the reduced systems.
struct EliminationMode {
    int gamma = 0;                ///< 0 bypasses the module (K = id)
    bool incompressible = false;  ///< w == 0 (M = id) vs mass-source relaxation

    static EliminationMode from(const RegConfig& cfg) {
        return {cfg.gamma, cfg.incompressible};
    }
};

/// Apply M^-1 with M = c (beta_w(-lap + id))^-1 + id, c = beta_v for the
/// quadratic models and c = 2 beta_v eta_bar for the strain-dependent ones.
/// Identity in incompressible mode and when gamma = 0.
ScalarField apply_M_inverse(const ScalarField& f, const EliminationMode& mode,
                            const RegConfig& cfg, double eta_bar);

/// K[b] = b - grad(M^-1 lap^-1 div(b)); a Leray-type projection in
/// incompressible mode. Quadratic regularization models only.
VectorField project_K_linear(const VectorField& b, const EliminationMode& mode,
                             const RegConfig& cfg);

/// Strain-dependent K[b,v] = grad(M^-1 lap^-1 div(div(2 beta_v etahat[v] E[v]) - b)) + b
/// with eta split into its spatial mean and fluctuation.
VectorField project_K_nonlinear(const VectorField& b, const VectorField& v,
                                const EliminationMode& mode, const RegConfig& cfg);

/// L coincides with K for quadratic models.
VectorField project_L_linear(const VectorField& bt, const EliminationMode& mode,
                             const RegConfig& cfg);

/// Strain-dependent L(v)[bt,vt] with the (etahat + eta Q) tensor acting on E[vt].
VectorField project_L_nonlinear(const VectorField& bt, const VectorField& v,
                                const VectorField& vt, const EliminationMode& mode,
                                const RegConfig& cfg);

/// Eliminated multipliers: pressure p and mass source w recovered from the
/// body force (and v for the strain-dependent models); w == 0 in
/// incompressible mode, p == w == 0 when gamma = 0.
std::pair<ScalarField, ScalarField> recover_pressure_and_mass_source(
    const VectorField& b, const VectorField& v, const EliminationMode& mode,
    const RegConfig& cfg);

}  // namespace velo
