#pragma once

#include "velo/grid.hpp"

namespace velo {

enum class RegModel { H1Seminorm, H2Seminorm, NonlinearStokes, TotalVariation };

/// Regularization model plus weights and incompressibility mode.
struct RegConfig {
    RegModel model = RegModel::H1Seminorm;
    double beta_v = 1e-1;     ///< weight on the velocity norm
    double beta_w = 1e-4;     ///< weight on the mass-source norm (gamma = 1 only)
    int gamma = 0;            ///< 0: no divergence constraint, 1: constrained
    double nu = 1.0;          ///< flow-law exponent (NonlinearStokes only)
    double q = 2.0;           ///< exponent of the v-norm in the objective
    bool incompressible = false;  ///< gamma = 1 with mass source w == 0
    double eps_visc = 1e-6;   ///< safeguard added to E:E before fractional powers

    bool quadratic() const {
        return model == RegModel::H1Seminorm || model == RegModel::H2Seminorm;
    }
    void validate() const;
};

/// Value of the regularization functional: |v|^2_H1, |v|^2_H2, the
/// strain-rate functional with its 2nu/(nu+1) prefactor, or the smoothed
/// total-variation functional. The nonquadratic functionals are shifted
/// so that v = 0 maps to exactly 0.
double reg_energy_v(const VectorField& v, const RegConfig& cfg);

/// E[v] = ((grad v) + (grad v)^T) / 2; symmetric by construction.
TensorField2x2 strain_rate(const VectorField& v);

/// eta[v] = (tr(E E) + eps)^((1-nu)/(2 nu)), strictly positive and finite.
ScalarField effective_viscosity(const VectorField& v, double nu, double eps_visc);

/// First variation of the regularization model: -lap(v), lap^2(v),
/// -div(2 eta E[v]), or the TV analogue.
VectorField apply_A(const VectorField& v, const RegConfig& cfg);

/// Second variation applied to vt. Coincides with apply_A(vt) for the
/// quadratic models; the strain-dependent models add the rank-one term
/// ((1-nu)/nu) E (E:E[vt]) / (E:E + eps).
VectorField apply_B(const VectorField& v, const VectorField& vt, const RegConfig& cfg);

/// int grad(w).grad(w) + w^2 (the beta_w weight is applied by callers).
double reg_energy_w(const ScalarField& w, double beta_w);

/// beta_w (-lap + id) w.
ScalarField apply_w_operator(const ScalarField& w, double beta_w);

/// Inverse of the spectral preconditioner: (beta_v A)^-1 r for quadratic
/// models, (beta_v (-lap))^-1 r otherwise; the k = 0 block is replaced by
/// beta_v^-1 id so the operator is SPD.
VectorField apply_preconditioner(const VectorField& r, const VectorField& v,
                                 const RegConfig& cfg);

}  // namespace velo
