#pragma once

#include "velo/grid.hpp"

#include <stdexcept>

namespace velo {

/// Thrown when a transport solve produces non-finite values.
struct instability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Smallest n_t >= n_t_init such that max_i |v_i|_inf / n_t <= safety * min_i h_i.
int cfl_timesteps(const VectorField& v, int nt_init, double safety);

/// Forward transport d_t m + grad(m).v = 0, m(0) = m_T, explicit midpoint
/// RK2 with spectral derivatives; returns all n_t+1 slices.
TimeSeriesField solve_state(const ScalarField& m_T, const VectorField& v, int nt);

/// Backward transport -d_t lambda - div(lambda v) = 0 with terminal value
/// lambda(1) = m_R - m_1; returns all slices.
TimeSeriesField solve_adjoint(const ScalarField& m1, const ScalarField& m_R,
                              const VectorField& v, int nt);

/// Incremental state d_t mt + grad(mt).v + grad(m).vt = 0, mt(0) = 0.
/// Stored m slices are averaged pairwise at RK2 half steps.
TimeSeriesField solve_inc_state(const TimeSeriesField& m, const VectorField& v,
                                const VectorField& vt);

/// Incremental adjoint -d_t lt - div(lt v) - div(lambda vt) = 0 with
/// lt(1) = -mt1; the div(lambda vt) source is dropped in Gauss-Newton mode.
TimeSeriesField solve_inc_adjoint(const TimeSeriesField& lambda, const VectorField& v,
                                  const VectorField& vt, const ScalarField& mt1,
                                  bool gauss_newton);

/// b = int_0^1 lambda grad(m) dt by the trapezoidal rule.
VectorField body_force(const TimeSeriesField& m, const TimeSeriesField& lambda);

/// bt = int_0^1 (lt grad(m) + lambda grad(mt)) dt; the lambda grad(mt)
/// term is dropped in Gauss-Newton mode.
VectorField inc_body_force(const TimeSeriesField& m, const TimeSeriesField& mt,
                           const TimeSeriesField& lambda, const TimeSeriesField& lt,
                           bool gauss_newton);

/// Displacement u(1) from d_t u + (grad u) v = v, u(0) = 0. The Eulerian
/// map is y = x - u1.
VectorField solve_displacement(const VectorField& v, int nt);

/// Deformation gradient F(1) from d_t F + (v.grad) F = (grad v) F, F(0) = I.
TensorField2x2 solve_defgrad(const VectorField& v, int nt);

}  // namespace velo
