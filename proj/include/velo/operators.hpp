#pragma once

#include "velo/fft.hpp"
#include "velo/grid.hpp"

namespace velo {

// Fourier differential operators on the periodic grid. Forward operators
// are exact for trigonometric polynomials below the Nyquist wavenumber.
// The Nyquist mode of odd-order derivatives is zeroed so real fields map
// to exactly real fields.

ScalarField deriv_x1(const ScalarField& f);
ScalarField deriv_x2(const ScalarField& f);

VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
VectorField divergence_tensor(const TensorField2x2& t);

ScalarField laplacian(const ScalarField& f);
VectorField laplacian_vector(const VectorField& v);
ScalarField bilaplacian(const ScalarField& f);
VectorField bilaplacian_vector(const VectorField& v);

/// 2D scalar curl of a vector field, d(v2)/dx1 - d(v1)/dx2.
ScalarField curl(const VectorField& v);
/// Vector curl of a scalar stream function, (df/dx2, -df/dx1).
VectorField curl(const ScalarField& f);

/// Solve laplacian(u) = f spectrally; the k=0 coefficient of u is set to
/// zero (mean projection), so laplacian(inverse_laplacian(f)) = f - mean(f).
ScalarField inverse_laplacian(const ScalarField& f);

/// Solve beta_w * (-laplacian + id) u = f spectrally; invertible for all
/// frequencies, requires beta_w > 0.
ScalarField inverse_helmholtz(const ScalarField& f, double beta_w);

/// Multiply the spectrum by exp(-(k1^2 s1^2 + k2^2 s2^2)/2); sigma = 0 is
/// the identity and the mean is always preserved.
ScalarField spectral_gaussian_smooth(const ScalarField& f, double sigma1, double sigma2);

/// Band-limited prolongation to a grid refined by an integer factor per
/// axis (zero padding in Fourier space, Nyquist energy split symmetrically).
ScalarField spectral_upsample(const ScalarField& f, int factor);
VectorField spectral_upsample(const VectorField& v, int factor);

/// Restriction by injection: keep every factor-th node.
ScalarField inject_downsample(const ScalarField& f, int factor);

/// Jacobian of a vector field, entry (i,j) = dv_i/dx_j.
TensorField2x2 jacobian(const VectorField& v);

}  // namespace velo
