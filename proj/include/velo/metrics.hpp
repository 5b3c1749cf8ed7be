#pragma once

#include "velo/grid.hpp"

namespace velo {

/// Label-overlap scores; dsc = 2 jsc / (1 + jsc) by construction.
struct OverlapScores {
    double jsc = 0.0;
    double dsc = 0.0;
    double fpe = 0.0;
    double fne = 0.0;
};

/// Deformation-regularity diagnostics derived from the displacement and
/// deformation-gradient transport solves.
struct DeformationAnalysis {
    VectorField u1;       ///< displacement at t = 1 (Eulerian map y = x - u1)
    TensorField2x2 f1;    ///< deformation gradient at t = 1
    ScalarField det_f1;   ///< pointwise determinant
    double det_min = 0.0, det_mean = 0.0, det_max = 0.0;
    double dist_mean = 0.0, dist_max = 0.0;  ///< |F1 - I|_F statistics
};

/// |g_k|^2 / |g_0|^2 (squared norms, as reported in the performance tables).
double relative_gradient(const VectorField& g_k, const VectorField& g_0);

/// |m_R - m_1|^2 / |m_R - m_T|^2.
double relative_residual(const ScalarField& m_R, const ScalarField& m1,
                         const ScalarField& m_T);

/// Run the displacement and deformation-gradient solves and collect det/
/// distance statistics; an optional 0/1 mask restricts the statistics.
DeformationAnalysis analyze_deformation(const VectorField& v, int nt,
                                        const ScalarField* mask);

/// Set-cardinality overlap scores between binary {0,1} label maps.
/// Empty-label denominators are reported as errors.
OverlapScores overlap(const ScalarField& label_R, const ScalarField& label_T);

/// Transport a binary label map: spectral prolongation by `upsample`,
/// Gaussian smoothing with sigma = sigma_factor * h_fine, transport with the
/// prolonged velocity, threshold, restrict by injection.
ScalarField transport_labels(const ScalarField& label_T, const VectorField& v,
                             int upsample = 4, double sigma_factor = 3.0,
                             double threshold = 0.5, double cfl_safety = 0.8,
                             int nt_init = 0);

enum class InterfaceAxis { horizontal, vertical };

/// Magnitude of the cross-derivative of the displacement component tangent
/// to a sliding interface: |d u1 / d x2| for a horizontal interface,
/// |d u2 / d x1| for a vertical one.
ScalarField shear_magnitude(const VectorField& u1, InterfaceAxis axis);

}  // namespace velo
