#pragma once

#include "velo/grid.hpp"

#include <optional>
#include <string>

namespace velo {

/// A pair of images to register, with optional binary label maps.
struct RegistrationProblem {
    ScalarField m_R;  ///< reference (fixed) image
    ScalarField m_T;  ///< template image
    std::optional<ScalarField> label_R;
    std::optional<ScalarField> label_T;
    std::string provenance;
};

/// Affine map of [min,max] to [0,1] followed by spectral Gaussian
/// smoothing. A constant image maps to zeros (with a warning on stderr).
/// Smoothing may push values slightly outside [0,1]; they are not clipped.
ScalarField normalize_and_presmooth(const ScalarField& raw, double sigma1, double sigma2);

/// Two Gaussian bumps; the template is the reference translated by
/// `offset` (the ground-truth stationary velocity is the translation).
RegistrationProblem gen_blob_problem(const Grid2D& grid, double offset1, double offset2);

/// Two smoothed equal-intensity rectangles sharing a vertical interface;
/// in the template the right rectangle slides tangentially (along x2) by
/// `shift`. Edges are smoothed with sigma = 2h.
RegistrationProblem gen_sliding_rectangles(const Grid2D& grid, double shift = 0.4 * M_PI);

/// A smoothed annular sector (vent); in the template the sector is rotated
/// so its mid-radius arc moves tangentially by `shift`.
RegistrationProblem gen_sliding_vent(const Grid2D& grid, double shift = 0.3 * M_PI);

}  // namespace velo
