#pragma once

#include "velo/grid.hpp"

#include <complex>
#include <memory>
#include <mutex>

namespace velo {

/// Real-to-complex 2D transform bound to one grid. Plans and scratch
/// buffers are cached per grid size and guarded for exclusive use, so
/// concurrent callers serialize on the transform but never race.
///
/// Conventions (fixed once, all spectral symbols rely on them):
///   forward:  unnormalized DFT, F(k) = sum_x f(x) e^{-i k.x}
///   inverse:  scaled by 1/(n1*n2), so inverse(forward(f)) == f
/// Spectra are stored in the half-spectrum layout (n1/2+1) x n2 with
/// k1 = a for a = 0..n1/2 and k2 = b <= n2/2 ? b : b - n2.
class Spectral {
  public:
    /// Shared workspace for a grid size (process lifetime).
    static Spectral& of(const Grid2D& grid);

    CArray forward(const Array& values);
    Array inverse(const CArray& spectrum);

    const Grid2D& grid() const { return grid_; }
    int k1(int a) const { return a; }
    int k2(int b) const { return b <= grid_.n2 / 2 ? b : b - grid_.n2; }
    int spec_rows() const { return grid_.n1 / 2 + 1; }
    int spec_cols() const { return grid_.n2; }

    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;
    ~Spectral();

  private:
    explicit Spectral(const Grid2D& grid);

    Grid2D grid_;
    std::mutex mutex_;
    double* real_buf_ = nullptr;
    void* cplx_buf_ = nullptr;  // fftw_complex*
    void* plan_fwd_ = nullptr;  // fftw_plan
    void* plan_bwd_ = nullptr;  // fftw_plan
};

}  // namespace velo
