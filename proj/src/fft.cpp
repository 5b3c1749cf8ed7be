#include "velo/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>

namespace velo {

// Column-major Eigen storage (n1 rows contiguous) viewed as a row-major
// buffer has dimensions (n2, n1), hence the swapped extents in the plans.
// FFTW_ESTIMATE keeps plan selection deterministic across runs.
Spectral::Spectral(const Grid2D& grid) : grid_(grid) {
    const int n1 = grid_.n1, n2 = grid_.n2;
    real_buf_ = fftw_alloc_real(static_cast<size_t>(n1) * n2);
    auto* cbuf = fftw_alloc_complex(static_cast<size_t>(n1 / 2 + 1) * n2);
    cplx_buf_ = cbuf;
    plan_fwd_ = fftw_plan_dft_r2c_2d(n2, n1, real_buf_, cbuf, FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_c2r_2d(n2, n1, cbuf, real_buf_, FFTW_ESTIMATE);
}

Spectral::~Spectral() {
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
    fftw_free(real_buf_);
    fftw_free(static_cast<fftw_complex*>(cplx_buf_));
}

Spectral& Spectral::of(const Grid2D& grid) {
    static std::mutex registry_mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<Spectral>> registry;
    std::lock_guard<std::mutex> lock(registry_mutex);
    auto key = std::make_pair(grid.n1, grid.n2);
    auto it = registry.find(key);
    if (it == registry.end())
        it = registry.emplace(key, std::unique_ptr<Spectral>(new Spectral(grid))).first;
    return *it->second;
}

CArray Spectral::forward(const Array& values) {
    const int n1 = grid_.n1, n2 = grid_.n2;
    CArray out(n1 / 2 + 1, n2);
    std::lock_guard<std::mutex> lock(mutex_);
    std::memcpy(real_buf_, values.data(), sizeof(double) * grid_.size());
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    std::memcpy(out.data(), cplx_buf_, sizeof(fftw_complex) * out.size());
    return out;
}

Array Spectral::inverse(const CArray& spectrum) {
    const int n1 = grid_.n1, n2 = grid_.n2;
    Array out(n1, n2);
    std::lock_guard<std::mutex> lock(mutex_);
    std::memcpy(cplx_buf_, spectrum.data(), sizeof(fftw_complex) * spectrum.size());
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    const double scale = 1.0 / grid_.size();
    for (long i = 0; i < grid_.size(); ++i) out.data()[i] = real_buf_[i] * scale;
    return out;
}

}  // namespace velo
