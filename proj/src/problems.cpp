#include "velo/problems.hpp"

#include "velo/operators.hpp"

#include <cstdio>
#include <functional>

namespace velo {

ScalarField normalize_and_presmooth(const ScalarField& raw, double sigma1, double sigma2) {
    const double lo = raw.data.minCoeff();
    const double hi = raw.data.maxCoeff();
    if (hi == lo) {
        std::fprintf(stderr, "[velo] warning: constant image, normalizing to zeros\n");
        return ScalarField(raw.grid);
    }
    ScalarField out{raw.grid, Array((raw.data - lo) / (hi - lo))};
    return spectral_gaussian_smooth(out, sigma1, sigma2);
}

namespace {

Array eval_nodes(const Grid2D& g, const std::function<double(double, double)>& f) {
    Array out(g.n1, g.n2);
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i) out(i, j) = f(g.x1(i), g.x2(j));
    return out;
}

// Periodized Gaussian bump (3x3 image sum keeps it smooth across the seam).
double gauss_bump(double x1, double x2, double c1, double c2, double s) {
    double v = 0.0;
    for (int p = -1; p <= 1; ++p)
        for (int q = -1; q <= 1; ++q) {
            const double d1 = x1 - c1 + 2.0 * M_PI * p;
            const double d2 = x2 - c2 + 2.0 * M_PI * q;
            v += std::exp(-0.5 * (d1 * d1 + d2 * d2) / (s * s));
        }
    return v;
}

}  // namespace

RegistrationProblem gen_blob_problem(const Grid2D& grid, double offset1, double offset2) {
    if (std::hypot(offset1, offset2) >= 0.5 * M_PI)
        throw std::invalid_argument("gen_blob_problem: |offset| must be < pi/2");
    const double s = 0.5;
    auto image = [&](double shift1, double shift2) {
        return eval_nodes(grid, [&](double x1, double x2) {
            return gauss_bump(x1 + shift1, x2 + shift2, -0.6, -0.2, s) +
                   0.8 * gauss_bump(x1 + shift1, x2 + shift2, 0.5, 0.4, s);
        });
    };
    RegistrationProblem p;
    p.m_R = {grid, image(0.0, 0.0)};
    // m_T(x) = m_R(x + offset): transport along the constant velocity
    // `offset` for unit time carries m_T onto m_R.
    p.m_T = {grid, image(offset1, offset2)};
    p.provenance = "blobs";
    return p;
}

RegistrationProblem gen_sliding_rectangles(const Grid2D& grid, double shift) {
    const double sigma = 2.0 * grid.min_h();  // edge smoothing
    const double gap = grid.min_h();          // half width of the interface gap
    const double width = 0.8 * M_PI, height = 0.5 * M_PI;
    auto image = [&](double right_shift) {
        Array sharp = eval_nodes(grid, [&](double x1, double x2) {
            const bool left = x1 > -width && x1 < -gap && std::abs(x2) < 0.5 * height;
            const bool right = x1 > gap && x1 < width &&
                               std::abs(x2 - right_shift) < 0.5 * height;
            return left || right ? 1.0 : 0.0;
        });
        return spectral_gaussian_smooth({grid, std::move(sharp)}, sigma, sigma).data;
    };
    RegistrationProblem p;
    p.m_R = {grid, image(0.0)};
    p.m_T = {grid, image(shift)};
    p.provenance = "rectangles";
    return p;
}

RegistrationProblem gen_sliding_vent(const Grid2D& grid, double shift) {
    const double sigma = 2.0 * grid.min_h();
    const double r_in = 0.35 * M_PI, r_out = 0.75 * M_PI;
    const double theta_half = 0.75 * M_PI;  // vent opening on the right
    const double r_mid = 0.5 * (r_in + r_out);
    auto image = [&](double rot) {
        Array sharp = eval_nodes(grid, [&](double x1, double x2) {
            const double r = std::hypot(x1, x2);
            double th = std::atan2(x2, x1) - rot;
            if (th > M_PI) th -= 2.0 * M_PI;
            if (th < -M_PI) th += 2.0 * M_PI;
            return r > r_in && r < r_out && std::abs(th) < theta_half ? 1.0 : 0.0;
        });
        return spectral_gaussian_smooth({grid, std::move(sharp)}, sigma, sigma).data;
    };
    RegistrationProblem p;
    p.m_R = {grid, image(0.0)};
    p.m_T = {grid, image(shift / r_mid)};
    p.provenance = "vent";
    return p;
}

}  // namespace velo
