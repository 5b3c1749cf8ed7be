#include "velo/metrics.hpp"

#include "velo/operators.hpp"
#include "velo/transport.hpp"

#include <stdexcept>

namespace velo {

double relative_gradient(const VectorField& g_k, const VectorField& g_0) {
    const double den = g_0.x.square().sum() + g_0.y.square().sum();
    if (den == 0.0) throw std::invalid_argument("relative_gradient: |g_0| is zero");
    return (g_k.x.square().sum() + g_k.y.square().sum()) / den;
}

double relative_residual(const ScalarField& m_R, const ScalarField& m1,
                         const ScalarField& m_T) {
    const double den = (m_R.data - m_T.data).square().sum();
    if (den == 0.0) throw std::invalid_argument("relative_residual: m_R equals m_T");
    return (m_R.data - m1.data).square().sum() / den;
}

DeformationAnalysis analyze_deformation(const VectorField& v, int nt,
                                        const ScalarField* mask) {
    DeformationAnalysis out;
    out.u1 = solve_displacement(v, nt);
    out.f1 = solve_defgrad(v, nt);
    out.det_f1 = ScalarField{v.grid,
                             Array(out.f1.e11 * out.f1.e22 - out.f1.e12 * out.f1.e21)};
    Array dist = ((out.f1.e11 - 1.0).square() + out.f1.e12.square() +
                  out.f1.e21.square() + (out.f1.e22 - 1.0).square()).sqrt();

    if (mask != nullptr) {
        if (mask->grid != v.grid)
            throw std::invalid_argument("analyze_deformation: mask grid mismatch");
        double dmin = std::numeric_limits<double>::infinity();
        double dmax = -dmin, dsum = 0.0, distsum = 0.0, distmax = 0.0;
        long count = 0;
        for (long i = 0; i < v.grid.size(); ++i) {
            if (mask->data.data()[i] == 0.0) continue;
            const double d = out.det_f1.data.data()[i];
            dmin = std::min(dmin, d);
            dmax = std::max(dmax, d);
            dsum += d;
            distsum += dist.data()[i];
            distmax = std::max(distmax, dist.data()[i]);
            ++count;
        }
        if (count == 0) throw std::invalid_argument("analyze_deformation: empty mask");
        out.det_min = dmin;
        out.det_max = dmax;
        out.det_mean = dsum / count;
        out.dist_mean = distsum / count;
        out.dist_max = distmax;
    } else {
        out.det_min = out.det_f1.data.minCoeff();
        out.det_max = out.det_f1.data.maxCoeff();
        out.det_mean = out.det_f1.data.mean();
        out.dist_mean = dist.mean();
        out.dist_max = dist.maxCoeff();
    }
    return out;
}

OverlapScores overlap(const ScalarField& label_R, const ScalarField& label_T) {
    if (label_R.grid != label_T.grid)
        throw std::invalid_argument("overlap: label grids differ");
    long n_r = 0, n_t = 0, n_inter = 0, n_union = 0;
    for (long i = 0; i < label_R.grid.size(); ++i) {
        const double r = label_R.data.data()[i];
        const double t = label_T.data.data()[i];
        if ((r != 0.0 && r != 1.0) || (t != 0.0 && t != 1.0))
            throw std::invalid_argument("overlap: labels must be binary {0,1}");
        n_r += r == 1.0;
        n_t += t == 1.0;
        n_inter += r == 1.0 && t == 1.0;
        n_union += r == 1.0 || t == 1.0;
    }
    if (n_union == 0) throw std::invalid_argument("overlap: both labels empty");
    if (n_t == 0) throw std::invalid_argument("overlap: empty template label (FPE undefined)");
    if (n_r == 0) throw std::invalid_argument("overlap: empty reference label (FNE undefined)");
    OverlapScores s;
    s.jsc = static_cast<double>(n_inter) / n_union;
    s.dsc = 2.0 * n_inter / (static_cast<double>(n_r) + n_t);
    s.fpe = static_cast<double>(n_t - n_inter) / n_t;  // #(L_T \ L_R) / #L_T
    s.fne = static_cast<double>(n_r - n_inter) / n_r;  // #(L_R \ L_T) / #L_R
    return s;
}

ScalarField transport_labels(const ScalarField& label_T, const VectorField& v,
                             int upsample, double sigma_factor, double threshold,
                             double cfl_safety, int nt_init) {
    if (label_T.grid != v.grid)
        throw std::invalid_argument("transport_labels: grids differ");
    ScalarField fine = spectral_upsample(label_T, upsample);
    const double sigma = sigma_factor * fine.grid.min_h();
    fine = spectral_gaussian_smooth(fine, sigma, sigma);
    VectorField v_fine = spectral_upsample(v, upsample);
    const int seed = nt_init > 0 ? nt_init : 2 * std::max(fine.grid.n1, fine.grid.n2);
    const int nt = cfl_timesteps(v_fine, seed, cfl_safety);
    TimeSeriesField m = solve_state(fine, v_fine, nt);
    ScalarField moved{fine.grid, Array((m.back() >= threshold).cast<double>())};
    return inject_downsample(moved, upsample);
}

ScalarField shear_magnitude(const VectorField& u1, InterfaceAxis axis) {
    if (axis == InterfaceAxis::horizontal)
        return {u1.grid, Array(deriv_x2({u1.grid, u1.x}).data.abs())};
    return {u1.grid, Array(deriv_x1({u1.grid, u1.y}).data.abs())};
}

}  // namespace velo
