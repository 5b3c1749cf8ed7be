#include "velo/operators.hpp"

#include <complex>

namespace velo {

namespace {

using C = std::complex<double>;
constexpr C kI{0.0, 1.0};

// Apply f(k1, k2) -> multiplier over the half spectrum in place.
template <typename Fn>
void for_each_mode(Spectral& sp, CArray& spec, Fn&& fn) {
    const int rows = sp.spec_rows(), cols = sp.spec_cols();
    for (int b = 0; b < cols; ++b) {
        const int k2 = sp.k2(b);
        for (int a = 0; a < rows; ++a) fn(spec(a, b), sp.k1(a), k2);
    }
}

bool is_nyquist1(const Grid2D& g, int k1) { return k1 == g.n1 / 2; }
bool is_nyquist2(const Grid2D& g, int k2) { return k2 == -g.n2 / 2; }

}  // namespace

ScalarField deriv_x1(const ScalarField& f) {
    auto& sp = Spectral::of(f.grid);
    CArray spec = sp.forward(f.data);
    for_each_mode(sp, spec, [&](C& c, int k1, int) {
        c *= is_nyquist1(f.grid, k1) ? C(0.0) : kI * static_cast<double>(k1);
    });
    return {f.grid, sp.inverse(spec)};
}

ScalarField deriv_x2(const ScalarField& f) {
    auto& sp = Spectral::of(f.grid);
    CArray spec = sp.forward(f.data);
    for_each_mode(sp, spec, [&](C& c, int, int k2) {
        c *= is_nyquist2(f.grid, k2) ? C(0.0) : kI * static_cast<double>(k2);
    });
    return {f.grid, sp.inverse(spec)};
}

VectorField gradient(const ScalarField& f) {
    auto& sp = Spectral::of(f.grid);
    CArray spec = sp.forward(f.data);
    CArray g1 = spec, g2 = spec;
    for_each_mode(sp, g1, [&](C& c, int k1, int) {
        c *= is_nyquist1(f.grid, k1) ? C(0.0) : kI * static_cast<double>(k1);
    });
    for_each_mode(sp, g2, [&](C& c, int, int k2) {
        c *= is_nyquist2(f.grid, k2) ? C(0.0) : kI * static_cast<double>(k2);
    });
    return {f.grid, sp.inverse(g1), sp.inverse(g2)};
}

ScalarField divergence(const VectorField& v) {
    auto& sp = Spectral::of(v.grid);
    CArray s1 = sp.forward(v.x);
    CArray s2 = sp.forward(v.y);
    for_each_mode(sp, s1, [&](C& c, int k1, int) {
        c *= is_nyquist1(v.grid, k1) ? C(0.0) : kI * static_cast<double>(k1);
    });
    for_each_mode(sp, s2, [&](C& c, int, int k2) {
        c *= is_nyquist2(v.grid, k2) ? C(0.0) : kI * static_cast<double>(k2);
    });
    s1 += s2;
    return {v.grid, sp.inverse(s1)};
}

VectorField divergence_tensor(const TensorField2x2& t) {
    VectorField row1{t.grid, t.e11, t.e12};
    VectorField row2{t.grid, t.e21, t.e22};
    ScalarField d1 = divergence(row1);
    ScalarField d2 = divergence(row2);
    return {t.grid, std::move(d1.data), std::move(d2.data)};
}

ScalarField laplacian(const ScalarField& f) {
    auto& sp = Spectral::of(f.grid);
    CArray spec = sp.forward(f.data);
    for_each_mode(sp, spec, [](C& c, int k1, int k2) {
        c *= -static_cast<double>(k1) * k1 - static_cast<double>(k2) * k2;
    });
    return {f.grid, sp.inverse(spec)};
}

VectorField laplacian_vector(const VectorField& v) {
    ScalarField lx = laplacian({v.grid, v.x});
    ScalarField ly = laplacian({v.grid, v.y});
    return {v.grid, std::move(lx.data), std::move(ly.data)};
}

ScalarField bilaplacian(const ScalarField& f) {
    auto& sp = Spectral::of(f.grid);
    CArray spec = sp.forward(f.data);
    for_each_mode(sp, spec, [](C& c, int k1, int k2) {
        const double ksq = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
        c *= ksq * ksq;
    });
    return {f.grid, sp.inverse(spec)};
}

VectorField bilaplacian_vector(const VectorField& v) {
    ScalarField bx = bilaplacian({v.grid, v.x});
    ScalarField by = bilaplacian({v.grid, v.y});
    return {v.grid, std::move(bx.data), std::move(by.data)};
}

ScalarField curl(const VectorField& v) {
    ScalarField a = deriv_x1({v.grid, v.y});
    ScalarField b = deriv_x2({v.grid, v.x});
    a.data -= b.data;
    return a;
}

VectorField curl(const ScalarField& f) {
    ScalarField d2 = deriv_x2(f);
    ScalarField d1 = deriv_x1(f);
    return {f.grid, std::move(d2.data), Array(-d1.data)};
}

ScalarField inverse_laplacian(const ScalarField& f) {
    auto& sp = Spectral::of(f.grid);
    CArray spec = sp.forward(f.data);
    for_each_mode(sp, spec, [](C& c, int k1, int k2) {
        const double ksq = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
        c = ksq == 0.0 ? C(0.0) : c / (-ksq);
    });
    return {f.grid, sp.inverse(spec)};
}

ScalarField inverse_helmholtz(const ScalarField& f, double beta_w) {
    if (beta_w <= 0.0) throw std::invalid_argument("inverse_helmholtz: beta_w must be > 0");
    auto& sp = Spectral::of(f.grid);
    CArray spec = sp.forward(f.data);
    for_each_mode(sp, spec, [beta_w](C& c, int k1, int k2) {
        const double ksq = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
        c /= beta_w * (ksq + 1.0);
    });
    return {f.grid, sp.inverse(spec)};
}

ScalarField spectral_gaussian_smooth(const ScalarField& f, double sigma1, double sigma2) {
    if (sigma1 < 0.0 || sigma2 < 0.0)
        throw std::invalid_argument("spectral_gaussian_smooth: sigma must be >= 0");
    if (sigma1 == 0.0 && sigma2 == 0.0) return f;
    auto& sp = Spectral::of(f.grid);
    CArray spec = sp.forward(f.data);
    for_each_mode(sp, spec, [=](C& c, int k1, int k2) {
        const double e = k1 * static_cast<double>(k1) * sigma1 * sigma1 +
                         k2 * static_cast<double>(k2) * sigma2 * sigma2;
        c *= std::exp(-0.5 * e);
    });
    return {f.grid, sp.inverse(spec)};
}

namespace {

// Full complex spectrum of a real field, index k = 0..n-1 mapping to
// frequencies 0..n/2, -(n/2-1)..-1.
CArray full_spectrum(Spectral& sp, const Array& values) {
    const Grid2D& g = sp.grid();
    CArray half = sp.forward(values);
    CArray full(g.n1, g.n2);
    for (int b = 0; b < g.n2; ++b) {
        for (int a = 0; a <= g.n1 / 2; ++a) full(a, b) = half(a, b);
        for (int a = g.n1 / 2 + 1; a < g.n1; ++a) {
            const int bc = b == 0 ? 0 : g.n2 - b;
            full(a, b) = std::conj(half(g.n1 - a, bc));
        }
    }
    return full;
}

}  // namespace

ScalarField spectral_upsample(const ScalarField& f, int factor) {
    if (factor < 1) throw std::invalid_argument("spectral_upsample: factor must be >= 1");
    if (factor == 1) return f;
    const Grid2D& g = f.grid;
    const Grid2D fine(g.n1 * factor, g.n2 * factor);
    auto& sp = Spectral::of(g);
    auto& spf = Spectral::of(fine);

    CArray coarse = full_spectrum(sp, f.data);
    // Split Nyquist rows/columns onto the +/- frequencies of the fine grid
    // so the interpolant stays real and interpolates the samples.
    const int ny1 = g.n1 / 2, ny2 = g.n2 / 2;
    CArray fine_full = CArray::Zero(fine.n1, fine.n2);
    auto fine_index1 = [&](int k1) { return k1 >= 0 ? k1 : fine.n1 + k1; };
    auto fine_index2 = [&](int k2) { return k2 >= 0 ? k2 : fine.n2 + k2; };
    for (int b = 0; b < g.n2; ++b) {
        const int k2 = b <= ny2 ? b : b - g.n2;
        for (int a = 0; a < g.n1; ++a) {
            const int k1 = a <= ny1 ? a : a - g.n1;
            C c = coarse(a, b);
            double w1 = 1.0, w2 = 1.0;
            int k1s[2] = {k1, k1}, k2s[2] = {k2, k2};
            if (std::abs(k1) == ny1) { w1 = 0.5; k1s[0] = ny1; k1s[1] = -ny1; }
            if (std::abs(k2) == ny2) { w2 = 0.5; k2s[0] = ny2; k2s[1] = -ny2; }
            for (int i1 = 0; i1 < (w1 < 1.0 ? 2 : 1); ++i1)
                for (int i2 = 0; i2 < (w2 < 1.0 ? 2 : 1); ++i2)
                    fine_full(fine_index1(k1s[i1]), fine_index2(k2s[i2])) += w1 * w2 * c;
        }
    }
    // Back to the half-spectrum layout with the value-preserving scale.
    const double scale = static_cast<double>(fine.size()) / g.size();
    CArray half(spf.spec_rows(), spf.spec_cols());
    for (int b = 0; b < fine.n2; ++b)
        for (int a = 0; a < spf.spec_rows(); ++a) half(a, b) = fine_full(a, b) * scale;
    return {fine, spf.inverse(half)};
}

VectorField spectral_upsample(const VectorField& v, int factor) {
    ScalarField fx = spectral_upsample({v.grid, v.x}, factor);
    ScalarField fy = spectral_upsample({v.grid, v.y}, factor);
    return {fx.grid, std::move(fx.data), std::move(fy.data)};
}

ScalarField inject_downsample(const ScalarField& f, int factor) {
    if (factor < 1) throw std::invalid_argument("inject_downsample: factor must be >= 1");
    if (f.grid.n1 % factor != 0 || f.grid.n2 % factor != 0)
        throw std::invalid_argument("inject_downsample: grid not divisible by factor");
    const Grid2D coarse(f.grid.n1 / factor, f.grid.n2 / factor);
    Array out(coarse.n1, coarse.n2);
    for (int j = 0; j < coarse.n2; ++j)
        for (int i = 0; i < coarse.n1; ++i) out(i, j) = f.data(i * factor, j * factor);
    return {coarse, std::move(out)};
}

TensorField2x2 jacobian(const VectorField& v) {
    TensorField2x2 out(v.grid);
    VectorField gx = gradient({v.grid, v.x});
    VectorField gy = gradient({v.grid, v.y});
    out.e11 = std::move(gx.x);
    out.e12 = std::move(gx.y);
    out.e21 = std::move(gy.x);
    out.e22 = std::move(gy.y);
    return out;
}

}  // namespace velo
