#pragma once

#include "velo/grid.hpp"

#include <functional>
#include <random>
#include <vector>

namespace velo::testing {

/// A real trigonometric polynomial sum of a_m cos(k.x) + b_m sin(k.x) with
/// exact analytic derivatives, evaluated directly at grid nodes. Used as an
/// FFT-independent oracle for the spectral operators.
struct TrigPoly {
    struct Mode {
        int k1, k2;
        double a, b;
    };
    std::vector<Mode> modes;

    double eval(double x1, double x2) const {
        double s = 0.0;
        for (const auto& m : modes) {
            const double ph = m.k1 * x1 + m.k2 * x2;
            s += m.a * std::cos(ph) + m.b * std::sin(ph);
        }
        return s;
    }
    double eval_dx1(double x1, double x2) const {
        double s = 0.0;
        for (const auto& m : modes) {
            const double ph = m.k1 * x1 + m.k2 * x2;
            s += m.k1 * (-m.a * std::sin(ph) + m.b * std::cos(ph));
        }
        return s;
    }
    double eval_dx2(double x1, double x2) const {
        double s = 0.0;
        for (const auto& m : modes) {
            const double ph = m.k1 * x1 + m.k2 * x2;
            s += m.k2 * (-m.a * std::sin(ph) + m.b * std::cos(ph));
        }
        return s;
    }
    double eval_lap(double x1, double x2) const {
        double s = 0.0;
        for (const auto& m : modes) {
            const double ph = m.k1 * x1 + m.k2 * x2;
            const double ksq = double(m.k1) * m.k1 + double(m.k2) * m.k2;
            s += -ksq * (m.a * std::cos(ph) + m.b * std::sin(ph));
        }
        return s;
    }

    ScalarField sample(const Grid2D& g) const { return {g, nodes(g, [&](double a, double b) { return eval(a, b); })}; }
    ScalarField sample_dx1(const Grid2D& g) const { return {g, nodes(g, [&](double a, double b) { return eval_dx1(a, b); })}; }
    ScalarField sample_dx2(const Grid2D& g) const { return {g, nodes(g, [&](double a, double b) { return eval_dx2(a, b); })}; }
    ScalarField sample_lap(const Grid2D& g) const { return {g, nodes(g, [&](double a, double b) { return eval_lap(a, b); })}; }

    static Array nodes(const Grid2D& g, const std::function<double(double, double)>& f) {
        Array out(g.n1, g.n2);
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) out(i, j) = f(g.x1(i), g.x2(j));
        return out;
    }
};

/// Random band-limited polynomial with |k_i| <= kmax and smooth decay.
inline TrigPoly random_poly(int kmax, unsigned seed, bool zero_mean = false) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    TrigPoly p;
    for (int k1 = 0; k1 <= kmax; ++k1)
        for (int k2 = -kmax; k2 <= kmax; ++k2) {
            if (k1 == 0 && k2 < 0) continue;  // conjugate pair already covered
            if (zero_mean && k1 == 0 && k2 == 0) continue;
            const double w = 1.0 / (1.0 + k1 * k1 + k2 * k2);
            p.modes.push_back({k1, k2, w * gauss(rng), w * gauss(rng)});
        }
    return p;
}

inline ScalarField random_field(const Grid2D& g, int kmax, unsigned seed) {
    return random_poly(kmax, seed).sample(g);
}

inline VectorField random_vector_field(const Grid2D& g, int kmax, unsigned seed,
                                       double scale = 1.0) {
    ScalarField a = random_field(g, kmax, seed);
    ScalarField b = random_field(g, kmax, seed + 7919);
    return {g, Array(scale * a.data), Array(scale * b.data)};
}

/// Divergence-free field from an analytic stream function,
/// v = (d psi/dx2, -d psi/dx1).
inline VectorField random_divfree_field(const Grid2D& g, int kmax, unsigned seed,
                                        double scale = 1.0) {
    TrigPoly psi = random_poly(kmax, seed, true);
    ScalarField d2 = psi.sample_dx2(g);
    ScalarField d1 = psi.sample_dx1(g);
    return {g, Array(scale * d2.data), Array(-scale * d1.data)};
}

inline double max_abs_diff(const Array& a, const Array& b) {
    return (a - b).abs().maxCoeff();
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

/// Periodic bilinear interpolation (test-side oracle for map consistency).
inline double bilinear_periodic(const ScalarField& f, double x1, double x2) {
    const Grid2D& g = f.grid;
    const double t1 = (x1 + M_PI) / g.h1();
    const double t2 = (x2 + M_PI) / g.h2();
    const auto wrap = [](long i, int n) { return static_cast<int>(((i % n) + n) % n); };
    const long i0 = static_cast<long>(std::floor(t1));
    const long j0 = static_cast<long>(std::floor(t2));
    const double a = t1 - i0, b = t2 - j0;
    const int i1 = wrap(i0, g.n1), i2 = wrap(i0 + 1, g.n1);
    const int j1 = wrap(j0, g.n2), j2 = wrap(j0 + 1, g.n2);
    return (1 - a) * (1 - b) * f.data(i1, j1) + a * (1 - b) * f.data(i2, j1) +
           (1 - a) * b * f.data(i1, j2) + a * b * f.data(i2, j2);
}

}  // namespace velo::testing
