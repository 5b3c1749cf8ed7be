#include "velo/transport.hpp"

#include "velo/operators.hpp"

#include <cmath>

namespace velo {

namespace {

void check_finite(const Array& a, const char* where) {
    if (!a.isFinite().all())
        throw instability_error(std::string(where) + ": non-finite values (CFL violated?)");
}

// grad(m).v
Array convect(const Grid2D& g, const Array& m, const VectorField& v) {
    VectorField gm = gradient({g, m});
    return gm.x * v.x + gm.y * v.y;
}

// div(q v)
Array div_product(const Grid2D& g, const Array& q, const VectorField& v) {
    return divergence({g, Array(q * v.x), Array(q * v.y)}).data;
}

}  // namespace

int cfl_timesteps(const VectorField& v, int nt_init, double safety) {
    if (nt_init < 1) throw std::invalid_argument("cfl_timesteps: n_t_init must be >= 1");
    if (safety <= 0.0 || safety > 1.0)
        throw std::invalid_argument("cfl_timesteps: safety must be in (0,1]");
    const double vmax = linf_norm(v);
    if (vmax == 0.0) return nt_init;
    const double bound = vmax / (safety * v.grid.min_h());
    const int nt = static_cast<int>(std::ceil(bound - 1e-12));
    return std::max(nt_init, std::max(nt, 1));
}

TimeSeriesField solve_state(const ScalarField& m_T, const VectorField& v, int nt) {
    const Grid2D& g = m_T.grid;
    TimeSeriesField out(g, nt);
    out.slices[0] = m_T.data;
    const double ht = out.dt();
    for (int j = 0; j < nt; ++j) {
        const Array& m = out.slices[j];
        Array mid = m - 0.5 * ht * convect(g, m, v);
        out.slices[j + 1] = m - ht * convect(g, mid, v);
        check_finite(out.slices[j + 1], "solve_state");
    }
    return out;
}

TimeSeriesField solve_adjoint(const ScalarField& m1, const ScalarField& m_R,
                              const VectorField& v, int nt) {
    const Grid2D& g = m1.grid;
    TimeSeriesField out(g, nt);
    out.slices[nt] = m_R.data - m1.data;
    const double ht = out.dt();
    // In reverse time s = 1 - t the equation reads d_s lambda = div(lambda v).
    for (int j = nt; j > 0; --j) {
        const Array& lam = out.slices[j];
        Array mid = lam + 0.5 * ht * div_product(g, lam, v);
        out.slices[j - 1] = lam + ht * div_product(g, mid, v);
        check_finite(out.slices[j - 1], "solve_adjoint");
    }
    return out;
}

TimeSeriesField solve_inc_state(const TimeSeriesField& m, const VectorField& v,
                                const VectorField& vt) {
    const Grid2D& g = m.grid;
    if (g != v.grid || g != vt.grid)
        throw std::invalid_argument("solve_inc_state: grids do not match");
    const int nt = m.nt;
    TimeSeriesField out(g, nt);
    const double ht = out.dt();
    for (int j = 0; j < nt; ++j) {
        Array m_half = 0.5 * (m.slices[j] + m.slices[j + 1]);
        const Array& mt = out.slices[j];
        Array mid = mt - 0.5 * ht * (convect(g, mt, v) + convect(g, m.slices[j], vt));
        out.slices[j + 1] = mt - ht * (convect(g, mid, v) + convect(g, m_half, vt));
        check_finite(out.slices[j + 1], "solve_inc_state");
    }
    return out;
}

TimeSeriesField solve_inc_adjoint(const TimeSeriesField& lambda, const VectorField& v,
                                  const VectorField& vt, const ScalarField& mt1,
                                  bool gauss_newton) {
    const Grid2D& g = lambda.grid;
    if (g != v.grid || g != vt.grid || g != mt1.grid)
        throw std::invalid_argument("solve_inc_adjoint: grids do not match");
    const int nt = lambda.nt;
    TimeSeriesField out(g, nt);
    out.slices[nt] = -mt1.data;
    const double ht = out.dt();
    for (int j = nt; j > 0; --j) {
        const Array& lt = out.slices[j];
        Array mid, next;
        if (gauss_newton) {
            mid = lt + 0.5 * ht * div_product(g, lt, v);
            next = lt + ht * div_product(g, mid, v);
        } else {
            Array lam_half = 0.5 * (lambda.slices[j] + lambda.slices[j - 1]);
            mid = lt + 0.5 * ht *
                       (div_product(g, lt, v) + div_product(g, lambda.slices[j], vt));
            next = lt + ht * (div_product(g, mid, v) + div_product(g, lam_half, vt));
        }
        out.slices[j - 1] = std::move(next);
        check_finite(out.slices[j - 1], "solve_inc_adjoint");
    }
    return out;
}

VectorField body_force(const TimeSeriesField& m, const TimeSeriesField& lambda) {
    const Grid2D& g = m.grid;
    if (g != lambda.grid || m.nt != lambda.nt)
        throw std::invalid_argument("body_force: series do not match");
    VectorField b(g);
    const double ht = m.dt();
    for (int j = 0; j <= m.nt; ++j) {
        const double w = (j == 0 || j == m.nt) ? 0.5 * ht : ht;
        VectorField gm = gradient({g, m.slices[j]});
        b.x += w * lambda.slices[j] * gm.x;
        b.y += w * lambda.slices[j] * gm.y;
    }
    return b;
}

VectorField inc_body_force(const TimeSeriesField& m, const TimeSeriesField& mt,
                           const TimeSeriesField& lambda, const TimeSeriesField& lt,
                           bool gauss_newton) {
    const Grid2D& g = m.grid;
    if (m.nt != lt.nt || g != lt.grid)
        throw std::invalid_argument("inc_body_force: series do not match");
    VectorField b(g);
    const double ht = m.dt();
    for (int j = 0; j <= m.nt; ++j) {
        const double w = (j == 0 || j == m.nt) ? 0.5 * ht : ht;
        VectorField gm = gradient({g, m.slices[j]});
        b.x += w * lt.slices[j] * gm.x;
        b.y += w * lt.slices[j] * gm.y;
        if (!gauss_newton) {
            VectorField gmt = gradient({g, mt.slices[j]});
            b.x += w * lambda.slices[j] * gmt.x;
            b.y += w * lambda.slices[j] * gmt.y;
        }
    }
    return b;
}

VectorField solve_displacement(const VectorField& v, int nt) {
    const Grid2D& g = v.grid;
    const double ht = 1.0 / nt;
    VectorField u(g);
    auto rhs = [&](const VectorField& uu) {
        TensorField2x2 ju = jacobian(uu);
        VectorField r(g);
        r.x = v.x - (ju.e11 * v.x + ju.e12 * v.y);
        r.y = v.y - (ju.e21 * v.x + ju.e22 * v.y);
        return r;
    };
    for (int j = 0; j < nt; ++j) {
        VectorField k1 = rhs(u);
        VectorField mid{g, Array(u.x + 0.5 * ht * k1.x), Array(u.y + 0.5 * ht * k1.y)};
        VectorField k2 = rhs(mid);
        u.x += ht * k2.x;
        u.y += ht * k2.y;
        check_finite(u.x, "solve_displacement");
        check_finite(u.y, "solve_displacement");
    }
    return u;
}

TensorField2x2 solve_defgrad(const VectorField& v, int nt) {
    const Grid2D& g = v.grid;
    const double ht = 1.0 / nt;
    TensorField2x2 jv = jacobian(v);
    TensorField2x2 f(g);
    f.e11.setOnes();
    f.e22.setOnes();
    auto rhs = [&](const TensorField2x2& ff) {
        TensorField2x2 r(g);
        auto advect = [&](const Array& entry) {
            VectorField ge = gradient({g, entry});
            return Array(ge.x * v.x + ge.y * v.y);
        };
        r.e11 = jv.e11 * ff.e11 + jv.e12 * ff.e21 - advect(ff.e11);
        r.e12 = jv.e11 * ff.e12 + jv.e12 * ff.e22 - advect(ff.e12);
        r.e21 = jv.e21 * ff.e11 + jv.e22 * ff.e21 - advect(ff.e21);
        r.e22 = jv.e21 * ff.e12 + jv.e22 * ff.e22 - advect(ff.e22);
        return r;
    };
    for (int j = 0; j < nt; ++j) {
        TensorField2x2 k1 = rhs(f);
        TensorField2x2 mid(g);
        mid.e11 = f.e11 + 0.5 * ht * k1.e11;
        mid.e12 = f.e12 + 0.5 * ht * k1.e12;
        mid.e21 = f.e21 + 0.5 * ht * k1.e21;
        mid.e22 = f.e22 + 0.5 * ht * k1.e22;
        TensorField2x2 k2 = rhs(mid);
        f.e11 += ht * k2.e11;
        f.e12 += ht * k2.e12;
        f.e21 += ht * k2.e21;
        f.e22 += ht * k2.e22;
        if (!f.finite()) throw instability_error("solve_defgrad: non-finite values");
    }
    return f;
}

}  // namespace velo
