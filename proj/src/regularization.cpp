#include "velo/regularization.hpp"

#include "velo/fft.hpp"
#include "velo/operators.hpp"

#include <cmath>
#include <complex>

namespace velo {

void RegConfig::validate() const {
    if (beta_v <= 0.0) throw std::invalid_argument("RegConfig: beta_v must be > 0");
    if (gamma != 0 && gamma != 1) throw std::invalid_argument("RegConfig: gamma must be 0 or 1");
    if (gamma == 1 && !incompressible && beta_w <= 0.0)
        throw std::invalid_argument("RegConfig: beta_w must be > 0 for the mass-source mode");
    if (model == RegModel::NonlinearStokes && nu <= 0.0)
        throw std::invalid_argument("RegConfig: nu must be > 0");
    if (eps_visc <= 0.0) throw std::invalid_argument("RegConfig: eps_visc must be > 0");
}

TensorField2x2 strain_rate(const VectorField& v) {
    TensorField2x2 j = jacobian(v);
    TensorField2x2 e(v.grid);
    e.e11 = std::move(j.e11);
    e.e22 = std::move(j.e22);
    e.e12 = 0.5 * (j.e12 + j.e21);
    e.e21 = e.e12;
    return e;
}

ScalarField effective_viscosity(const VectorField& v, double nu, double eps_visc) {
    if (nu <= 0.0) throw std::invalid_argument("effective_viscosity: nu must be > 0");
    TensorField2x2 e = strain_rate(v);
    Array tr = e.e11.square() + e.e22.square() + 2.0 * e.e12.square() + eps_visc;
    const double expo = (1.0 - nu) / (2.0 * nu);
    return {v.grid, Array(tr.pow(expo))};
}

double reg_energy_v(const VectorField& v, const RegConfig& cfg) {
    cfg.validate();
    const double area = v.grid.cell_area();
    switch (cfg.model) {
        case RegModel::H1Seminorm: {
            TensorField2x2 j = jacobian(v);
            return (j.e11.square() + j.e12.square() + j.e21.square() + j.e22.square())
                       .sum() * area;
        }
        case RegModel::H2Seminorm: {
            VectorField lv = laplacian_vector(v);
            return (lv.x.square() + lv.y.square()).sum() * area;
        }
        case RegModel::NonlinearStokes: {
            TensorField2x2 e = strain_rate(v);
            Array tr = e.e11.square() + e.e22.square() + 2.0 * e.e12.square();
            const double s = (1.0 + cfg.nu) / (2.0 * cfg.nu);
            const double pref = 2.0 * cfg.nu / (cfg.nu + 1.0);
            // eps-shifted integrand, rebased so the energy of v = 0 is 0
            return pref * ((tr + cfg.eps_visc).pow(s) - std::pow(cfg.eps_visc, s)).sum() * area;
        }
        case RegModel::TotalVariation: {
            TensorField2x2 j = jacobian(v);
            Array gg = j.e11.square() + j.e12.square() + j.e21.square() + j.e22.square();
            return ((gg + cfg.eps_visc).sqrt() - std::sqrt(cfg.eps_visc)).sum() * area;
        }
    }
    return 0.0;
}

namespace {

VectorField apply_quadratic_A(const VectorField& v, RegModel model) {
    if (model == RegModel::H1Seminorm) {
        VectorField out = laplacian_vector(v);
        out.x = -out.x;
        out.y = -out.y;
        return out;
    }
    return bilaplacian_vector(v);
}

}  // namespace

VectorField apply_A(const VectorField& v, const RegConfig& cfg) {
    cfg.validate();
    switch (cfg.model) {
        case RegModel::H1Seminorm:
        case RegModel::H2Seminorm:
            return apply_quadratic_A(v, cfg.model);
        case RegModel::NonlinearStokes: {
            TensorField2x2 e = strain_rate(v);
            ScalarField eta = effective_viscosity(v, cfg.nu, cfg.eps_visc);
            TensorField2x2 t(v.grid);
            t.e11 = 2.0 * eta.data * e.e11;
            t.e12 = 2.0 * eta.data * e.e12;
            t.e21 = t.e12;
            t.e22 = 2.0 * eta.data * e.e22;
            VectorField out = divergence_tensor(t);
            out.x = -out.x;
            out.y = -out.y;
            return out;
        }
        case RegModel::TotalVariation: {
            TensorField2x2 j = jacobian(v);
            Array sigma = (j.e11.square() + j.e12.square() + j.e21.square() +
                           j.e22.square() + cfg.eps_visc).rsqrt();
            TensorField2x2 t(v.grid);
            t.e11 = sigma * j.e11;
            t.e12 = sigma * j.e12;
            t.e21 = sigma * j.e21;
            t.e22 = sigma * j.e22;
            VectorField out = divergence_tensor(t);
            out.x = -out.x;
            out.y = -out.y;
            return out;
        }
    }
    return VectorField(v.grid);
}

VectorField apply_B(const VectorField& v, const VectorField& vt, const RegConfig& cfg) {
    cfg.validate();
    if (cfg.quadratic()) return apply_quadratic_A(vt, cfg.model);
    if (cfg.model == RegModel::NonlinearStokes) {
        TensorField2x2 e = strain_rate(v);
        TensorField2x2 et = strain_rate(vt);
        ScalarField eta = effective_viscosity(v, cfg.nu, cfg.eps_visc);
        Array denom = e.e11.square() + e.e22.square() + 2.0 * e.e12.square() + cfg.eps_visc;
        Array inner = e.e11 * et.e11 + e.e22 * et.e22 + 2.0 * e.e12 * et.e12;
        const double c = (1.0 - cfg.nu) / cfg.nu;
        Array q = c * inner / denom;
        TensorField2x2 t(v.grid);
        t.e11 = 2.0 * eta.data * (et.e11 + q * e.e11);
        t.e12 = 2.0 * eta.data * (et.e12 + q * e.e12);
        t.e21 = t.e12;
        t.e22 = 2.0 * eta.data * (et.e22 + q * e.e22);
        VectorField out = divergence_tensor(t);
        out.x = -out.x;
        out.y = -out.y;
        return out;
    }
    // Smoothed TV: the nu -> inf limit of the strain-dependent model with
    // grad(v) in place of E, so the rank-one factor carries a minus sign.
    TensorField2x2 j = jacobian(v);
    TensorField2x2 jt = jacobian(vt);
    Array denom = j.e11.square() + j.e12.square() + j.e21.square() + j.e22.square() +
                  cfg.eps_visc;
    Array sigma = denom.rsqrt();
    Array inner = j.e11 * jt.e11 + j.e12 * jt.e12 + j.e21 * jt.e21 + j.e22 * jt.e22;
    Array q = -inner / denom;
    TensorField2x2 t(v.grid);
    t.e11 = sigma * (jt.e11 + q * j.e11);
    t.e12 = sigma * (jt.e12 + q * j.e12);
    t.e21 = sigma * (jt.e21 + q * j.e21);
    t.e22 = sigma * (jt.e22 + q * j.e22);
    VectorField out = divergence_tensor(t);
    out.x = -out.x;
    out.y = -out.y;
    return out;
}

double reg_energy_w(const ScalarField& w, double beta_w) {
    if (beta_w <= 0.0) throw std::invalid_argument("reg_energy_w: beta_w must be > 0");
    VectorField gw = gradient(w);
    return ((gw.x.square() + gw.y.square() + w.data.square())).sum() * w.grid.cell_area();
}

ScalarField apply_w_operator(const ScalarField& w, double beta_w) {
    if (beta_w <= 0.0) throw std::invalid_argument("apply_w_operator: beta_w must be > 0");
    ScalarField lw = laplacian(w);
    return {w.grid, Array(beta_w * (w.data - lw.data))};
}

VectorField apply_preconditioner(const VectorField& r, const VectorField& /*v*/,
                                 const RegConfig& cfg) {
    cfg.validate();
    auto& sp = Spectral::of(r.grid);
    const int order = cfg.model == RegModel::H2Seminorm ? 2 : 1;
    auto invert = [&](const Array& values) {
        CArray spec = sp.forward(values);
        for (int b = 0; b < sp.spec_cols(); ++b) {
            const double k2 = sp.k2(b);
            for (int a = 0; a < sp.spec_rows(); ++a) {
                const double ksq = static_cast<double>(a) * a + k2 * k2;
                const double symbol = ksq == 0.0 ? cfg.beta_v
                                                 : cfg.beta_v * (order == 1 ? ksq : ksq * ksq);
                spec(a, b) /= symbol;
            }
        }
        return sp.inverse(spec);
    };
    return {r.grid, invert(r.x), invert(r.y)};
}

}  // namespace velo
