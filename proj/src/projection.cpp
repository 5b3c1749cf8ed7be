#include "velo/projection.hpp"

#include "velo/fft.hpp"
#include "velo/operators.hpp"

#include <complex>

namespace velo {

namespace {

double m_coefficient(const VectorField& v, const RegConfig& cfg, double* eta_bar_out) {
    switch (cfg.model) {
        case RegModel::H1Seminorm:
        case RegModel::H2Seminorm:
            if (eta_bar_out) *eta_bar_out = 1.0;
            return cfg.beta_v;
        case RegModel::NonlinearStokes: {
            const double eta_bar = mean(effective_viscosity(v, cfg.nu, cfg.eps_visc));
            if (eta_bar_out) *eta_bar_out = eta_bar;
            return 2.0 * cfg.beta_v * eta_bar;
        }
        case RegModel::TotalVariation: {
            TensorField2x2 j = jacobian(v);
            Array sigma = (j.e11.square() + j.e12.square() + j.e21.square() +
                           j.e22.square() + cfg.eps_visc).rsqrt();
            const double sigma_bar = sigma.mean();
            if (eta_bar_out) *eta_bar_out = sigma_bar;
            return cfg.beta_v * sigma_bar;
        }
    }
    return cfg.beta_v;
}

// t = M^-1 lap^-1 div(r); the k = 0 coefficient is projected out, which is
// exact here because div(r) has zero mean. The Poisson division uses the
// composite div-grad symbol (Nyquist contributions dropped, like the first
// derivatives themselves), so grad(lap^-1 div(.)) annihilates the discrete
// divergence exactly on every mode.
ScalarField m_poisson(const VectorField& r, const RegConfig& cfg, double c, bool use_m) {
    auto& sp = Spectral::of(r.grid);
    using C = std::complex<double>;
    const C i{0.0, 1.0};
    CArray s1 = sp.forward(r.x);
    CArray s2 = sp.forward(r.y);
    const int ny1 = r.grid.n1 / 2, ny2 = r.grid.n2 / 2;
    CArray t(sp.spec_rows(), sp.spec_cols());
    for (int b = 0; b < sp.spec_cols(); ++b) {
        const int k2 = sp.k2(b);
        for (int a = 0; a < sp.spec_rows(); ++a) {
            const int k1 = a;
            C d = (k1 == ny1 ? C(0.0) : i * static_cast<double>(k1) * s1(a, b)) +
                  (k2 == -ny2 ? C(0.0) : i * static_cast<double>(k2) * s2(a, b));
            const double ksq = (k1 == ny1 ? 0.0 : static_cast<double>(k1) * k1) +
                               (k2 == -ny2 ? 0.0 : static_cast<double>(k2) * k2);
            if (ksq == 0.0) {
                t(a, b) = 0.0;
                continue;
            }
            C val = d / (-ksq);
            if (use_m) val /= c / (cfg.beta_w * (ksq + 1.0)) + 1.0;
            t(a, b) = val;
        }
    }
    return {r.grid, sp.inverse(t)};
}

// Tensor divergence of the fluctuating part of the viscous stress,
// div(2 beta_v etahat E[v]) (strain models) or div(beta_v sigmahat grad v) (TV).
VectorField stress_fluctuation_div(const VectorField& v, const RegConfig& cfg) {
    TensorField2x2 t(v.grid);
    if (cfg.model == RegModel::NonlinearStokes) {
        TensorField2x2 e = strain_rate(v);
        ScalarField eta = effective_viscosity(v, cfg.nu, cfg.eps_visc);
        Array eta_hat = eta.data - eta.data.mean();
        t.e11 = 2.0 * cfg.beta_v * eta_hat * e.e11;
        t.e12 = 2.0 * cfg.beta_v * eta_hat * e.e12;
        t.e21 = t.e12;
        t.e22 = 2.0 * cfg.beta_v * eta_hat * e.e22;
    } else {
        TensorField2x2 j = jacobian(v);
        Array sigma = (j.e11.square() + j.e12.square() + j.e21.square() +
                       j.e22.square() + cfg.eps_visc).rsqrt();
        Array sigma_hat = sigma - sigma.mean();
        t.e11 = cfg.beta_v * sigma_hat * j.e11;
        t.e12 = cfg.beta_v * sigma_hat * j.e12;
        t.e21 = cfg.beta_v * sigma_hat * j.e21;
        t.e22 = cfg.beta_v * sigma_hat * j.e22;
    }
    return divergence_tensor(t);
}

// Same for the second variation: div(2 beta_v (etahat + eta Q) E[vt]).
VectorField stress_fluctuation_div_inc(const VectorField& v, const VectorField& vt,
                                       const RegConfig& cfg) {
    TensorField2x2 t(v.grid);
    if (cfg.model == RegModel::NonlinearStokes) {
        TensorField2x2 e = strain_rate(v);
        TensorField2x2 et = strain_rate(vt);
        ScalarField eta = effective_viscosity(v, cfg.nu, cfg.eps_visc);
        Array eta_hat = eta.data - eta.data.mean();
        Array denom = e.e11.square() + e.e22.square() + 2.0 * e.e12.square() + cfg.eps_visc;
        Array inner = e.e11 * et.e11 + e.e22 * et.e22 + 2.0 * e.e12 * et.e12;
        Array q = ((1.0 - cfg.nu) / cfg.nu) * eta.data * inner / denom;
        t.e11 = 2.0 * cfg.beta_v * (eta_hat * et.e11 + q * e.e11);
        t.e12 = 2.0 * cfg.beta_v * (eta_hat * et.e12 + q * e.e12);
        t.e21 = t.e12;
        t.e22 = 2.0 * cfg.beta_v * (eta_hat * et.e22 + q * e.e22);
    } else {
        TensorField2x2 j = jacobian(v);
        TensorField2x2 jt = jacobian(vt);
        Array denom = j.e11.square() + j.e12.square() + j.e21.square() + j.e22.square() +
                      cfg.eps_visc;
        Array sigma = denom.rsqrt();
        Array sigma_hat = sigma - sigma.mean();
        Array inner = j.e11 * jt.e11 + j.e12 * jt.e12 + j.e21 * jt.e21 + j.e22 * jt.e22;
        Array q = -sigma * inner / denom;
        t.e11 = cfg.beta_v * (sigma_hat * jt.e11 + q * j.e11);
        t.e12 = cfg.beta_v * (sigma_hat * jt.e12 + q * j.e12);
        t.e21 = cfg.beta_v * (sigma_hat * jt.e21 + q * j.e21);
        t.e22 = cfg.beta_v * (sigma_hat * jt.e22 + q * j.e22);
    }
    return divergence_tensor(t);
}

}  // namespace

ScalarField apply_M_inverse(const ScalarField& f, const EliminationMode& mode,
                            const RegConfig& cfg, double eta_bar) {
    cfg.validate();
    if (mode.gamma == 0 || mode.incompressible) return f;
    if (!cfg.quadratic() && eta_bar <= 0.0)
        throw std::invalid_argument("apply_M_inverse: eta_bar must be > 0");
    const double c = cfg.quadratic()
                         ? cfg.beta_v
                         : (cfg.model == RegModel::NonlinearStokes ? 2.0 * cfg.beta_v * eta_bar
                                                                   : cfg.beta_v * eta_bar);
    auto& sp = Spectral::of(f.grid);
    CArray spec = sp.forward(f.data);
    for (int b = 0; b < sp.spec_cols(); ++b) {
        const double k2 = sp.k2(b);
        for (int a = 0; a < sp.spec_rows(); ++a) {
            const double ksq = static_cast<double>(a) * a + k2 * k2;
            spec(a, b) /= c / (cfg.beta_w * (ksq + 1.0)) + 1.0;
        }
    }
    return {f.grid, sp.inverse(spec)};
}

VectorField project_K_linear(const VectorField& b, const EliminationMode& mode,
                             const RegConfig& cfg) {
    cfg.validate();
    if (mode.gamma == 0) return b;
    VectorField neg{b.grid, Array(-b.x), Array(-b.y)};
    ScalarField t = m_poisson(neg, cfg, cfg.beta_v, !mode.incompressible);
    VectorField gt = gradient(t);
    return {b.grid, Array(b.x + gt.x), Array(b.y + gt.y)};
}

VectorField project_K_nonlinear(const VectorField& b, const VectorField& v,
                                const EliminationMode& mode, const RegConfig& cfg) {
    cfg.validate();
    if (mode.gamma == 0) return b;
    const double c = m_coefficient(v, cfg, nullptr);
    VectorField s = stress_fluctuation_div(v, cfg);
    VectorField r{b.grid, Array(s.x - b.x), Array(s.y - b.y)};
    ScalarField t = m_poisson(r, cfg, c, !mode.incompressible);
    VectorField gt = gradient(t);
    return {b.grid, Array(b.x + gt.x), Array(b.y + gt.y)};
}

VectorField project_L_linear(const VectorField& bt, const EliminationMode& mode,
                             const RegConfig& cfg) {
    return project_K_linear(bt, mode, cfg);
}

VectorField project_L_nonlinear(const VectorField& bt, const VectorField& v,
                                const VectorField& vt, const EliminationMode& mode,
                                const RegConfig& cfg) {
    cfg.validate();
    if (mode.gamma == 0) return bt;
    const double c = m_coefficient(v, cfg, nullptr);
    VectorField s = stress_fluctuation_div_inc(v, vt, cfg);
    VectorField r{bt.grid, Array(s.x - bt.x), Array(s.y - bt.y)};
    ScalarField t = m_poisson(r, cfg, c, !mode.incompressible);
    VectorField gt = gradient(t);
    return {bt.grid, Array(bt.x + gt.x), Array(bt.y + gt.y)};
}

std::pair<ScalarField, ScalarField> recover_pressure_and_mass_source(
    const VectorField& b, const VectorField& v, const EliminationMode& mode,
    const RegConfig& cfg) {
    cfg.validate();
    if (mode.gamma == 0) return {ScalarField(b.grid), ScalarField(b.grid)};
    ScalarField p(b.grid);
    if (cfg.quadratic()) {
        VectorField neg{b.grid, Array(-b.x), Array(-b.y)};
        p = m_poisson(neg, cfg, cfg.beta_v, !mode.incompressible);
    } else {
        const double c = m_coefficient(v, cfg, nullptr);
        VectorField s = stress_fluctuation_div(v, cfg);
        VectorField r{b.grid, Array(s.x - b.x), Array(s.y - b.y)};
        p = m_poisson(r, cfg, c, !mode.incompressible);
    }
    ScalarField w(b.grid);
    if (!mode.incompressible) {
        w = inverse_helmholtz(p, cfg.beta_w);
        w.data = -w.data;
    }
    return {std::move(p), std::move(w)};
}

}  // namespace velo
