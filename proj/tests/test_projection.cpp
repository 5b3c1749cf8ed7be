#include "velo/projection.hpp"

#include "velo/operators.hpp"
#include "testers.hpp"

#include <doctest.h>

using namespace velo;
using namespace velo::testing;

namespace {

RegConfig stokes_cfg(bool incompressible, RegModel model = RegModel::H1Seminorm,
                     double nu = 1.0) {
    RegConfig cfg;
    cfg.model = model;
    cfg.beta_v = 1.0;
    cfg.beta_w = 1.0;
    cfg.gamma = 1;
    cfg.nu = nu;
    cfg.incompressible = incompressible;
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("projection");

TEST_CASE("apply_M_inverse") {
    Grid2D g(32, 32);
    ScalarField f = random_field(g, 5, 3);
    SUBCASE("incompressible mode is the identity") {
        RegConfig cfg = stokes_cfg(true);
        ScalarField out = apply_M_inverse(f, EliminationMode::from(cfg), cfg, 1.0);
        CHECK(max_abs_diff(out.data, f.data) == 0.0);
    }
    SUBCASE("gamma = 0 bypasses") {
        RegConfig cfg = stokes_cfg(false);
        cfg.gamma = 0;
        ScalarField out = apply_M_inverse(f, EliminationMode::from(cfg), cfg, 1.0);
        CHECK(max_abs_diff(out.data, f.data) == 0.0);
    }
    SUBCASE("constant field halves at unit weights") {
        RegConfig cfg = stokes_cfg(false);
        ScalarField c{g, Array::Constant(32, 32, 3.0)};
        ScalarField out = apply_M_inverse(c, EliminationMode::from(cfg), cfg, 1.0);
        CHECK(max_abs_diff(out.data, Array::Constant(32, 32, 1.5)) <= 1e-13);
    }
    SUBCASE("M composed with M^-1 is the identity") {
        RegConfig cfg = stokes_cfg(false);
        cfg.beta_v = 0.3;
        cfg.beta_w = 0.07;
        ScalarField minv = apply_M_inverse(f, EliminationMode::from(cfg), cfg, 1.0);
        // M u = beta_v (beta_w(-lap+id))^-1 u + u
        ScalarField helm = inverse_helmholtz(minv, cfg.beta_w);
        Array back = cfg.beta_v * helm.data + minv.data;
        CHECK(max_abs_diff(back, f.data) <= 1e-10);
    }
}

TEST_CASE("linear projection K") {
    Grid2D g(32, 32);
    SUBCASE("divergence-free forces pass through") {
        VectorField b = random_divfree_field(g, 4, 7);
        for (bool inc : {true, false}) {
            RegConfig cfg = stokes_cfg(inc);
            VectorField kb = project_K_linear(b, EliminationMode::from(cfg), cfg);
            CHECK(max_abs_diff(kb.x, b.x) <= 1e-12);
            CHECK(max_abs_diff(kb.y, b.y) <= 1e-12);
        }
    }
    SUBCASE("pure gradients are annihilated in incompressible mode") {
        ScalarField phi = random_poly(4, 11, true).sample(g);
        VectorField b = gradient(phi);
        RegConfig cfg = stokes_cfg(true);
        VectorField kb = project_K_linear(b, EliminationMode::from(cfg), cfg);
        CHECK(linf_norm(kb) <= 1e-10 * std::max(1.0, linf_norm(b)));
    }
    SUBCASE("incompressible K is an orthogonal projection") {
        RegConfig cfg = stokes_cfg(true);
        const EliminationMode mode = EliminationMode::from(cfg);
        VectorField b = random_vector_field(g, 4, 13);
        VectorField kb = project_K_linear(b, mode, cfg);
        VectorField kkb = project_K_linear(kb, mode, cfg);
        CHECK(max_abs_diff(kkb.x, kb.x) <= 1e-10);
        CHECK(max_abs_diff(kkb.y, kb.y) <= 1e-10);
        CHECK(linf_norm(divergence(kb)) <= 1e-10 * std::max(1.0, linf_norm(kb)));
        VectorField c = random_vector_field(g, 4, 17);
        const double lhs = l2_inner(project_K_linear(b, mode, cfg), c);
        const double rhs = l2_inner(b, project_K_linear(c, mode, cfg));
        CHECK(rel_err(lhs, rhs) <= 1e-10);
    }
    SUBCASE("K is linear in the body force") {
        RegConfig cfg = stokes_cfg(false);
        const EliminationMode mode = EliminationMode::from(cfg);
        VectorField a = random_vector_field(g, 4, 19);
        VectorField b = random_vector_field(g, 4, 23);
        VectorField sum{g, Array(2.0 * a.x + b.x), Array(2.0 * a.y + b.y)};
        VectorField ka = project_K_linear(a, mode, cfg);
        VectorField kb = project_K_linear(b, mode, cfg);
        VectorField ks = project_K_linear(sum, mode, cfg);
        CHECK(max_abs_diff(ks.x, Array(2.0 * ka.x + kb.x)) <=
              1e-12 * std::max(1.0, linf_norm(ks)));
    }
    SUBCASE("gamma = 0 returns the input") {
        RegConfig cfg = stokes_cfg(false);
        cfg.gamma = 0;
        VectorField b = random_vector_field(g, 4, 29);
        VectorField kb = project_K_linear(b, EliminationMode::from(cfg), cfg);
        CHECK((kb.x == b.x).all());
    }
}

TEST_CASE("nonlinear projection K") {
    Grid2D g(32, 32);
    VectorField b = random_vector_field(g, 4, 31);
    SUBCASE("nu = 1 reduces to the linear projection") {
        // eta == 1 so the fluctuation term vanishes; the M coefficient
        // becomes 2 beta_v, matching the linear operator at beta_v' = 2 beta_v.
        RegConfig nl = stokes_cfg(true, RegModel::NonlinearStokes, 1.0);
        RegConfig lin = stokes_cfg(true);
        VectorField v = random_vector_field(g, 3, 37, 0.3);
        VectorField k_nl = project_K_nonlinear(b, v, EliminationMode::from(nl), nl);
        VectorField k_lin = project_K_linear(b, EliminationMode::from(lin), lin);
        CHECK(max_abs_diff(k_nl.x, k_lin.x) <= 1e-11);
        CHECK(max_abs_diff(k_nl.y, k_lin.y) <= 1e-11);
    }
    SUBCASE("v = 0 gives constant viscosity and reduces to the linear case") {
        RegConfig nl = stokes_cfg(true, RegModel::NonlinearStokes, 5.0);
        RegConfig lin = stokes_cfg(true);
        VectorField k_nl = project_K_nonlinear(b, VectorField(g), EliminationMode::from(nl), nl);
        VectorField k_lin = project_K_linear(b, EliminationMode::from(lin), lin);
        CHECK(max_abs_diff(k_nl.x, k_lin.x) <= 1e-11);
    }
    SUBCASE("reduced gradient is divergence free in incompressible mode") {
        RegConfig nl = stokes_cfg(true, RegModel::NonlinearStokes, 5.0);
        VectorField v = random_divfree_field(g, 3, 41, 0.3);
        VectorField av = apply_A(v, nl);
        VectorField kb = project_K_nonlinear(b, v, EliminationMode::from(nl), nl);
        VectorField grad{g, Array(nl.beta_v * av.x + kb.x), Array(nl.beta_v * av.y + kb.y)};
        ScalarField div = divergence(grad);
        CHECK(std::abs(mean(div)) <= 1e-12);
        CHECK(linf_norm(div) <= 1e-8 * std::max(1.0, linf_norm(grad)));
    }
}

TEST_CASE("projection L") {
    Grid2D g(32, 32);
    VectorField bt = random_vector_field(g, 4, 43);
    SUBCASE("quadratic models reuse the K path bit for bit") {
        RegConfig cfg = stokes_cfg(false);
        const EliminationMode mode = EliminationMode::from(cfg);
        VectorField l = project_L_linear(bt, mode, cfg);
        VectorField k = project_K_linear(bt, mode, cfg);
        CHECK((l.x == k.x).all());
        CHECK((l.y == k.y).all());
    }
    SUBCASE("nu = 1 strain model reduces to the linear projection on bt") {
        RegConfig nl = stokes_cfg(true, RegModel::NonlinearStokes, 1.0);
        RegConfig lin = stokes_cfg(true);
        VectorField v = random_vector_field(g, 3, 47, 0.3);
        VectorField vt = random_vector_field(g, 3, 53, 0.3);
        VectorField l_nl = project_L_nonlinear(bt, v, vt, EliminationMode::from(nl), nl);
        VectorField l_lin = project_K_linear(bt, EliminationMode::from(lin), lin);
        CHECK(max_abs_diff(l_nl.x, l_lin.x) <= 1e-11);
    }
}

TEST_CASE("pressure and mass-source recovery") {
    Grid2D g(32, 32);
    SUBCASE("zero force recovers zero multipliers") {
        RegConfig cfg = stokes_cfg(false);
        auto [p, w] = recover_pressure_and_mass_source(VectorField(g), VectorField(g),
                                                       EliminationMode::from(cfg), cfg);
        CHECK(linf_norm(p) == 0.0);
        CHECK(linf_norm(w) == 0.0);
    }
    SUBCASE("divergence-free force recovers zero multipliers") {
        RegConfig cfg = stokes_cfg(false);
        VectorField b = random_divfree_field(g, 4, 59);
        auto [p, w] = recover_pressure_and_mass_source(b, VectorField(g),
                                                       EliminationMode::from(cfg), cfg);
        CHECK(linf_norm(p) <= 1e-10);
        CHECK(linf_norm(w) <= 1e-10);
    }
    SUBCASE("incompressible mode pins w to zero and p to -lap^-1 div b") {
        RegConfig cfg = stokes_cfg(true);
        VectorField b = random_vector_field(g, 4, 61);
        auto [p, w] = recover_pressure_and_mass_source(b, VectorField(g),
                                                       EliminationMode::from(cfg), cfg);
        CHECK(linf_norm(w) == 0.0);
        ScalarField want = inverse_laplacian(divergence(b));
        CHECK(max_abs_diff(p.data, Array(-want.data)) <= 1e-11);
    }
    SUBCASE("recovered pair reproduces K through grad p + b") {
        for (auto model : {RegModel::H1Seminorm, RegModel::NonlinearStokes}) {
            RegConfig cfg = stokes_cfg(false, model, 3.0);
            const EliminationMode mode = EliminationMode::from(cfg);
            VectorField b = random_vector_field(g, 4, 67);
            VectorField v = random_vector_field(g, 3, 71, 0.3);
            auto [p, w] = recover_pressure_and_mass_source(b, v, mode, cfg);
            VectorField gp = gradient(p);
            VectorField kb = model == RegModel::H1Seminorm
                                 ? project_K_linear(b, mode, cfg)
                                 : project_K_nonlinear(b, v, mode, cfg);
            CHECK(max_abs_diff(kb.x, Array(b.x + gp.x)) <= 1e-10);
            CHECK(max_abs_diff(kb.y, Array(b.y + gp.y)) <= 1e-10);
            // w solves the mass-source control equation for the recovered p
            ScalarField res = apply_w_operator(w, cfg.beta_w);
            CHECK(max_abs_diff(res.data, Array(-p.data)) <= 1e-10);
        }
    }
}

TEST_SUITE_END();
