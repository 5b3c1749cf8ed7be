#include "velo/optimizer.hpp"

#include "velo/metrics.hpp"
#include "velo/operators.hpp"

#include <cmath>
#include <cstdio>

namespace velo {

void SolverConfig::validate() const {
    if (grad_tol <= 0.0 || grad_tol >= 1.0)
        throw std::invalid_argument("SolverConfig: grad_tol must be in (0,1)");
    if (armijo_c <= 0.0 || armijo_c >= 1.0)
        throw std::invalid_argument("SolverConfig: armijo_c must be in (0,1)");
    if (armijo_shrink <= 0.0 || armijo_shrink >= 1.0)
        throw std::invalid_argument("SolverConfig: armijo_shrink must be in (0,1)");
    if (max_outer < 1 || max_inner < 1 || max_linesearch < 1)
        throw std::invalid_argument("SolverConfig: iteration limits must be >= 1");
    if (cfl_safety <= 0.0 || cfl_safety > 1.0)
        throw std::invalid_argument("SolverConfig: cfl_safety must be in (0,1]");
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::max_outer: return "max_outer";
        case SolveStatus::linesearch_failure: return "linesearch_failure";
        case SolveStatus::instability: return "instability";
        case SolveStatus::negative_curvature: return "negative_curvature";
    }
    return "unknown";
}

namespace {

// The control equation pairs beta_v A[v] with the plain seminorm-squared
// energy for the quadratic models but with the full strain/TV functional
// for the nonquadratic ones, so the objective weights differ accordingly.
double objective_reg_term(const VectorField& v, const RegConfig& reg) {
    const double e = reg_energy_v(v, reg);
    return reg.quadratic() ? 0.5 * reg.beta_v * e : reg.beta_v * e;
}

double mismatch_term(const ScalarField& m_R, const Array& m1) {
    return 0.5 * (m_R.data - m1).square().sum() * m_R.grid.cell_area();
}

VectorField project_body_force(const VectorField& b, const VectorField& v,
                               const RegConfig& reg) {
    const EliminationMode mode = EliminationMode::from(reg);
    return reg.quadratic() ? project_K_linear(b, mode, reg)
                           : project_K_nonlinear(b, v, mode, reg);
}

VectorField project_inc_body_force(const VectorField& bt, const VectorField& v,
                                   const VectorField& vt, const RegConfig& reg) {
    const EliminationMode mode = EliminationMode::from(reg);
    return reg.quadratic() ? project_L_linear(bt, mode, reg)
                           : project_L_nonlinear(bt, v, vt, mode, reg);
}

}  // namespace

std::pair<double, TimeSeriesField> evaluate_objective(const VectorField& v,
                                                      const RegistrationProblem& problem,
                                                      const RegConfig& reg, int nt,
                                                      long* pde_counter) {
    reg.validate();
    TimeSeriesField m = solve_state(problem.m_T, v, nt);
    if (pde_counter) ++*pde_counter;
    double j = mismatch_term(problem.m_R, m.back()) + objective_reg_term(v, reg);
    if (reg.gamma == 1 && !reg.incompressible) {
        // With the constraint div v = w eliminated, the w-norm acts as a
        // penalty on the divergence of v.
        ScalarField w = divergence(v);
        j += 0.5 * reg.beta_w * reg_energy_w(w, reg.beta_w);
    }
    return {j, std::move(m)};
}

VectorField evaluate_gradient(IterateState& state, const RegistrationProblem& problem,
                              const RegConfig& reg) {
    state.lambda = solve_adjoint({state.m.grid, state.m.back()}, problem.m_R, state.v,
                                 state.nt);
    ++state.n_pde;
    VectorField b = body_force(state.m, state.lambda);
    VectorField av = apply_A(state.v, reg);
    VectorField kb = project_body_force(b, state.v, reg);
    return {state.v.grid, Array(reg.beta_v * av.x + kb.x), Array(reg.beta_v * av.y + kb.y)};
}

VectorField hessian_matvec(IterateState& state, const VectorField& vt,
                           const RegConfig& reg, bool gauss_newton) {
    TimeSeriesField mt = solve_inc_state(state.m, state.v, vt);
    TimeSeriesField lt = solve_inc_adjoint(state.lambda, state.v, vt,
                                           {state.m.grid, mt.back()}, gauss_newton);
    state.n_pde += 2;
    ++state.n_matvec;
    VectorField bt = inc_body_force(state.m, mt, state.lambda, lt, gauss_newton);
    VectorField bv = apply_B(state.v, vt, reg);
    VectorField lbt = project_inc_body_force(bt, state.v, vt, reg);
    return {state.v.grid, Array(reg.beta_v * bv.x + lbt.x),
            Array(reg.beta_v * bv.y + lbt.y)};
}

PcgResult pcg_solve(IterateState& state, const RegistrationProblem& /*problem*/,
                    const RegConfig& reg, const SolverConfig& cfg, double g0_l2) {
    PcgResult res;
    const double g_l2 = l2_norm(state.g);
    res.eta = std::min(cfg.forcing_cap, std::sqrt(g_l2 / g0_l2));
    const Grid2D& grid = state.v.grid;

    VectorField vt(grid);
    VectorField r{grid, Array(-state.g.x), Array(-state.g.y)};
    const double r0 = l2_norm(r);
    VectorField z = apply_preconditioner(r, state.v, reg);
    VectorField s = z;
    double delta = l2_inner(r, z);

    for (int l = 0; l < cfg.max_inner; ++l) {
        VectorField hs = hessian_matvec(state, s, reg, cfg.gauss_newton);
        const double curvature = l2_inner(s, hs);
        if (curvature <= 0.0) {
            if (cfg.gauss_newton) {
                res.negative_curvature = true;
                return res;
            }
            // Steihaug-style truncation: fall back to the preconditioned
            // steepest-descent direction on a first-step breakdown.
            if (l == 0) vt = s;
            res.direction = std::move(vt);
            res.iterations = l;
            return res;
        }
        const double kappa = delta / curvature;
        vt.x += kappa * s.x;
        vt.y += kappa * s.y;
        r.x -= kappa * hs.x;
        r.y -= kappa * hs.y;
        res.iterations = l + 1;
        if (l2_norm(r) < res.eta * r0) break;
        z = apply_preconditioner(r, state.v, reg);
        const double delta_new = l2_inner(r, z);
        const double mu = delta_new / delta;
        s.x = z.x + mu * s.x;
        s.y = z.y + mu * s.y;
        delta = delta_new;
    }
    res.direction = std::move(vt);
    return res;
}

namespace {

std::pair<VectorField, SolverReport> register_from(const RegistrationProblem& problem,
                                                   const RegConfig& reg,
                                                   const SolverConfig& cfg,
                                                   const VectorField& v0) {
    reg.validate();
    cfg.validate();
    const Grid2D& grid = problem.m_R.grid;
    if (grid != problem.m_T.grid)
        throw std::invalid_argument("register_images: images on different grids");

    SolverReport report;
    IterateState state;
    state.v = v0;
    state.nt = cfl_timesteps(state.v, cfg.nt_seed(grid), cfg.cfl_safety);

    const double mismatch0 = (problem.m_R.data - problem.m_T.data).square().sum();
    auto resid_rel = [&](const Array& m1) {
        if (mismatch0 == 0.0) return 0.0;
        return (problem.m_R.data - m1).square().sum() / mismatch0;
    };

    try {
        auto [j0, m0] = evaluate_objective(state.v, problem, reg, state.nt, &state.n_pde);
        state.objective = j0;
        state.m = std::move(m0);
        state.g = evaluate_gradient(state, problem, reg);
        report.g0_inf = linf_norm(state.g);
        report.g0_l2 = l2_norm(state.g);

        IterationRecord rec0;
        rec0.objective = state.objective;
        rec0.grad_rel_inf = report.g0_inf == 0.0 ? 0.0 : 1.0;
        rec0.grad_l2 = report.g0_l2;
        rec0.resid_rel = resid_rel(state.m.back());
        rec0.div_inf = linf_norm(divergence(state.v));
        rec0.v_inf = linf_norm(state.v);
        rec0.n_matvec = state.n_matvec;
        rec0.n_pde = state.n_pde;
        report.ledger.push_back(rec0);

        double ledger_objective = state.objective;
        for (int k = 1;; ++k) {
            const double grad_rel =
                report.g0_inf == 0.0 ? 0.0 : linf_norm(state.g) / report.g0_inf;
            if (grad_rel <= cfg.grad_tol) {
                report.status = SolveStatus::converged;
                break;
            }
            if (k > cfg.max_outer) {
                report.status = SolveStatus::max_outer;
                break;
            }

            PcgResult pcg = pcg_solve(state, problem, reg, cfg, report.g0_l2);
            if (pcg.negative_curvature) {
                report.status = SolveStatus::negative_curvature;
                report.note = "PCG met nonpositive curvature in Gauss-Newton mode";
                break;
            }

            VectorField d = std::move(pcg.direction);
            double gd = l2_inner(state.g, d);
            if (gd >= 0.0) {
                d.x = -state.g.x;
                d.y = -state.g.y;
                gd = -l2_inner(state.g, state.g);
                ++report.n_gradient_fallbacks;
            }

            double alpha = 1.0;
            bool accepted = false;
            double j_try = 0.0;
            TimeSeriesField m_try;
            VectorField v_try;
            for (int ls = 0; ls < cfg.max_linesearch; ++ls) {
                v_try = VectorField{grid, Array(state.v.x + alpha * d.x),
                                    Array(state.v.y + alpha * d.y)};
                auto [jt, mt] = evaluate_objective(v_try, problem, reg, state.nt,
                                                   &state.n_pde);
                if (jt <= state.objective + cfg.armijo_c * alpha * gd) {
                    accepted = true;
                    j_try = jt;
                    m_try = std::move(mt);
                    break;
                }
                alpha *= cfg.armijo_shrink;
            }
            if (!accepted) {
                report.status = SolveStatus::linesearch_failure;
                break;
            }

            state.v = std::move(v_try);
            state.m = std::move(m_try);
            state.objective = j_try;
            ledger_objective = j_try;

            // CFL recheck; n_t never decreases within one solve so the
            // accepted objective values stay comparable across rows.
            const int nt_new = cfl_timesteps(state.v, state.nt, cfg.cfl_safety);
            if (nt_new != state.nt) {
                state.nt = nt_new;
                auto [jr, mr] = evaluate_objective(state.v, problem, reg, state.nt,
                                                   &state.n_pde);
                state.objective = jr;
                state.m = std::move(mr);
            }
            state.g = evaluate_gradient(state, problem, reg);

            IterationRecord rec;
            rec.k = k;
            rec.objective = ledger_objective;
            rec.grad_rel_inf = report.g0_inf == 0.0 ? 0.0 : linf_norm(state.g) / report.g0_inf;
            rec.grad_l2 = l2_norm(state.g);
            rec.resid_rel = resid_rel(state.m.back());
            rec.alpha = alpha;
            rec.inner = pcg.iterations;
            rec.eta = pcg.eta;
            rec.div_inf = linf_norm(divergence(state.v));
            rec.v_inf = linf_norm(state.v);
            rec.n_matvec = state.n_matvec;
            rec.n_pde = state.n_pde;
            report.ledger.push_back(rec);
            if (cfg.verbose)
                std::fprintf(stderr,
                             "[velo] k=%d J=%.6e |g|_rel=%.3e r_rel=%.3e alpha=%.3g inner=%d\n",
                             k, rec.objective, rec.grad_rel_inf, rec.resid_rel, rec.alpha,
                             rec.inner);
        }
    } catch (const instability_error& e) {
        report.status = SolveStatus::instability;
        report.note = e.what();
    }

    report.n_matvec = state.n_matvec;
    report.n_pde = state.n_pde;
    return {std::move(state.v), std::move(report)};
}

}  // namespace

std::pair<VectorField, SolverReport> register_images(const RegistrationProblem& problem,
                                                     const RegConfig& reg,
                                                     const SolverConfig& cfg) {
    return register_from(problem, reg, cfg, VectorField(problem.m_R.grid));
}

ContinuationResult continuation_beta_v(const RegistrationProblem& problem, RegConfig reg,
                                       const SolverConfig& cfg, double det_bound,
                                       double beta_v_init) {
    if (det_bound <= 0.0 || det_bound >= 1.0)
        throw std::invalid_argument("continuation_beta_v: det_bound must be in (0,1)");
    ContinuationResult out;
    int solves = 0;
    const int max_solves = 20;

    struct RunResult {
        VectorField v;
        SolverReport report;
        ContinuationTrial trial;
    };
    auto run = [&](double beta_v, const VectorField* warm) {
        reg.beta_v = beta_v;
        auto [v, rep] = warm && cfg.warm_start ? register_from(problem, reg, cfg, *warm)
                                               : register_images(problem, reg, cfg);
        ++solves;
        const int nt = cfl_timesteps(v, cfg.nt_seed(v.grid), cfg.cfl_safety);
        DeformationAnalysis def = analyze_deformation(v, nt, nullptr);
        ContinuationTrial t;
        t.beta_v = beta_v;
        t.det_min = def.det_min;
        t.det_max = def.det_max;
        t.feasible = rep.status != SolveStatus::instability && def.det_min >= det_bound;
        t.resid_rel = rep.final_record().resid_rel;
        t.status = rep.status;
        out.trials.push_back(t);
        return RunResult{std::move(v), std::move(rep), t};
    };

    RunResult best = run(beta_v_init, nullptr);
    if (!best.trial.feasible) {
        out.infeasible_at_init = true;
        out.beta_v_star = beta_v_init;
        out.v = std::move(best.v);
        out.report = std::move(best.report);
        return out;
    }
    // Identical images (or an already-converged start) make every beta_v
    // feasible; return the initial weight at once.
    if (best.report.status == SolveStatus::converged && best.report.ledger.size() == 1) {
        out.beta_v_star = beta_v_init;
        out.v = std::move(best.v);
        out.report = std::move(best.report);
        return out;
    }

    double hi = beta_v_init;  // feasible
    double lo = 0.0;          // infeasible once found
    while (solves < max_solves) {
        RunResult r = run(hi / 10.0, &best.v);
        if (r.trial.feasible) {
            hi /= 10.0;
            best = std::move(r);
        } else {
            lo = hi / 10.0;
            break;
        }
    }
    if (lo > 0.0) {
        const double target_ratio = std::pow(2.0, 0.25);
        while (hi / lo > target_ratio && solves < max_solves) {
            const double mid = std::sqrt(hi * lo);
            RunResult r = run(mid, &best.v);
            if (r.trial.feasible) {
                hi = mid;
                best = std::move(r);
            } else {
                lo = mid;
            }
        }
    }
    // Feasibility is re-verified at the returned weight.
    RunResult final_run = run(hi, &best.v);
    out.beta_v_star = hi;
    out.v = std::move(final_run.v);
    out.report = std::move(final_run.report);
    return out;
}

}  // namespace velo
