#pragma once

#include "velo/grid.hpp"
#include "velo/problems.hpp"
#include "velo/projection.hpp"
#include "velo/regularization.hpp"
#include "velo/transport.hpp"

#include <string>
#include <vector>

namespace velo {

/// Optimizer tolerances and knobs. nt_init = 0 means the 2*max(n1,n2) rule.
struct SolverConfig {
    double grad_tol = 1e-3;      ///< relative l-inf gradient reduction target
    int max_outer = 50;
    int max_inner = 500;
    double forcing_cap = 0.5;
    double armijo_c = 1e-4;
    double armijo_shrink = 0.5;
    int max_linesearch = 30;
    bool gauss_newton = true;
    double cfl_safety = 0.8;
    int nt_init = 0;
    bool warm_start = false;     ///< reuse v across continuation trials
    bool verbose = false;

    void validate() const;
    int nt_seed(const Grid2D& g) const {
        return nt_init > 0 ? nt_init : 2 * std::max(g.n1, g.n2);
    }
};

enum class SolveStatus { converged, max_outer, linesearch_failure, instability,
                         negative_curvature };

const char* to_string(SolveStatus s);

/// One ledger row per outer iteration (row 0 is the initial point).
struct IterationRecord {
    int k = 0;
    double objective = 0.0;
    double grad_rel_inf = 1.0;   ///< |g_k|_inf / |g_0|_inf
    double grad_l2 = 0.0;        ///< |g_k|_2 (grid-scaled)
    double resid_rel = 1.0;      ///< |m_R - m_1|^2 / |m_R - m_T|^2
    double alpha = 0.0;
    int inner = 0;
    double eta = 0.0;            ///< PCG forcing used for this step
    double div_inf = 0.0;        ///< |div v_k|_inf
    double v_inf = 0.0;          ///< |v_k|_inf
    long n_matvec = 0;           ///< cumulative Hessian matvecs
    long n_pde = 0;              ///< cumulative hyperbolic PDE solves
};

struct SolverReport {
    std::vector<IterationRecord> ledger;
    SolveStatus status = SolveStatus::max_outer;
    double g0_inf = 0.0;
    double g0_l2 = 0.0;
    long n_matvec = 0;
    long n_pde = 0;
    int n_gradient_fallbacks = 0;  ///< times a non-descent direction was replaced by -g
    std::string note;

    const IterationRecord& final_record() const { return ledger.back(); }
};

/// State of one outer iterate: velocity, transported intensities, adjoint,
/// objective value and reduced gradient, all mutually consistent.
struct IterateState {
    VectorField v;
    TimeSeriesField m;
    TimeSeriesField lambda;
    double objective = 0.0;
    VectorField g;
    int nt = 0;
    long n_matvec = 0;
    long n_pde = 0;
};

/// Objective J(v) = 1/2 |m_R - m_1|^2 + regularization (+ the mass-source
/// penalty (beta_w/2) |div v|_W^2 when gamma = 1 and w is free). The state
/// series used for the mismatch is returned alongside.
std::pair<double, TimeSeriesField> evaluate_objective(const VectorField& v,
                                                      const RegistrationProblem& problem,
                                                      const RegConfig& reg, int nt,
                                                      long* pde_counter = nullptr);

/// Reduced gradient g = beta_v A[v] + K[b]; solves the adjoint equation and
/// stores it in `state`.
VectorField evaluate_gradient(IterateState& state, const RegistrationProblem& problem,
                              const RegConfig& reg);

/// Reduced (Gauss-)Newton Hessian applied to vt: two hyperbolic solves, the
/// incremental body force, then beta_v B[vt] + L[bt].
VectorField hessian_matvec(IterateState& state, const VectorField& vt,
                           const RegConfig& reg, bool gauss_newton);

struct PcgResult {
    VectorField direction;
    int iterations = 0;
    double eta = 0.0;
    bool negative_curvature = false;
};

/// Preconditioned CG on H vt = -g with zero initial guess; stops when the
/// l2 residual drops below eta_k relative to its initial value.
PcgResult pcg_solve(IterateState& state, const RegistrationProblem& problem,
                    const RegConfig& reg, const SolverConfig& cfg, double g0_l2);

/// Full registration driver (outer iteration); v starts from zero.
std::pair<VectorField, SolverReport> register_images(const RegistrationProblem& problem,
                                                     const RegConfig& reg,
                                                     const SolverConfig& cfg);

struct ContinuationTrial {
    double beta_v = 0.0;
    bool feasible = false;
    double det_min = 0.0;
    double det_max = 0.0;
    double resid_rel = 0.0;
    SolveStatus status = SolveStatus::max_outer;
};

struct ContinuationResult {
    double beta_v_star = 0.0;
    VectorField v;
    SolverReport report;
    std::vector<ContinuationTrial> trials;
    bool infeasible_at_init = false;
};

/// Search for the smallest beta_v whose solution keeps min(det F_1) above
/// det_bound: divide by 10 while feasible, then bisect on the log scale
/// until the bracket ratio is at most 2^(1/4) (at most 20 solves), and
/// re-verify the returned weight.
ContinuationResult continuation_beta_v(const RegistrationProblem& problem, RegConfig reg,
                                       const SolverConfig& cfg, double det_bound,
                                       double beta_v_init);

}  // namespace velo
