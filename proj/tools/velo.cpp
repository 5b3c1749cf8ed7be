// Command-line front end: registration, beta_v continuation, deformation
// analysis, and synthetic problem generation.

#include "velo/io.hpp"
#include "velo/metrics.hpp"
#include "velo/operators.hpp"
#include "velo/optimizer.hpp"
#include "velo/problems.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace velo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

struct RegFlags {
    std::string model = "h1";
    double beta_v = 1e-1;
    double beta_w = 1e-4;
    int gamma = 0;
    double nu = 1.0;
    bool incompressible = false;
    double grad_tol = 1e-3;
    int max_outer = 50;
    int max_inner = 500;
    std::string gauss_newton = "on";
    int nt_init = 0;
    double cfl_safety = 0.8;
    double sigma_smooth = 0.0;  // presmoothing sigma in units of h
    bool verbose = false;
};

void add_reg_flags(CLI::App* cmd, RegFlags& f) {
    cmd->add_option("--model", f.model, "regularization model")
        ->check(CLI::IsMember({"h1", "h2", "nlstokes", "tv"}))
        ->capture_default_str();
    cmd->add_option("--beta-v", f.beta_v, "velocity regularization weight")
        ->capture_default_str();
    cmd->add_option("--beta-w", f.beta_w, "mass-source regularization weight")
        ->capture_default_str();
    cmd->add_option("--gamma", f.gamma, "enable the divergence constraint")
        ->check(CLI::IsMember({0, 1}))
        ->capture_default_str();
    cmd->add_option("--nu", f.nu, "flow-law exponent (nlstokes)")->capture_default_str();
    cmd->add_flag("--incompressible", f.incompressible, "enforce w = 0 (with --gamma 1)");
    cmd->add_option("--grad-tol", f.grad_tol, "relative gradient reduction target")
        ->capture_default_str();
    cmd->add_option("--max-outer", f.max_outer, "outer iteration cap")
        ->capture_default_str();
    cmd->add_option("--max-inner", f.max_inner, "PCG iteration cap")->capture_default_str();
    cmd->add_option("--gauss-newton", f.gauss_newton, "Gauss-Newton approximation")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    cmd->add_option("--nt-init", f.nt_init, "initial time-step count (0: 2 max(n))")
        ->capture_default_str();
    cmd->add_option("--cfl-safety", f.cfl_safety, "CFL safety factor")
        ->capture_default_str();
    cmd->add_option("--sigma-smooth", f.sigma_smooth,
                    "presmoothing sigma as a multiple of the grid spacing")
        ->capture_default_str();
    cmd->add_flag("--verbose", f.verbose, "per-iteration progress on stderr");
    static std::string config_path_sink;
    cmd->add_option("--config", config_path_sink,
                    "flat key=value configuration file (flags win)");
}

// Expand `--config FILE` into option tokens placed before the explicit
// flags, so command-line values take precedence (take-last policy).
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string path;
    for (size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty() || args.size() < 2) return args;

    std::ifstream in(path);
    if (!in) throw io_error("config: cannot open " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        const size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        const size_t eq = line.find('=');
        if (eq == std::string::npos) throw io_error("config: expected key=value, got " + line);
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string s) {
            const size_t x = s.find_first_not_of(" \t");
            const size_t y = s.find_last_not_of(" \t");
            return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        key = trim(key);
        value = trim(value);
        if (value == "true" || value == "on") {
            tokens.push_back("--" + key);
        } else if (value == "false" || value == "off") {
            // absent flag; nothing to add
        } else {
            tokens.push_back("--" + key);
            tokens.push_back(value);
        }
    }
    std::vector<std::string> merged;
    merged.push_back(args[0]);
    merged.push_back(args[1]);  // subcommand
    merged.insert(merged.end(), tokens.begin(), tokens.end());
    merged.insert(merged.end(), args.begin() + 2, args.end());
    return merged;
}

RegConfig to_reg_config(const RegFlags& f) {
    RegConfig reg;
    if (f.model == "h1") reg.model = RegModel::H1Seminorm;
    else if (f.model == "h2") reg.model = RegModel::H2Seminorm;
    else if (f.model == "nlstokes") reg.model = RegModel::NonlinearStokes;
    else reg.model = RegModel::TotalVariation;
    reg.beta_v = f.beta_v;
    reg.beta_w = f.beta_w;
    reg.gamma = f.gamma;
    reg.nu = f.nu;
    reg.incompressible = f.incompressible;
    reg.validate();
    return reg;
}

SolverConfig to_solver_config(const RegFlags& f) {
    SolverConfig cfg;
    cfg.grad_tol = f.grad_tol;
    cfg.max_outer = f.max_outer;
    cfg.max_inner = f.max_inner;
    cfg.gauss_newton = f.gauss_newton == "on";
    cfg.nt_init = f.nt_init;
    cfg.cfl_safety = f.cfl_safety;
    cfg.verbose = f.verbose;
    cfg.validate();
    return cfg;
}

ScalarField read_image(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".raw")
        return read_raw_scalar(path);
    return read_pgm(path);
}

RegistrationProblem load_problem(const std::string& mr_path, const std::string& mt_path,
                                 double sigma_smooth) {
    RegistrationProblem p;
    ScalarField mr = read_image(mr_path);
    ScalarField mt = read_image(mt_path);
    if (mr.grid != mt.grid)
        throw io_error("reference and template images have different dimensions");
    const double sigma = sigma_smooth * mr.grid.min_h();
    p.m_R = normalize_and_presmooth(mr, sigma, sigma);
    p.m_T = normalize_and_presmooth(mt, sigma, sigma);
    return p;
}

void write_ledger(const SolverReport& report, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"k", "objective", "grad_rel_inf", "grad_l2", "resid_rel", "alpha", "inner",
             "eta", "div_inf", "v_inf", "n_matvec", "n_pde"});
    for (const auto& r : report.ledger)
        csv.row({CsvWriter::num(long(r.k)), CsvWriter::num(r.objective),
                 CsvWriter::num(r.grad_rel_inf), CsvWriter::num(r.grad_l2),
                 CsvWriter::num(r.resid_rel), CsvWriter::num(r.alpha),
                 CsvWriter::num(long(r.inner)), CsvWriter::num(r.eta),
                 CsvWriter::num(r.div_inf), CsvWriter::num(r.v_inf),
                 CsvWriter::num(r.n_matvec), CsvWriter::num(r.n_pde)});
}

void write_summary(const SolverReport& report, const DeformationAnalysis& def,
                   double resid_rel, const std::string& path) {
    const auto& last = report.final_record();
    const double grad_rel_l2_sq =
        report.g0_l2 == 0.0
            ? 0.0
            : (last.grad_l2 / report.g0_l2) * (last.grad_l2 / report.g0_l2);
    CsvWriter csv(path);
    csv.row({"status", "n_mv", "n_pde", "grad_rel", "resid_rel", "det_min", "det_mean",
             "det_max", "dist_mean", "dist_max"});
    csv.row({to_string(report.status), CsvWriter::num(report.n_matvec),
             CsvWriter::num(report.n_pde), CsvWriter::num(grad_rel_l2_sq),
             CsvWriter::num(resid_rel), CsvWriter::num(def.det_min),
             CsvWriter::num(def.det_mean), CsvWriter::num(def.det_max),
             CsvWriter::num(def.dist_mean), CsvWriter::num(def.dist_max)});
}

int write_registration_outputs(const VectorField& v, const SolverReport& report,
                               const RegistrationProblem& problem, const SolverConfig& cfg,
                               double det_lo, double det_hi, const std::string& out_dir) {
    fs::create_directories(out_dir);
    // The solved (normalized, presmoothed) images are stored so that every
    // summary metric can be recomputed from raw fields by `analyze`; the
    // deformation diagnostics and the residual below follow the exact code
    // path analyze uses.
    write_raw_field(problem.m_R, out_dir + "/mr_used.raw");
    write_raw_field(problem.m_T, out_dir + "/mt_used.raw");
    const int nt = cfl_timesteps(v, cfg.nt_seed(v.grid), cfg.cfl_safety);
    DeformationAnalysis def = analyze_deformation(v, nt, nullptr);
    write_raw_field(v, out_dir + "/velocity.raw");
    write_raw_field(def.u1, out_dir + "/displacement.raw");
    write_detf_colormap(def.det_f1, det_lo, det_hi, out_dir + "/detF.ppm");
    TimeSeriesField m = solve_state(problem.m_T, v, nt);
    write_raw_field(ScalarField{v.grid, m.back()}, out_dir + "/m1.raw");
    const double den = (problem.m_R.data - problem.m_T.data).square().sum();
    const double resid_rel =
        den == 0.0 ? 0.0 : (problem.m_R.data - m.back()).square().sum() / den;
    write_ledger(report, out_dir + "/ledger.csv");
    write_summary(report, def, resid_rel, out_dir + "/summary.csv");
    return report.status == SolveStatus::converged ? kExitOk : kExitSolver;
}

int cmd_register(const RegFlags& flags, const std::string& mr, const std::string& mt,
                 const std::string& out_dir, double det_lo, double det_hi) {
    RegConfig reg = to_reg_config(flags);
    SolverConfig cfg = to_solver_config(flags);
    RegistrationProblem problem = load_problem(mr, mt, flags.sigma_smooth);
    auto [v, report] = register_images(problem, reg, cfg);
    return write_registration_outputs(v, report, problem, cfg, det_lo, det_hi, out_dir);
}

int cmd_continue(const RegFlags& flags, const std::string& mr, const std::string& mt,
                 const std::string& out_dir, double det_bound, double beta_v_init,
                 double det_lo, double det_hi) {
    RegConfig reg = to_reg_config(flags);
    SolverConfig cfg = to_solver_config(flags);
    RegistrationProblem problem = load_problem(mr, mt, flags.sigma_smooth);
    ContinuationResult res = continuation_beta_v(problem, reg, cfg, det_bound, beta_v_init);

    fs::create_directories(out_dir);
    {
        CsvWriter csv(out_dir + "/trials.csv");
        csv.row({"beta_v", "feasible", "det_min", "det_max", "resid_rel", "status"});
        for (const auto& t : res.trials)
            csv.row({CsvWriter::num(t.beta_v), t.feasible ? "1" : "0",
                     CsvWriter::num(t.det_min), CsvWriter::num(t.det_max),
                     CsvWriter::num(t.resid_rel), to_string(t.status)});
    }
    if (res.infeasible_at_init) {
        std::cerr << "velo continue: determinant bound violated at beta_v_init\n";
        write_registration_outputs(res.v, res.report, problem, cfg, det_lo, det_hi, out_dir);
        return kExitSolver;
    }
    return write_registration_outputs(res.v, res.report, problem, cfg, det_lo, det_hi,
                                      out_dir);
}

int cmd_analyze(const std::string& v_path, const std::string& mr, const std::string& mt,
                const std::string& lr, const std::string& lt, int upsample,
                double sigma_factor, double threshold, double mask_threshold, int nt_init,
                double cfl_safety, double det_lo, double det_hi,
                const std::string& out_dir) {
    VectorField v = read_raw_vector(v_path);
    fs::create_directories(out_dir);
    const int seed = nt_init > 0 ? nt_init : 2 * std::max(v.grid.n1, v.grid.n2);
    const int nt = cfl_timesteps(v, seed, cfl_safety);

    ScalarField mask(v.grid);
    const ScalarField* mask_ptr = nullptr;
    ScalarField mr_img(v.grid);
    if (!mr.empty()) mr_img = read_image(mr);
    if (mask_threshold > 0.0) {
        if (mr.empty()) throw io_error("--mask-threshold requires --mr");
        mask.data = (mr_img.data > mask_threshold * mr_img.data.maxCoeff()).cast<double>();
        mask_ptr = &mask;
    }

    DeformationAnalysis def = analyze_deformation(v, nt, mask_ptr);
    write_raw_field(def.u1, out_dir + "/displacement.raw");
    write_detf_colormap(def.det_f1, det_lo, det_hi, out_dir + "/detF.ppm");

    std::vector<std::string> header = {"det_min", "det_mean", "det_max", "dist_mean",
                                       "dist_max"};
    std::vector<std::string> row = {CsvWriter::num(def.det_min),
                                    CsvWriter::num(def.det_mean),
                                    CsvWriter::num(def.det_max),
                                    CsvWriter::num(def.dist_mean),
                                    CsvWriter::num(def.dist_max)};
    if (!mr.empty() && !mt.empty()) {
        ScalarField mt_img = read_image(mt);
        TimeSeriesField m = solve_state(mt_img, v, nt);
        header.push_back("resid_rel");
        row.push_back(CsvWriter::num(
            relative_residual(mr_img, ScalarField{v.grid, m.back()}, mt_img)));
        write_raw_field(ScalarField{v.grid, m.back()}, out_dir + "/m1.raw");
    }
    if (!lr.empty() && !lt.empty()) {
        ScalarField label_r = read_image(lr);
        ScalarField label_t = read_image(lt);
        label_r.data = (label_r.data >= 0.5).cast<double>();
        label_t.data = (label_t.data >= 0.5).cast<double>();
        ScalarField moved =
            transport_labels(label_t, v, upsample, sigma_factor, threshold, cfl_safety);
        OverlapScores s = overlap(label_r, moved);
        write_pgm(moved, out_dir + "/label1.pgm");
        header.insert(header.end(), {"jsc", "dsc", "fpe", "fne"});
        row.insert(row.end(), {CsvWriter::num(s.jsc), CsvWriter::num(s.dsc),
                               CsvWriter::num(s.fpe), CsvWriter::num(s.fne)});
    }
    CsvWriter csv(out_dir + "/analysis.csv");
    csv.row(header);
    csv.row(row);
    return kExitOk;
}

int cmd_synth(const std::string& problem, int n, double shift, const std::string& out_dir) {
    Grid2D grid(n, n);
    RegistrationProblem p;
    if (problem == "blobs") {
        const double s = std::isnan(shift) ? 0.4 : shift;
        p = gen_blob_problem(grid, s, 0.5 * s);
    } else if (problem == "rectangles") {
        p = std::isnan(shift) ? gen_sliding_rectangles(grid)
                              : gen_sliding_rectangles(grid, shift);
    } else {
        p = std::isnan(shift) ? gen_sliding_vent(grid) : gen_sliding_vent(grid, shift);
    }
    fs::create_directories(out_dir);
    write_pgm(p.m_R, out_dir + "/mr.pgm");
    write_pgm(p.m_T, out_dir + "/mt.pgm");
    write_raw_field(p.m_R, out_dir + "/mr.raw");
    write_raw_field(p.m_T, out_dir + "/mt.raw");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stationary-velocity diffeomorphic registration with Stokes-type "
                 "regularization"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // register
    RegFlags reg_flags;
    std::string mr_path, mt_path, out_dir;
    double det_lo = 0.0, det_hi = 2.0;
    CLI::App* reg = app.add_subcommand("register", "solve one registration problem");
    reg->add_option("--mr", mr_path, "reference image (PGM or raw)")->required();
    reg->add_option("--mt", mt_path, "template image (PGM or raw)")->required();
    reg->add_option("--out", out_dir, "output directory")->required();
    reg->add_option("--det-lo", det_lo, "determinant colormap window low")
        ->capture_default_str();
    reg->add_option("--det-hi", det_hi, "determinant colormap window high")
        ->capture_default_str();
    add_reg_flags(reg, reg_flags);

    // continue
    RegFlags cont_flags;
    std::string cmr, cmt, cout_dir;
    double det_bound = 0.1, beta_v_init = 1.0, cdet_lo = 0.0, cdet_hi = 2.0;
    CLI::App* cont = app.add_subcommand("continue", "beta_v continuation with a bound on "
                                                    "min det(F1)");
    cont->add_option("--mr", cmr)->required();
    cont->add_option("--mt", cmt)->required();
    cont->add_option("--out", cout_dir)->required();
    cont->add_option("--det-bound", det_bound, "minimal tolerable det(F1)")
        ->capture_default_str();
    cont->add_option("--beta-v-init", beta_v_init, "starting regularization weight")
        ->capture_default_str();
    cont->add_option("--det-lo", cdet_lo)->capture_default_str();
    cont->add_option("--det-hi", cdet_hi)->capture_default_str();
    add_reg_flags(cont, cont_flags);

    // analyze
    std::string v_path, amr, amt, alr, alt, aout_dir;
    int upsample = 4, ant_init = 0;
    double sigma_factor = 3.0, threshold = 0.5, mask_threshold = 0.0, acfl = 0.8;
    double adet_lo = 0.0, adet_hi = 2.0;
    CLI::App* ana = app.add_subcommand("analyze", "recompute deformation diagnostics from "
                                                  "a stored velocity");
    ana->add_option("--v", v_path, "velocity field (raw, 2 components)")->required();
    ana->add_option("--out", aout_dir)->required();
    ana->add_option("--mr", amr, "reference image (for the residual)");
    ana->add_option("--mt", amt, "template image (for the residual)");
    ana->add_option("--lr", alr, "reference label map");
    ana->add_option("--lt", alt, "template label map");
    ana->add_option("--upsample", upsample)->capture_default_str();
    ana->add_option("--sigma-factor", sigma_factor)->capture_default_str();
    ana->add_option("--threshold", threshold)->capture_default_str();
    ana->add_option("--mask-threshold", mask_threshold,
                    "restrict det statistics to m_R above this fraction of its max");
    ana->add_option("--nt-init", ant_init)->capture_default_str();
    ana->add_option("--cfl-safety", acfl)->capture_default_str();
    ana->add_option("--det-lo", adet_lo)->capture_default_str();
    ana->add_option("--det-hi", adet_hi)->capture_default_str();

    // synth
    std::string sproblem = "blobs", sout_dir;
    int sn = 256;
    double sshift = std::numeric_limits<double>::quiet_NaN();
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic problem");
    synth->add_option("--problem", sproblem)
        ->check(CLI::IsMember({"blobs", "rectangles", "vent"}))
        ->capture_default_str();
    synth->add_option("--n", sn, "grid size per axis")->capture_default_str();
    synth->add_option("--shift", sshift, "shift/offset (problem-specific default)");
    synth->add_option("--out", sout_dir)->required();

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const io_error& e) {
        std::cerr << "velo: input error: " << e.what() << "\n";
        return kExitInput;
    }
    try {
        // CLI11 parses argument vectors in reverse order.
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        reversed.pop_back();  // drop argv[0]
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (reg->parsed())
            return cmd_register(reg_flags, mr_path, mt_path, out_dir, det_lo, det_hi);
        if (cont->parsed())
            return cmd_continue(cont_flags, cmr, cmt, cout_dir, det_bound, beta_v_init,
                                cdet_lo, cdet_hi);
        if (ana->parsed())
            return cmd_analyze(v_path, amr, amt, alr, alt, upsample, sigma_factor,
                               threshold, mask_threshold, ant_init, acfl, adet_lo,
                               adet_hi, aout_dir);
        if (synth->parsed()) return cmd_synth(sproblem, sn, sshift, sout_dir);
    } catch (const io_error& e) {
        std::cerr << "velo: input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "velo: invalid configuration: " << e.what() << "\n";
        return kExitInput;
    } catch (const instability_error& e) {
        std::cerr << "velo: solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "velo: error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitUsage;
}
