#include "gorlicz/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "gorlicz/capacity.hpp"
#include "gorlicz/conditions.hpp"
#include "gorlicz/diagnostics.hpp"

namespace gorlicz {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const Box kEverywhere{{-1e300, -1e300}, {1e300, 1e300}};

CoefficientField coefficient(const Config& cfg, const std::string& key) {
    const Expression e = cfg.get_expression("phi", key);
    return CoefficientField{[e](const Point& x) { return e(x); }, kEverywhere, e.text()};
}

Point get_point(const Config& cfg, const std::string& section, const std::string& key, Point fallback) {
    if (!cfg.has(section, key)) return fallback;
    const auto pts = cfg.get_points(section, key);
    if (pts.size() != 1) {
        const auto& e = cfg.entry(section, key);
        throw ParseError("'" + key + "' must be a single point", e.line, e.column);
    }
    return pts.front();
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

fs::path resolve_out(const Config& cfg, const RunOptions& options) {
    fs::path dir = options.out_dir ? *options.out_dir : fs::path(cfg.get_string("output", "dir", "gorlicz_out"));
    fs::create_directories(dir);
    return dir;
}

struct Outcome {
    Verdict verdict = Verdict::Pass;
    void merge(Verdict v) {
        if (v == Verdict::Fail || verdict == Verdict::Fail) {
            verdict = Verdict::Fail;
        } else if (v == Verdict::NonConclusive) {
            verdict = Verdict::NonConclusive;
        }
    }
    int code() const {
        switch (verdict) {
            case Verdict::Pass: return kExitPass;
            case Verdict::Fail: return kExitFail;
            case Verdict::NonConclusive: return kExitNonConclusive;
        }
        return kExitFail;
    }
};

std::vector<std::size_t> ball_cells(const Domain& d, const Point& c, double r) {
    return d.cells_in_ball(Ball{c, r}, CellSet::Inside);
}

Verdict run_caccioppoli(const Config& cfg, const ObstacleProblem& problem, const Solution& sol,
                        CaccioppoliVariant variant, const fs::path& dir, std::ostream& log) {
    const Box box = problem.domain.bounding_box();
    const Point mid{0.5 * (box.lo[0] + box.hi[0]), 0.5 * (box.lo[1] + box.hi[1])};
    std::vector<Point> centers{mid};
    if (variant == CaccioppoliVariant::Boundary) {
        centers = cfg.get_points("diagnostics", "x0");
    } else if (cfg.has("diagnostics", "centers")) {
        centers = cfg.get_points("diagnostics", "centers");
    }
    const std::vector<double> radii = cfg.get_numbers("diagnostics", "radii");
    std::vector<CaccioppoliBall> balls;
    for (const Point& c : centers) {
        for (double R : radii) {
            CaccioppoliBall b;
            b.center = c;
            if (variant == CaccioppoliVariant::InteriorK) {
                b.R = R;
                b.r = 0.5 * R;
                b.k = std::numeric_limits<double>::quiet_NaN();
            } else {
                b.r = R;
            }
            balls.push_back(b);
        }
    }
    BoundaryCaccioppoliHypotheses hyp;
    if (variant == CaccioppoliVariant::Boundary) {
        if (cfg.has("diagnostics", "r0")) {
            hyp.r0 = cfg.get_number("diagnostics", "r0");
        } else {
            const ComparisonHypotheses h = verify_comparison_hypotheses(problem.phi, problem.domain);
            hyp.a0_a1_verified = h.a0 && h.a1;
        }
    }
    const CaccioppoliReport rep = caccioppoli_sweep(problem, sol, variant, balls, hyp,
                                                    cfg.get_number("diagnostics", "max_spread", 10.0));
    auto out = open_out(dir / ("caccioppoli_" + to_string(variant) + ".csv"));
    write_csv(out, rep);
    log << summary(rep);
    return rep.pass ? Verdict::Pass : Verdict::Fail;
}

Verdict run_boundary_continuity(const Config& cfg, const ObstacleProblem& problem, const Solution& sol,
                                const fs::path& dir, std::ostream& log) {
    const Point x0 = get_point(cfg, "diagnostics", "x0", {0.0, 0.0});
    const std::vector<double> radii = cfg.get_numbers("diagnostics", "radii");
    const std::string fat = cfg.get_string("diagnostics", "fatness", "auto");
    bool certified = false;
    if (fat == "true") {
        certified = true;
    } else if (fat == "auto") {
        const BoundaryPointReport bp = classify_boundary_point(problem.domain, problem.phi, x0, radii);
        certified = !bp.radii.empty() && bp.c_star_capacity >= 0.05;
        auto out = open_out(dir / "boundary_point.csv");
        write_csv(out, bp);
    } else if (fat != "false") {
        const auto& e = cfg.entry("diagnostics", "fatness");
        throw ParseError("fatness must be true, false or auto", e.line, e.column);
    }
    const Expression f = cfg.get_expression("problem", "boundary");
    const BoundaryContinuityReport rep = boundary_continuity_check(
        problem, sol, [&f](const Point& x) { return f(x); }, x0, radii, certified,
        cfg.get_number("diagnostics", "tol", 1e-3));
    auto out = open_out(dir / "boundary_continuity.csv");
    write_csv(out, rep);
    log << summary(rep);
    return rep.verdict;
}

Verdict run_gehring(const Config& cfg, const RunOptions& options, const ObstacleProblem& problem, const Solution& sol,
                    const fs::path& dir, std::ostream& log) {
    const int levels = static_cast<int>(cfg.get_number("diagnostics", "levels", 3));
    if (levels < 2) {
        const auto& e = cfg.entry("diagnostics", "levels");
        throw ParseError("at least two refinement levels are needed", e.line, e.column);
    }
    std::vector<double> eps = cfg.has("diagnostics", "eps") ? cfg.get_numbers("diagnostics", "eps")
                                                             : std::vector<double>{0.25, 0.5, 1.0, 1.5, 2.0, 3.0};
    std::vector<std::pair<ObstacleProblem, Solution>> runs;
    runs.emplace_back(problem, sol);
    const PhiFunction phi = build_phi(cfg);
    const SolveOptions so = build_solve_options(cfg, options.seed);
    for (int l = 1; l < levels; ++l) {
        const Domain d = build_domain(cfg, options.grid_scale * std::ldexp(1.0, l));
        ObstacleProblem p = build_problem(cfg, d, phi);
        Solution s = solve(p, so);
        runs.emplace_back(std::move(p), std::move(s));
    }
    const GehringReport rep = gehring_estimate(runs, eps, cfg.get_number("diagnostics", "max_growth", 1.2));
    auto out = open_out(dir / "gehring.csv");
    write_csv(out, rep);
    log << summary(rep);
    return rep.eps_star > 0.0 ? Verdict::Pass : Verdict::Fail;
}

Verdict run_restriction(const Config& cfg, const ObstacleProblem& problem, const Solution& sol, const fs::path& dir,
                        std::ostream& log) {
    const Box box = problem.domain.bounding_box();
    const Point mid{0.5 * (box.lo[0] + box.hi[0]), 0.5 * (box.lo[1] + box.hi[1])};
    const Point c = get_point(cfg, "diagnostics", "sub_center", mid);
    const double r = cfg.get_number("diagnostics", "sub_radius", 0.25 * problem.domain.diameter());
    const double tol = cfg.get_number("diagnostics", "tol", 1e-6);
    const RestrictionReport rep = local_min_restriction_check(problem, sol.u, ball_cells(problem.domain, c, r), tol);
    auto out = open_out(dir / "restriction.csv");
    out << "energy_restricted,energy_resolved,gap,pass\n"
        << num(rep.energy_restricted) << ',' << num(rep.energy_resolved) << ',' << num(rep.gap) << ','
        << (rep.pass ? "true" : "false") << '\n';
    log << "local minimality on sub-domain: gap " << rep.gap << " -> " << (rep.pass ? "pass" : "fail") << '\n';
    return rep.pass ? Verdict::Pass : Verdict::Fail;
}

void write_meta(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& entries) {
    auto out = open_out(path);
    for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
}

int command_run(const Config& cfg, const fs::path& config_path, const RunOptions& options, std::ostream& log) {
    const fs::path dir = resolve_out(cfg, options);
    const PhiFunction phi = build_phi(cfg);
    const Domain domain = build_domain(cfg, options.grid_scale);
    const ObstacleProblem problem = build_problem(cfg, domain, phi);
    const SolveOptions so = build_solve_options(cfg, options.seed);
    const Solution sol = solve(problem, so);

    write_grid(dir / "solution.grid", domain, sol.u);
    std::vector<std::pair<std::string, std::string>> meta = {
        {"config", config_path.filename().string()},
        {"domain", domain.name()},
        {"n", std::to_string(domain.dim())},
        {"h", num(domain.h())},
        {"dims", std::to_string(domain.nx()) + " " + std::to_string(domain.ny())},
        {"phi", phi.describe()},
        {"inside_cells", std::to_string(domain.interior_cells().size())},
        {"iterations", std::to_string(sol.iterations)},
        {"converged", sol.converged ? "true" : "false"},
        {"energy", num(sol.energy)},
        {"kkt_residual", num(sol.kkt_residual)},
        {"smoothing", num(sol.smoothing)},
        {"contact_cells", std::to_string(sol.contact_set.size())},
        {"contact_tol", num(sol.contact_tol)},
        {"seed", std::to_string(so.seed)},
    };

    Outcome outcome;
    if (!sol.converged) outcome.merge(Verdict::Fail);
    log << "solve: " << sol.iterations << " iterations, converged " << (sol.converged ? "yes" : "no")
        << ", energy " << sol.energy << ", residual " << sol.kkt_residual << '\n';

    if (cfg.has("problem", "reference")) {
        const fs::path ref_path = cfg.base_dir() / cfg.get_string("problem", "reference");
        const GridFile ref = read_grid(ref_path);
        if (ref.dims != domain.dims() || std::abs(ref.h - domain.h()) > 1e-12 * domain.h()) {
            throw ArgumentError("reference grid '" + ref_path.string() + "' does not match the solution lattice");
        }
        double diff = 0.0;
        for (std::size_t idx : domain.interior_cells()) diff = std::max(diff, std::abs(sol.u[idx] - ref.values[idx]));
        const double tol = cfg.get_number("problem", "reference_tol", 1e-6);
        meta.emplace_back("reference_max_diff", num(diff));
        meta.emplace_back("reference_tol", num(tol));
        log << "reference max difference " << diff << " (tolerance " << tol << ")\n";
        if (diff > tol) outcome.merge(Verdict::Fail);
    }

    std::vector<std::string> checks;
    if (options.checks) {
        checks = *options.checks;
    } else if (cfg.has("diagnostics", "checks")) {
        checks = cfg.get_words("diagnostics", "checks");
    }
    std::ostringstream summary_text;
    for (const std::string& check : checks) {
        Verdict v;
        if (check == "caccioppoli_k") {
            v = run_caccioppoli(cfg, problem, sol, CaccioppoliVariant::InteriorK, dir, summary_text);
        } else if (check == "caccioppoli_mean") {
            v = run_caccioppoli(cfg, problem, sol, CaccioppoliVariant::InteriorMean, dir, summary_text);
        } else if (check == "caccioppoli_boundary") {
            v = run_caccioppoli(cfg, problem, sol, CaccioppoliVariant::Boundary, dir, summary_text);
        } else if (check == "boundary_continuity") {
            v = run_boundary_continuity(cfg, problem, sol, dir, summary_text);
        } else if (check == "gehring") {
            v = run_gehring(cfg, options, problem, sol, dir, summary_text);
        } else if (check == "restriction") {
            v = run_restriction(cfg, problem, sol, dir, summary_text);
        } else {
            throw ArgumentError("unknown diagnostic '" + check + "'");
        }
        meta.emplace_back("check." + check, to_string(v));
        outcome.merge(v);
    }
    meta.emplace_back("verdict", to_string(outcome.verdict));
    write_meta(dir / "solution.meta", meta);
    if (!checks.empty()) {
        auto out = open_out(dir / "summary.txt");
        out << summary_text.str();
        log << summary_text.str();
    }
    return outcome.code();
}

int command_conditions(const Config& cfg, const RunOptions& options, std::ostream& log) {
    const fs::path dir = resolve_out(cfg, options);
    const PhiFunction phi = build_phi(cfg);
    const Domain domain = build_domain(cfg, options.grid_scale);
    std::vector<std::string> checks = cfg.has("conditions", "checks") ? cfg.get_words("conditions", "checks")
                                                                      : std::vector<std::string>{"A0", "aInc", "aDec", "A1"};
    const std::vector<double> t_grid =
        geometric_grid(cfg.get_number("conditions", "t_min", 1e-3), cfg.get_number("conditions", "t_max", 1e3),
                       static_cast<int>(cfg.get_number("conditions", "t_count", 121)));

    std::vector<ConditionReport> reports;
    for (const std::string& c : checks) {
        if (c == "A0") {
            reports.push_back(check_A0(phi, domain, default_beta_grid()));
        } else if (c == "aInc") {
            reports.push_back(check_aInc_aDec(phi, domain, cfg.get_number("conditions", "p", phi.p_lower()),
                                              Monotonicity::Inc, t_grid));
        } else if (c == "aDec") {
            reports.push_back(check_aInc_aDec(phi, domain, cfg.get_number("conditions", "q", phi.q_upper()),
                                              Monotonicity::Dec, t_grid));
        } else if (c == "A1" || c == "A1n") {
            std::vector<Point> centers =
                cfg.has("conditions", "centers") ? cfg.get_points("conditions", "centers") : sample_points(domain, 9);
            const double r_max = cfg.get_number("conditions", "r_max", 0.25 * domain.diameter());
            const int levels = static_cast<int>(cfg.get_number("conditions", "levels", 5));
            reports.push_back(check_A1(phi, domain, dyadic_ball_sampler(centers, r_max, levels),
                                       c == "A1" ? A1Mode::A1 : A1Mode::A1n));
        } else {
            throw ArgumentError("unknown condition '" + c + "'");
        }
    }

    auto out = open_out(dir / "conditions.csv");
    out << "condition,holds,witness,exponent,beta_decay_slope,x,y,t,s,radius,beta,lhs,rhs,skipped\n";
    out << std::setprecision(10);
    bool all = true;
    for (const auto& r : reports) {
        all = all && r.holds;
        out << to_string(r.condition) << ',' << (r.holds ? "true" : "false") << ',' << r.witness_beta_or_L << ','
            << r.exponent << ',' << r.beta_decay_slope << ',';
        if (r.violating_sample) {
            const auto& s = *r.violating_sample;
            out << s.x[0] << ',' << s.x[1] << ',' << s.t << ',' << (s.s ? num(*s.s) : "") << ','
                << (s.radius ? num(*s.radius) : "") << ',' << (s.beta ? num(*s.beta) : "") << ',' << s.lhs << ','
                << s.rhs;
        } else {
            out << ",,,,,,,";
        }
        out << ',' << r.skipped << '\n';
        log << to_string(r.condition) << ": " << (r.holds ? "holds" : "violated") << " (witness "
            << r.witness_beta_or_L << ")" << (r.note.empty() ? "" : " - " + r.note) << '\n';
    }
    return all ? kExitPass : kExitFail;
}

int command_capacity(const Config& cfg, const RunOptions& options, std::ostream& log) {
    const fs::path dir = resolve_out(cfg, options);
    const PhiFunction phi = build_phi(cfg);
    const int cells = static_cast<int>(cfg.get_number("capacity", "cells_per_radius", 16));
    auto out = open_out(dir / "capacity.csv");
    out << std::setprecision(10);
    if (cfg.has("capacity", "x0")) {
        const Domain domain = build_domain(cfg, options.grid_scale);
        const std::vector<double> radii = cfg.get_numbers("capacity", "radii");
        out << "x0,y0,radius,density_ratio,fatness_ratio\n";
        for (const Point& x0 : cfg.get_points("capacity", "x0")) {
            const BoundaryPointReport rep = classify_boundary_point(domain, phi, x0, radii, cells);
            for (const auto& w : rep.warnings) log << "warning: " << w << '\n';
            for (std::size_t k = 0; k < rep.radii.size(); ++k) {
                out << x0[0] << ',' << x0[1] << ',' << rep.radii[k] << ',' << rep.measure_density_ratios[k] << ','
                    << rep.fatness_ratios[k] << '\n';
            }
            log << "boundary point (" << x0[0] << ", " << x0[1] << "): c*_measure " << rep.c_star_measure
                << ", c*_capacity " << rep.c_star_capacity << '\n';
        }
        return kExitPass;
    }
    const Point c = get_point(cfg, "capacity", "center", {0.0, 0.0});
    const std::vector<double> radii = cfg.get_numbers("capacity", "radii");
    const int n = cfg.get_string("domain", "shape", "disk") == "interval" ? 1 : 2;
    out << "center_x,center_y,radius,capacity,lower,upper\n";
    for (double r : radii) {
        const CapacityResult cap = ball_capacity(phi, c, r, n, cells);
        const CapacityBounds b = ball_capacity_bounds(phi, c, r, n, cells);
        out << c[0] << ',' << c[1] << ',' << r << ',' << cap.value << ',' << b.lower << ',' << b.upper << '\n';
        log << "C(B(" << r << "), 2B) = " << cap.value << "  bounds [" << b.lower << ", " << b.upper << "]\n";
    }
    return kExitPass;
}

}  // namespace

PhiFunction build_phi(const Config& cfg) {
    const std::string family = cfg.get_string("phi", "family");
    if (family == "power") return PhiFunction::power(cfg.get_number("phi", "p"));
    if (family == "double_phase") {
        return PhiFunction::double_phase(cfg.get_number("phi", "p"), cfg.get_number("phi", "q"),
                                         coefficient(cfg, "weight"));
    }
    if (family == "variable_exponent") {
        return PhiFunction::variable_exponent(coefficient(cfg, "exponent"), cfg.get_number("phi", "p_lower"),
                                              cfg.get_number("phi", "q_upper"));
    }
    if (family == "orlicz") {
        const Expression e = cfg.get_expression("phi", "samples");
        return PhiFunction::orlicz_sampled([e](double t) { return e(0.0, 0.0, t); }, cfg.get_number("phi", "t_min", 1e-6),
                                           cfg.get_number("phi", "t_max", 1e6),
                                           static_cast<int>(cfg.get_number("phi", "count", 241)),
                                           cfg.get_number("phi", "p_lower"), cfg.get_number("phi", "q_upper"),
                                           cfg.get_number("phi", "L", 1.0),
                                           cfg.get_bool("phi", "strictly_convex", true));
    }
    if (family == "custom") {
        const Expression e = cfg.get_expression("phi", "expr");
        return PhiFunction::custom([e](const Point& x, double t) { return e(x[0], x[1], t); },
                                   cfg.get_number("phi", "p_lower"), cfg.get_number("phi", "q_upper"),
                                   cfg.get_number("phi", "L", 1.0), cfg.get_bool("phi", "strictly_convex", true));
    }
    const auto& e = cfg.entry("phi", "family");
    throw ParseError("unknown phi family '" + family + "'", e.line, e.column);
}

Domain build_domain(const Config& cfg, double grid_scale) {
    if (!(grid_scale > 0.0)) throw ArgumentError("grid scale must be positive");
    const std::string shape = cfg.get_string("domain", "shape");
    const double h = cfg.get_number("domain", "h") / grid_scale;
    Shape s;
    if (shape == "interval") {
        s = Shape::interval(cfg.get_number("domain", "a", 0.0), cfg.get_number("domain", "b", 1.0));
    } else if (shape == "rectangle") {
        s = Shape::rectangle(get_point(cfg, "domain", "lo", {0.0, 0.0}), get_point(cfg, "domain", "hi", {1.0, 1.0}));
    } else if (shape == "disk") {
        s = Shape::disk(get_point(cfg, "domain", "center", {0.0, 0.0}), cfg.get_number("domain", "radius", 1.0));
    } else if (shape == "l_shape") {
        s = Shape::l_shape(cfg.get_number("domain", "a", 1.0));
    } else if (shape == "slit_disk") {
        s = Shape::slit_disk(get_point(cfg, "domain", "center", {0.0, 0.0}), cfg.get_number("domain", "radius", 1.0));
    } else if (shape == "cusp_square") {
        s = Shape::cusp_square(cfg.get_number("domain", "a", 1.0), cfg.get_number("domain", "k", 0.5),
                               cfg.get_number("domain", "power", 2.0));
    } else {
        const auto& e = cfg.entry("domain", "shape");
        throw ParseError("unknown shape '" + shape + "'", e.line, e.column);
    }
    return Domain::rasterize(s, h);
}

ObstacleProblem build_problem(const Config& cfg, const Domain& domain, const PhiFunction& phi) {
    const Expression f = cfg.get_expression("problem", "boundary");
    ObstacleProblem p{domain, phi, std::nullopt, ScalarField::sample(domain, [&f](const Point& x) { return f(x); })};
    if (cfg.has("problem", "obstacle")) {
        const Expression psi = cfg.get_expression("problem", "obstacle");
        p.obstacle = ScalarField::sample(domain, [&psi](const Point& x) { return psi(x); });
    }
    p.smoothing = cfg.get_number("problem", "smoothing", -1.0);
    return p;
}

SolveOptions build_solve_options(const Config& cfg, std::optional<std::uint64_t> seed) {
    SolveOptions o;
    const std::string method = cfg.get_string("solver", "method", "newton");
    if (method == "newton") {
        o.method = SolverMethod::Newton;
    } else if (method == "gauss_seidel") {
        o.method = SolverMethod::GaussSeidel;
    } else if (method == "projected_gradient") {
        o.method = SolverMethod::ProjectedGradient;
    } else {
        const auto& e = cfg.entry("solver", "method");
        throw ParseError("unknown solver method '" + method + "'", e.line, e.column);
    }
    o.max_iters = static_cast<int>(cfg.get_number("solver", "max_iters", o.max_iters));
    o.tol = cfg.get_number("solver", "tol", o.tol);
    o.omega = cfg.get_number("solver", "omega", o.omega);
    o.contact_tol = cfg.get_number("solver", "contact_tol", o.contact_tol);
    o.random_start = cfg.get_bool("solver", "random_start", false);
    o.seed = seed ? *seed : static_cast<std::uint64_t>(cfg.get_number("solver", "seed", 0));
    return o;
}

int execute(const std::string& command, const fs::path& config, const RunOptions& options, std::ostream& log,
            std::ostream& err) {
    try {
        const Config cfg = Config::load(config);
        if (command == "run") return command_run(cfg, config, options, log);
        if (command == "diagnose") return command_run(cfg, config, options, log);
        if (command == "verify-conditions") return command_conditions(cfg, options, log);
        if (command == "capacity") return command_capacity(cfg, options, log);
        err << "unknown command '" << command << "'\n";
        return kExitError;
    } catch (const ParseError& e) {
        err << config.string() << ": " << e.what() << '\n';
    } catch (const InfeasibleError& e) {
        err << "infeasible problem: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return kExitError;
}

}  // namespace gorlicz
