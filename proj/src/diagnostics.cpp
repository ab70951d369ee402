#include "gorlicz/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

namespace gorlicz {

namespace {

double ball_volume(double r, int n) {
    return n == 1 ? 2.0 * r : std::numbers::pi * r * r;
}

bool ball_inside(const Domain& d, const Point& x, double R) {
    if (!d.contains(x)) return false;
    for (std::size_t idx : d.cells_in_ball(Ball{x, R}, CellSet::All)) {
        if (!d.inside(idx)) return false;
    }
    return true;
}

double sup_obstacle(const ObstacleProblem& problem, const std::vector<std::size_t>& cells) {
    double s = -std::numeric_limits<double>::infinity();
    if (!problem.obstacle) return s;
    for (std::size_t idx : cells) s = std::max(s, (*problem.obstacle)[idx]);
    return s;
}

double phi_of_gradient(const Domain& d, const PhiFunction& phi, std::span<const double> field, std::size_t cell) {
    return phi.evaluate(d.position(cell), norm(gradient_at(d, field, cell)));
}

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

}  // namespace

std::string to_string(CaccioppoliVariant v) {
    switch (v) {
        case CaccioppoliVariant::InteriorK: return "interior-k";
        case CaccioppoliVariant::InteriorMean: return "interior-mean";
        case CaccioppoliVariant::Boundary: return "boundary";
    }
    return "?";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::NonConclusive: return "non-conclusive";
    }
    return "?";
}

CaccioppoliPair caccioppoli_interior_k(const ObstacleProblem& problem, const Solution& solution, const Point& x,
                                       double R, double r, double k) {
    const Domain& d = problem.domain;
    if (!(r > 0.0 && r < R)) throw ArgumentError("need 0 < r < R");
    if (!ball_inside(d, x, R)) throw ArgumentError("B(x, R) must lie inside Omega");
    const auto outer = d.cells_in_ball(Ball{x, R}, CellSet::Inside);
    const double sup_psi = sup_obstacle(problem, outer);
    if (k < sup_psi) throw ArgumentError("level k = " + fmt(k) + " is below sup psi = " + fmt(sup_psi) + " on B(x, R)");

    std::vector<double> w(d.size(), 0.0);
    for (std::size_t idx : d.cells(CellSet::Active)) w[idx] = std::max(solution.u[idx] - k, 0.0);

    const double vol = d.cell_volume();
    CaccioppoliPair pair;
    for (std::size_t idx : d.cells_in_ball(Ball{x, r}, CellSet::Measure)) {
        pair.lhs += phi_of_gradient(d, problem.phi, w, idx) * vol;
    }
    for (std::size_t idx : outer) {
        if (w[idx] > 0.0) pair.rhs += problem.phi.evaluate(d.position(idx), w[idx] / (R - r)) * vol;
    }
    pair.terms = {pair.rhs};
    return pair;
}

CaccioppoliPair caccioppoli_interior_mean(const ObstacleProblem& problem, const Solution& solution, const Point& x,
                                          double r) {
    const Domain& d = problem.domain;
    if (!(r > 0.0)) throw ArgumentError("radius must be positive");
    if (!ball_inside(d, x, 2.0 * r)) throw ArgumentError("2B must lie inside Omega");

    const auto ball = d.cells_in_ball(Ball{x, r}, CellSet::Measure);
    const auto big = d.cells_in_ball(Ball{x, 2.0 * r}, CellSet::Inside);
    const auto big_measure = d.cells_in_ball(Ball{x, 2.0 * r}, CellSet::Measure);
    if (ball.empty() || big.empty()) throw ArgumentError("ball contains no lattice cells");

    double psi_term = 0.0;
    if (problem.obstacle) {
        ScalarField grad_psi(d.size(), 0.0);
        for (std::size_t idx : big_measure) grad_psi[idx] = norm(gradient_at(d, problem.obstacle->values(), idx));
        const double lux = luxemburg_norm(d, problem.phi, grad_psi, big_measure).norm;
        if (!(lux < 1.0)) {
            throw ArgumentError("Luxemburg norm of grad psi on 2B is " + fmt(lux) + ", hypothesis needs < 1");
        }
        for (std::size_t idx : big_measure) psi_term += problem.phi.evaluate(d.position(idx), grad_psi[idx]);
        psi_term /= static_cast<double>(big_measure.size());
    }

    CaccioppoliPair pair;
    for (std::size_t idx : ball) pair.lhs += phi_of_gradient(d, problem.phi, solution.u.values(), idx);
    pair.lhs /= static_cast<double>(ball.size());

    double mean = 0.0;
    for (std::size_t idx : big) mean += solution.u[idx];
    mean /= static_cast<double>(big.size());
    const double diam = 4.0 * r;
    double osc_term = 0.0;
    for (std::size_t idx : big) {
        osc_term += problem.phi.evaluate(d.position(idx), std::abs(solution.u[idx] - mean) / diam);
    }
    osc_term /= static_cast<double>(big.size());

    pair.terms = {osc_term, psi_term, 1.0};
    pair.rhs = osc_term + psi_term + 1.0;
    return pair;
}

CaccioppoliPair caccioppoli_boundary(const ObstacleProblem& problem, const Solution& solution, const Point& x,
                                     double r, const BoundaryCaccioppoliHypotheses& hypotheses) {
    const Domain& d = problem.domain;
    if (!(r > 0.0)) throw ArgumentError("radius must be positive");
    if (ball_inside(d, x, 2.0 * r)) throw WrongVariantError("2B lies inside Omega; use the interior estimate");
    bool use_max = false;
    if (hypotheses.r0) {
        if (!(r < *hypotheses.r0 / 4.0)) {
            throw ArgumentError("boundary estimate needs r < r0 / 4 (r = " + fmt(r) + ", r0 = " + fmt(*hypotheses.r0) + ")");
        }
    } else if (hypotheses.a0_a1_verified) {
        use_max = true;
    } else {
        throw ArgumentError("boundary estimate needs r < r0 / 4 or verified (A0) and (A1)");
    }

    std::vector<double> f(d.size(), 0.0);
    for (std::size_t idx : d.cells(CellSet::Active)) {
        f[idx] = problem.boundary[idx];
        if (use_max && problem.obstacle) f[idx] = std::max(f[idx], (*problem.obstacle)[idx]);
    }

    const int n = d.dim();
    const double vol = d.cell_volume();
    const double b = ball_volume(r, n);
    const double b2 = ball_volume(2.0 * r, n);
    const double diam = 4.0 * r;

    CaccioppoliPair pair;
    for (std::size_t idx : d.cells_in_ball(Ball{x, r}, CellSet::Measure)) {
        pair.lhs += phi_of_gradient(d, problem.phi, solution.u.values(), idx) * vol;
    }
    pair.lhs /= b;

    double dev = 0.0;
    for (std::size_t idx : d.cells_in_ball(Ball{x, 2.0 * r}, CellSet::Inside)) {
        dev += problem.phi.evaluate(d.position(idx), std::abs(solution.u[idx] - f[idx]) / diam) * vol;
    }
    double grad_f = 0.0;
    for (std::size_t idx : d.cells_in_ball(Ball{x, 2.0 * r}, CellSet::Measure)) {
        grad_f += phi_of_gradient(d, problem.phi, f, idx) * vol;
    }
    pair.terms = {dev / b2, grad_f / b2};
    pair.rhs = (dev + grad_f) / b2;
    return pair;
}

CaccioppoliReport caccioppoli_sweep(const ObstacleProblem& problem, const Solution& solution,
                                    CaccioppoliVariant variant, std::vector<CaccioppoliBall> balls,
                                    const BoundaryCaccioppoliHypotheses& hypotheses, double max_spread) {
    const auto evaluate = [&](CaccioppoliBall ball) {
        switch (variant) {
            case CaccioppoliVariant::InteriorK: {
                if (std::isnan(ball.k)) {
                    const auto outer = problem.domain.cells_in_ball(Ball{ball.center, ball.R}, CellSet::Inside);
                    double mean = 0.0;
                    for (std::size_t idx : outer) mean += solution.u[idx];
                    mean /= static_cast<double>(std::max<std::size_t>(outer.size(), 1));
                    ball.k = std::max(sup_obstacle(problem, outer), mean);
                }
                ball.pair = caccioppoli_interior_k(problem, solution, ball.center, ball.R, ball.r, ball.k);
                break;
            }
            case CaccioppoliVariant::InteriorMean:
                ball.pair = caccioppoli_interior_mean(problem, solution, ball.center, ball.r);
                break;
            case CaccioppoliVariant::Boundary:
                ball.pair = caccioppoli_boundary(problem, solution, ball.center, ball.r, hypotheses);
                break;
        }
        return ball;
    };

    std::vector<std::future<CaccioppoliBall>> jobs;
    jobs.reserve(balls.size());
    for (const auto& ball : balls) jobs.push_back(std::async(std::launch::async, evaluate, ball));

    CaccioppoliReport report;
    report.variant = variant;
    std::map<double, double> by_radius;
    for (auto& job : jobs) {
        CaccioppoliBall ball = job.get();
        const double ratio = ball.pair.ratio();
        report.fitted_C = std::max(report.fitted_C, ratio);
        auto [it, inserted] = by_radius.emplace(ball.r, ratio);
        if (!inserted) it->second = std::max(it->second, ratio);
        report.balls.push_back(std::move(ball));
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (auto it = by_radius.rbegin(); it != by_radius.rend(); ++it) {
        report.per_radius.emplace_back(it->first, it->second);
        if (it->second > 0.0) {
            lo = std::min(lo, it->second);
            hi = std::max(hi, it->second);
        }
    }
    report.spread = hi > 0.0 ? hi / lo : 1.0;
    report.pass = std::isfinite(report.fitted_C) && report.spread <= max_spread;
    return report;
}

void write_csv(std::ostream& out, const CaccioppoliReport& report) {
    out << "variant,center_x,center_y,r,R,k,lhs,rhs,ratio\n" << std::setprecision(10);
    for (const auto& b : report.balls) {
        out << to_string(report.variant) << ',' << b.center[0] << ',' << b.center[1] << ',' << b.r << ',' << b.R << ','
            << b.k << ',' << b.pair.lhs << ',' << b.pair.rhs << ',' << b.pair.ratio() << '\n';
    }
}

GehringReport gehring_estimate(const std::vector<std::pair<ObstacleProblem, Solution>>& levels,
                               std::vector<double> eps_grid, double max_growth) {
    if (levels.size() < 2) throw ArgumentError("higher integrability needs at least two refinement levels");
    if (eps_grid.empty()) throw ArgumentError("empty epsilon grid");
    std::sort(eps_grid.begin(), eps_grid.end());
    if (!(eps_grid.front() > 0.0)) throw ArgumentError("epsilon values must be positive");

    GehringReport report;
    report.eps_grid = eps_grid;
    for (const auto& [problem, solution] : levels) {
        const Domain& d = problem.domain;
        const double vol = d.cell_volume();
        const auto& cells = d.measure_cells();
        std::vector<double> phi_u(cells.size()), phi_psi(cells.size(), 0.0), phi_f(cells.size());
        for (std::size_t k = 0; k < cells.size(); ++k) {
            phi_u[k] = phi_of_gradient(d, problem.phi, solution.u.values(), cells[k]);
            phi_f[k] = phi_of_gradient(d, problem.phi, problem.boundary.values(), cells[k]);
            if (problem.obstacle) phi_psi[k] = phi_of_gradient(d, problem.phi, problem.obstacle->values(), cells[k]);
        }
        GehringLevel level;
        level.h = d.h();
        for (double v : phi_u) level.energy += v * vol;
        const double measure = d.measure();
        for (double eps : eps_grid) {
            double iu = 0.0, ipsi = 0.0, iff = 0.0;
            for (std::size_t k = 0; k < cells.size(); ++k) {
                iu += std::pow(phi_u[k], 1.0 + eps);
                ipsi += std::pow(phi_psi[k], 1.0 + eps);
                iff += std::pow(phi_f[k], 1.0 + eps);
            }
            level.integrals.push_back(iu * vol);
            level.power_means.push_back(std::pow(iu * vol / measure, 1.0 / (1.0 + eps)));
            level.psi_terms.push_back(ipsi * vol);
            level.f_terms.push_back(iff * vol);
        }
        report.levels.push_back(std::move(level));
    }

    std::size_t star = eps_grid.size();
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        double worst = 0.0;
        for (std::size_t l = 1; l < report.levels.size(); ++l) {
            const double prev = report.levels[l - 1].integrals[e];
            const double next = report.levels[l].integrals[e];
            worst = std::max(worst, prev > 0.0 ? next / prev : (next > 0.0 ? std::numeric_limits<double>::infinity() : 1.0));
        }
        report.worst_growth.push_back(worst);
        if (worst <= max_growth && (e == 0 || star == e - 1)) star = e;
    }

    const GehringLevel& fine = report.levels.back();
    if (star < eps_grid.size()) {
        report.eps_star = eps_grid[star];
        report.lhs = fine.integrals[star];
        report.psi_term = fine.psi_terms[star];
        report.f_term = fine.f_terms[star];
    } else {
        report.eps_star = 0.0;
        report.lhs = fine.energy;
        report.psi_term = 0.0;
        report.f_term = 0.0;
    }
    report.energy_term = std::pow(fine.energy, 1.0 + report.eps_star);
    report.fitted_C = report.lhs / (report.energy_term + report.psi_term + report.f_term + 1.0);
    return report;
}

void write_csv(std::ostream& out, const GehringReport& report) {
    out << "level,h,eps,integral,power_mean,psi_term,f_term\n" << std::setprecision(10);
    for (std::size_t l = 0; l < report.levels.size(); ++l) {
        const auto& level = report.levels[l];
        for (std::size_t e = 0; e < report.eps_grid.size(); ++e) {
            out << l << ',' << level.h << ',' << report.eps_grid[e] << ',' << level.integrals[e] << ','
                << level.power_means[e] << ',' << level.psi_terms[e] << ',' << level.f_terms[e] << '\n';
        }
    }
}

BoundaryContinuityReport boundary_continuity_check(const ObstacleProblem& problem, const Solution& solution,
                                                   const std::function<double(const Point&)>& f, const Point& x0,
                                                   std::vector<double> radii, bool fatness_certified, double tol,
                                                   double slack) {
    const Domain& d = problem.domain;
    if (!on_boundary(d, x0)) throw ArgumentError("x0 is not on the boundary of the domain");
    if (radii.empty()) throw ArgumentError("no radii given");
    std::sort(radii.begin(), radii.end(), std::greater<>());

    BoundaryContinuityReport report;
    report.x0 = x0;
    report.f_x0 = f(x0);
    report.tol = tol;
    report.fatness_certified = fatness_certified;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t idx : d.cells(CellSet::Active)) {
        const double v = f(d.position(idx));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    report.osc_f = hi - lo;

    for (double r : radii) {
        double sup = 0.0, umin = std::numeric_limits<double>::infinity(), umax = -umin;
        for (std::size_t idx : d.cells_in_ball(Ball{x0, r}, CellSet::Inside)) {
            sup = std::max(sup, std::abs(solution.u[idx] - report.f_x0));
            umin = std::min(umin, solution.u[idx]);
            umax = std::max(umax, solution.u[idx]);
        }
        report.radii.push_back(r);
        report.sup_deviation.push_back(sup);
        report.oscillation.push_back(umax >= umin ? umax - umin : 0.0);
    }
    report.monotone = true;
    for (std::size_t k = 1; k < report.sup_deviation.size(); ++k) {
        if (report.sup_deviation[k] > (1.0 + slack) * report.sup_deviation[k - 1]) report.monotone = false;
    }
    report.small_at_finest = report.sup_deviation.back() <= tol * report.osc_f;
    if (report.monotone && report.small_at_finest) {
        report.verdict = Verdict::Pass;
    } else {
        report.verdict = fatness_certified ? Verdict::Fail : Verdict::NonConclusive;
    }
    return report;
}

void write_csv(std::ostream& out, const BoundaryContinuityReport& report) {
    out << "radius,sup_deviation,oscillation\n" << std::setprecision(10);
    for (std::size_t k = 0; k < report.radii.size(); ++k) {
        out << report.radii[k] << ',' << report.sup_deviation[k] << ',' << report.oscillation[k] << '\n';
    }
}

std::string summary(const CaccioppoliReport& report) {
    std::ostringstream s;
    s << "caccioppoli " << to_string(report.variant) << ": " << report.balls.size() << " balls, fitted C "
      << fmt(report.fitted_C) << ", spread across radii " << fmt(report.spread) << " -> "
      << (report.pass ? "pass" : "fail") << '\n';
    for (const auto& [r, c] : report.per_radius) s << "  r = " << fmt(r) << "  C_r = " << fmt(c) << '\n';
    return s.str();
}

std::string summary(const GehringReport& report) {
    std::ostringstream s;
    s << "higher integrability: " << report.levels.size() << " levels, eps* = " << fmt(report.eps_star)
      << ", fitted C = " << fmt(report.fitted_C) << '\n';
    for (std::size_t e = 0; e < report.eps_grid.size(); ++e) {
        s << "  eps = " << fmt(report.eps_grid[e]) << "  worst growth " << fmt(report.worst_growth[e]) << '\n';
    }
    return s.str();
}

std::string summary(const BoundaryContinuityReport& report) {
    std::ostringstream s;
    s << "boundary continuity at (" << fmt(report.x0[0]) << ", " << fmt(report.x0[1]) << "): "
      << to_string(report.verdict) << " (monotone " << (report.monotone ? "yes" : "no") << ", finest "
      << fmt(report.sup_deviation.empty() ? 0.0 : report.sup_deviation.back()) << " vs " << fmt(report.tol * report.osc_f)
      << ")\n";
    for (std::size_t k = 0; k < report.radii.size(); ++k) {
        s << "  r = " << fmt(report.radii[k]) << "  sup|u - f(x0)| = " << fmt(report.sup_deviation[k]) << '\n';
    }
    return s.str();
}

}  // namespace gorlicz
