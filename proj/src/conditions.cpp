#include "gorlicz/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace gorlicz {

std::string to_string(Condition c) {
    switch (c) {
        case Condition::A0: return "A0";
        case Condition::A1: return "A1";
        case Condition::A1n: return "A1n";
        case Condition::aIncP: return "aInc";
        case Condition::aDecQ: return "aDec";
    }
    return "unknown";
}

std::vector<double> default_beta_grid() {
    std::vector<double> grid;
    for (int k = 10; k >= 1; --k) grid.push_back(1.0 - std::ldexp(1.0, -k));
    for (int k = 2; k <= 10; ++k) grid.push_back(std::ldexp(1.0, -k));
    return grid;
}

std::vector<double> geometric_grid(double t_min, double t_max, int count) {
    if (!(t_min > 0.0) || !(t_max >= t_min) || count < 1) throw ArgumentError("invalid geometric grid");
    if (count == 1 || t_max == t_min) return {t_min};
    std::vector<double> out(static_cast<std::size_t>(count));
    const double step = std::log(t_max / t_min) / (count - 1);
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = t_min * std::exp(step * i);
    out.back() = t_max;
    return out;
}

std::vector<Point> sample_points(const Domain& domain, std::size_t max_points) {
    const auto& cells = domain.interior_cells();
    const std::size_t stride = std::max<std::size_t>(1, (cells.size() + max_points - 1) / max_points);
    std::vector<Point> pts;
    for (std::size_t k = 0; k < cells.size(); k += stride) pts.push_back(domain.position(cells[k]));
    return pts;
}

ConditionReport check_A0(const PhiFunction& phi, const Domain& domain, const std::vector<double>& beta_grid) {
    if (beta_grid.empty()) throw ArgumentError("beta grid for (A0) is empty");
    for (double b : beta_grid) {
        if (!(b > 0.0 && b < 1.0)) throw ArgumentError("beta grid values must lie in (0, 1)");
    }
    std::vector<double> betas = beta_grid;
    std::sort(betas.begin(), betas.end(), std::greater<>());

    const auto pts = sample_points(domain);
    ConditionReport rep;
    rep.condition = Condition::A0;

    struct Extremes {
        double sup = 0.0;
        Point sup_at{};
        double inf = std::numeric_limits<double>::infinity();
        Point inf_at{};
    };
    auto extremes = [&](double beta) {
        Extremes e;
        for (const Point& x : pts) {
            const LocalPhi local = phi.at(x);
            const double lo = local.value(beta);
            const double hi = local.value(1.0 / beta);
            if (lo > e.sup) {
                e.sup = lo;
                e.sup_at = x;
            }
            if (hi < e.inf) {
                e.inf = hi;
                e.inf_at = x;
            }
        }
        return e;
    };

    for (double beta : betas) {
        const Extremes e = extremes(beta);
        if (e.sup <= 1.0 && 1.0 <= e.inf) {
            rep.holds = true;
            rep.witness_beta_or_L = beta;
            return rep;
        }
    }
    // Both sides are monotone in beta, so the smallest beta is the most lenient;
    // report its violation.
    const double beta = betas.back();
    const Extremes e = extremes(beta);
    rep.holds = false;
    rep.witness_beta_or_L = beta;
    ConditionSample v;
    if (e.sup > 1.0) {
        v.x = e.sup_at;
        v.t = beta;
        v.lhs = e.sup;
        v.rhs = 1.0;
        rep.note = "phi(x, beta) > 1";
    } else {
        v.x = e.inf_at;
        v.t = 1.0 / beta;
        v.lhs = 1.0;
        v.rhs = e.inf;
        rep.note = "phi(x, 1/beta) < 1";
    }
    v.beta = beta;
    rep.violating_sample = v;
    return rep;
}

ConditionReport check_aInc_aDec(const PhiFunction& phi, const Domain& domain, double exponent, Monotonicity mode,
                                const std::vector<double>& t_grid) {
    if (t_grid.size() < 2) throw ArgumentError("t grid needs at least two points");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
            throw ArgumentError("t grid must be positive and increasing");
        }
    }
    if (t_grid.back() / t_grid.front() < 1e6 * (1.0 - 1e-12)) {
        throw ArgumentError("t grid must span at least six decades");
    }
    if (mode == Monotonicity::Inc && !(exponent > 1.0)) throw ArgumentError("(aInc) exponent must exceed 1");

    ConditionReport rep;
    rep.condition = mode == Monotonicity::Inc ? Condition::aIncP : Condition::aDecQ;
    rep.exponent = exponent;

    const std::size_t m = t_grid.size();
    std::vector<double> log_t(m);
    for (std::size_t k = 0; k < m; ++k) log_t[k] = std::log(t_grid[k]);

    double worst_log = 0.0;  // log of the smallest admissible L
    ConditionSample worst;
    std::vector<double> lg(m);
    for (const Point& x : sample_points(domain)) {
        const LocalPhi local = phi.at(x);
        for (std::size_t k = 0; k < m; ++k) lg[k] = std::log(local.value(t_grid[k])) - exponent * log_t[k];
        // Inc: L >= g(s)/g(t) for s <= t, i.e. running max over running value.
        // Dec: L >= g(t)/g(s) for s <= t, i.e. running value over running min.
        double best = lg[0];
        std::size_t best_at = 0;
        for (std::size_t k = 1; k < m; ++k) {
            const bool inc = mode == Monotonicity::Inc;
            const double gap = inc ? best - lg[k] : lg[k] - best;
            if (gap > worst_log || std::isnan(gap)) {
                worst_log = std::isnan(gap) ? std::numeric_limits<double>::infinity() : gap;
                worst.x = x;
                worst.s = t_grid[best_at];
                worst.t = t_grid[k];
            }
            if (inc ? lg[k] > best : lg[k] < best) {
                best = lg[k];
                best_at = k;
            }
        }
    }
    rep.witness_beta_or_L = std::exp(worst_log);
    rep.holds = rep.witness_beta_or_L <= phi.L() * (1.0 + 1e-9);
    if (!rep.holds) {
        const LocalPhi local = phi.at(worst.x);
        const double gs = local.value(*worst.s) / std::pow(*worst.s, exponent);
        const double gt = local.value(worst.t) / std::pow(worst.t, exponent);
        if (mode == Monotonicity::Inc) {
            worst.lhs = gs;
            worst.rhs = phi.L() * gt;
        } else {
            worst.lhs = gt;
            worst.rhs = phi.L() * gs;
        }
        rep.violating_sample = worst;
    }
    return rep;
}

BallSampler dyadic_ball_sampler(std::vector<Point> centers, double r_max, int levels) {
    return [centers = std::move(centers), r_max, levels]() {
        std::vector<Ball> balls;
        for (int k = 0; k < levels; ++k) {
            for (const Point& c : centers) balls.push_back({c, r_max * std::ldexp(1.0, -k)});
        }
        return balls;
    };
}

double BallEnvelope::sup(double t) const {
    double v = 0.0;
    for (const auto& l : local) v = std::max(v, l.value(t));
    return v;
}

double BallEnvelope::inf(double t) const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& l : local) v = std::min(v, l.value(t));
    return v;
}

BallEnvelope ball_envelope(const PhiFunction& phi, const Domain& domain, const Ball& ball, std::size_t max_points) {
    BallEnvelope env;
    const auto cells = domain.cells_in_ball(ball, CellSet::Inside);
    const std::size_t stride = std::max<std::size_t>(1, (cells.size() + max_points - 1) / std::max<std::size_t>(1, max_points));
    for (std::size_t k = 0; k < cells.size(); k += stride) {
        const Point x = domain.position(cells[k]);
        env.points.push_back(x);
        env.local.push_back(phi.at(x));
    }
    return env;
}

namespace {

double ball_measure(int n, double r) {
    return n == 2 ? std::numbers::pi * r * r : 2.0 * r;
}

}  // namespace

ConditionReport check_A1(const PhiFunction& phi, const Domain& domain, const BallSampler& sampler, A1Mode mode,
                         const A1Options& options) {
    ConditionReport rep;
    rep.condition = mode == A1Mode::A1 ? Condition::A1 : Condition::A1n;

    struct BallResult {
        Ball ball;
        double beta;
        std::vector<double> t;
        std::vector<double> inf;
    };
    std::map<double, std::vector<BallResult>, std::greater<>> by_radius;

    for (const Ball& ball : sampler()) {
        if (ball.radius < domain.h()) {
            ++rep.skipped;
            continue;
        }
        BallEnvelope env = ball_envelope(phi, domain, ball, options.max_points_per_ball);
        if (env.local.empty()) {
            ++rep.skipped;
            continue;
        }
        double t_top = 0.0;
        if (mode == A1Mode::A1) {
            const double level = 1.0 / ball_measure(domain.dim(), ball.radius);
            for (const Point& x : env.points) t_top = std::max(t_top, phi.left_inverse(x, level));
        } else {
            t_top = 1.0 / (2.0 * ball.radius);
        }
        BallResult res{ball, 1.0, {}, {}};
        if (t_top >= 1.0) {
            res.t = geometric_grid(1.0, t_top, t_top > 1.0 ? options.t_samples : 1);
            for (double t : res.t) res.inf.push_back(env.inf(t));
            auto works = [&](double beta) {
                for (std::size_t k = 0; k < res.t.size(); ++k) {
                    if (env.sup(beta * res.t[k]) > res.inf[k]) return false;
                }
                return true;
            };
            double lo = 0.0;
            double hi = 1.0;
            while (hi - lo > options.beta_resolution) {
                const double mid = 0.5 * (lo + hi);
                (works(mid) ? lo : hi) = mid;
            }
            res.beta = lo;
        } else {
            res.beta = 1.0 - options.beta_resolution;  // empty t-range: no constraint from this ball
        }
        by_radius[ball.radius].push_back(std::move(res));
    }

    if (by_radius.size() < 3) throw ArgumentError("(A1) check needs balls at three or more dyadic radii");

    double beta_min = 1.0;
    std::vector<std::pair<double, double>> constrained;  // radii where some ball had a non-empty t-range
    for (const auto& [r, results] : by_radius) {
        double level_beta = 1.0;
        bool any = false;
        for (const auto& res : results) {
            level_beta = std::min(level_beta, res.beta);
            any = any || !res.t.empty();
        }
        rep.scale_profile.emplace_back(r, level_beta);
        if (any) constrained.emplace_back(r, level_beta);
        beta_min = std::min(beta_min, level_beta);
    }

    // Least-squares slope of log beta against log r over the constrained radii.
    double slope = 0.0;
    if (beta_min > 0.0 && constrained.size() >= 2) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        const double m = static_cast<double>(constrained.size());
        for (const auto& [r, b] : constrained) {
            const double lx = std::log(r);
            const double ly = std::log(b);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    rep.beta_decay_slope = slope;
    rep.witness_beta_or_L = beta_min;
    rep.holds = beta_min >= options.beta_resolution && slope <= options.max_decay_slope;
    if (rep.holds) return rep;

    // Witness: at the finest radius, the ball and t where the beta that works on
    // the coarsest balls breaks down.
    const double beta_ref = rep.scale_profile.front().second;
    rep.note = beta_min < options.beta_resolution ? "no beta above resolution works"
                                                  : "working beta degenerates as the radius shrinks";
    const auto& finest = by_radius.rbegin()->second;
    const BallResult* worst = &finest.front();
    for (const auto& res : finest) {
        if (res.beta < worst->beta) worst = &res;
    }
    BallEnvelope env = ball_envelope(phi, domain, worst->ball, options.max_points_per_ball);
    ConditionSample v;
    v.x = worst->ball.center;
    v.radius = worst->ball.radius;
    v.beta = beta_ref;
    for (std::size_t k = 0; k < worst->t.size(); ++k) {
        const double lhs = env.sup(beta_ref * worst->t[k]);
        if (lhs > worst->inf[k]) {
            v.t = worst->t[k];
            v.lhs = lhs;
            v.rhs = worst->inf[k];
            break;
        }
    }
    rep.violating_sample = v;
    return rep;
}

}  // namespace gorlicz
