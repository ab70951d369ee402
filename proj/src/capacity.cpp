#include "gorlicz/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace gorlicz {

namespace {

Shape ball_shape(const Point& center, double radius, int n) {
    if (n == 1) return Shape::interval(center[0] - radius, center[0] + radius);
    return Shape::disk(center, radius);
}

double ball_volume(double r, int n) {
    return n == 1 ? 2.0 * r : std::numbers::pi * r * r;
}

// Lattice points of spacing h inside the open ball.
std::vector<Point> ball_lattice(const Point& center, double r, double h, int n) {
    std::vector<Point> points;
    const int k = static_cast<int>(std::ceil(r / h));
    for (int j = (n == 2 ? -k : 0); j <= (n == 2 ? k : 0); ++j) {
        for (int i = -k; i <= k; ++i) {
            const Point x{center[0] + i * h, center[1] + j * h};
            if (distance(x, center) < r) points.push_back(x);
        }
    }
    return points;
}

struct RadiusResult {
    double density = 0.0;
    double fatness = 0.0;
};

RadiusResult classify_radius(const Domain& domain, const PhiFunction& phi, const Point& x0, double r,
                             int cells_per_radius) {
    const int n = domain.dim();
    const double h = r / cells_per_radius;
    Domain ambient = Domain::rasterize(ball_shape(x0, 2.0 * r, n), h);
    std::vector<std::size_t> ball;
    std::vector<std::size_t> outside;
    for (std::size_t idx : ambient.cells_in_ball(Ball{x0, r}, CellSet::Inside)) {
        ball.push_back(idx);
        if (!domain.contains(ambient.position(idx))) outside.push_back(idx);
    }
    RadiusResult res;
    res.density = ball.empty() ? 0.0 : static_cast<double>(outside.size()) / static_cast<double>(ball.size());
    if (outside.empty()) return res;
    const double full = compute_capacity(CapacityInstance{ambient, ball, phi}).value;
    const double part = compute_capacity(CapacityInstance{ambient, outside, phi}).value;
    res.fatness = full > 0.0 ? part / full : 0.0;
    return res;
}

}  // namespace

CapacityResult compute_capacity(const CapacityInstance& instance, const SolveOptions& options) {
    const Domain& d = instance.ambient;
    if (instance.E.empty()) throw ArgumentError("capacity of an empty set requested");

    ScalarField obstacle(d.size(), 0.0);
    for (std::size_t idx : instance.E) {
        if (idx >= d.size() || !d.inside(idx)) throw GeometryError("E must consist of inside cells of the ambient domain");
        const auto [i, j] = d.coords(idx);
        for (int dj = (d.dim() == 2 ? -1 : 0); dj <= (d.dim() == 2 ? 1 : 0); ++dj) {
            for (int di = -1; di <= 1; ++di) {
                const std::size_t nb = d.index(i + di, j + dj);
                if (!d.inside(nb)) {
                    const Point x = d.position(idx);
                    std::ostringstream msg;
                    msg << "E touches the ambient boundary near (" << x[0] << ", " << x[1] << ")";
                    throw GeometryError(msg.str());
                }
                obstacle[nb] = 1.0;
            }
        }
    }

    ObstacleProblem problem{d, instance.phi, obstacle, ScalarField(d.size(), 0.0)};
    CapacityResult res;
    res.stats = solve(problem, options);
    res.field = res.stats.u;
    res.value = res.stats.energy;
    return res;
}

CapacityBounds ball_capacity_bounds(const PhiFunction& phi, const Point& center, double r, int n,
                                    int cells_per_radius) {
    if (!(r > 0.0)) throw ArgumentError("ball radius must be positive");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const Point& x : ball_lattice(center, 2.0 * r, r / cells_per_radius, n)) {
        const double v = phi.evaluate(x, 1.0 / r);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double vol = ball_volume(r, n);
    return CapacityBounds{vol * lo, vol * hi};
}

CapacityResult ball_capacity(const PhiFunction& phi, const Point& center, double r, int n, int cells_per_radius,
                             const SolveOptions& options) {
    if (cells_per_radius < 4) throw ArgumentError("ball capacity needs at least 4 cells per radius");
    Domain ambient = Domain::rasterize(ball_shape(center, 2.0 * r, n), r / cells_per_radius);
    std::vector<std::size_t> ball = ambient.cells_in_ball(Ball{center, r}, CellSet::Inside);
    return compute_capacity(CapacityInstance{ambient, std::move(ball), phi}, options);
}

BoundaryPointReport classify_boundary_point(const Domain& domain, const PhiFunction& phi, const Point& x0,
                                            const std::vector<double>& radii, int cells_per_radius) {
    const double h = domain.h();
    if (!on_boundary(domain, x0)) {
        std::ostringstream msg;
        msg << "point (" << x0[0] << ", " << x0[1] << ") is not on the boundary of the domain";
        throw ArgumentError(msg.str());
    }

    BoundaryPointReport report;
    report.x0 = x0;
    std::vector<double> kept;
    for (double r : radii) {
        if (r < 4.0 * h) {
            std::ostringstream msg;
            msg << "radius " << r << " below 4h = " << 4.0 * h << " skipped";
            report.warnings.push_back(msg.str());
            continue;
        }
        kept.push_back(r);
    }

    std::vector<std::future<RadiusResult>> jobs;
    jobs.reserve(kept.size());
    for (double r : kept) {
        jobs.push_back(std::async(std::launch::async, classify_radius, std::cref(domain), std::cref(phi), x0, r,
                                  cells_per_radius));
    }
    report.c_star_measure = std::numeric_limits<double>::infinity();
    report.c_star_capacity = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const RadiusResult res = jobs[k].get();
        report.radii.push_back(kept[k]);
        report.measure_density_ratios.push_back(res.density);
        report.fatness_ratios.push_back(res.fatness);
        report.c_star_measure = std::min(report.c_star_measure, res.density);
        report.c_star_capacity = std::min(report.c_star_capacity, res.fatness);
    }
    if (report.radii.empty()) report.c_star_measure = report.c_star_capacity = 0.0;
    return report;
}

void write_csv(std::ostream& out, const BoundaryPointReport& report) {
    out << "radius,density_ratio,fatness_ratio\n";
    out << std::setprecision(10);
    for (std::size_t k = 0; k < report.radii.size(); ++k) {
        out << report.radii[k] << ',' << report.measure_density_ratios[k] << ',' << report.fatness_ratios[k] << '\n';
    }
}

}  // namespace gorlicz
