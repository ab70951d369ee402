#pragma once

// Independent reference solutions and instance generators shared by the unit and
// acceptance tests. Nothing here calls the library solver.

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "gorlicz/solver.hpp"

namespace gorlicz::testing {

/// Least concave majorant of max(psi, f) on a 1-D lattice with the halo values of
/// f fixed: the discrete obstacle minimizer for any x-independent strictly convex phi.
inline std::vector<double> concave_hull_1d(const ObstacleProblem& p) {
    const Domain& d = p.domain;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!d.active(i)) continue;
        double v = p.boundary[i];
        if (d.inside(i) && p.obstacle) v = std::max(v, (*p.obstacle)[i]);
        if (d.inside(i) && !p.obstacle) continue;
        pts.emplace_back(d.position(i)[0], v);
    }
    std::vector<std::pair<double, double>> hull;
    for (const auto& q : pts) {
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull.back();
            const double cross = (b.first - a.first) * (q.second - a.second) - (b.second - a.second) * (q.first - a.first);
            if (cross >= 0.0) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(q);
    }
    std::vector<double> u(d.size(), 0.0);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!d.active(i)) continue;
        const double x = d.position(i)[0];
        while (seg + 2 < hull.size() && hull[seg + 1].first < x) ++seg;
        const auto& a = hull[seg];
        const auto& b = hull[seg + 1];
        u[i] = a.second + (b.second - a.second) * (x - a.first) / (b.first - a.first);
        if (!d.inside(i)) u[i] = p.boundary[i];
    }
    return u;
}

/// Exact discrete minimizer for phi(t) = t^2 by a primal-dual active set iteration
/// on the linear complementarity problem A u >= b, u >= psi, complementarity.
inline std::vector<double> lcp_power2(const ObstacleProblem& p) {
    const Domain& d = p.domain;
    const int n = d.dim();
    const double w = std::pow(d.h(), n - 2);
    const std::size_t stride[2] = {1, static_cast<std::size_t>(d.nx())};
    std::vector<int> slot(d.size(), -1);
    int m = 0;
    for (std::size_t j : d.interior_cells()) slot[j] = m++;

    std::vector<double> fixed(d.size(), 0.0);
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (d.active(j) && !d.inside(j)) fixed[j] = p.boundary[j];
    }
    // Edges of the forward-difference energy: each measure cell contributes
    // w (u[c + e_a] - u[c])^2 per axis.
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t c : d.measure_cells()) {
        for (int a = 0; a < n; ++a) edges.emplace_back(c, c + stride[a]);
    }
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (const auto& [i, j] : edges) {
        const int si = slot[i], sj = slot[j];
        if (si >= 0) trip.emplace_back(si, si, 2 * w);
        if (sj >= 0) trip.emplace_back(sj, sj, 2 * w);
        if (si >= 0 && sj >= 0) {
            trip.emplace_back(si, sj, -2 * w);
            trip.emplace_back(sj, si, -2 * w);
        }
        if (si >= 0 && sj < 0) b[si] += 2 * w * fixed[j];
        if (sj >= 0 && si < 0) b[sj] += 2 * w * fixed[i];
    }
    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(trip.begin(), trip.end());

    Eigen::VectorXd psi = Eigen::VectorXd::Constant(m, -1e300);
    if (p.obstacle) {
        for (std::size_t j : d.interior_cells()) psi[slot[j]] = (*p.obstacle)[j];
    }
    std::vector<char> active(m, 0);
    for (int k = 0; k < m; ++k) active[k] = psi[k] > -1e299 ? 1 : 0;
    Eigen::VectorXd u(m);
    for (int it = 0; it < 10 * m + 10; ++it) {
        std::vector<int> fidx(m, -1);
        int nf = 0;
        for (int k = 0; k < m; ++k) {
            if (!active[k]) fidx[k] = nf++;
        }
        for (int k = 0; k < m; ++k) u[k] = active[k] ? psi[k] : 0.0;
        if (nf > 0) {
            std::vector<Eigen::Triplet<double>> ft;
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
            for (int k = 0; k < m; ++k) {
                if (fidx[k] >= 0) rhs[fidx[k]] = b[k];
            }
            for (int col = 0; col < A.outerSize(); ++col) {
                for (Eigen::SparseMatrix<double>::InnerIterator itr(A, col); itr; ++itr) {
                    const int r = static_cast<int>(itr.row()), c = static_cast<int>(itr.col());
                    if (fidx[r] < 0) continue;
                    if (fidx[c] >= 0) {
                        ft.emplace_back(fidx[r], fidx[c], itr.value());
                    } else {
                        rhs[fidx[r]] -= itr.value() * psi[c];
                    }
                }
            }
            Eigen::SparseMatrix<double> Aff(nf, nf);
            Aff.setFromTriplets(ft.begin(), ft.end());
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Aff);
            const Eigen::VectorXd uf = solver.solve(rhs);
            for (int k = 0; k < m; ++k) {
                if (fidx[k] >= 0) u[k] = uf[fidx[k]];
            }
        }
        const Eigen::VectorXd lambda = A * u - b;
        bool changed = false;
        for (int k = 0; k < m; ++k) {
            const double lam = active[k] ? lambda[k] : 0.0;
            const char next = psi[k] > -1e299 && lam + (psi[k] - u[k]) > 0.0 ? 1 : 0;
            if (next != active[k]) changed = true;
            active[k] = next;
        }
        if (!changed) break;
    }
    std::vector<double> out = fixed;
    for (std::size_t j : d.interior_cells()) out[j] = u[slot[j]];
    return out;
}

/// A pair of obstacle problems with psi1 <= psi2 and f1 <= f2, both feasible, on
/// the unit square. Data are smooth random combinations drawn from `seed`.
inline std::pair<ObstacleProblem, ObstacleProblem> comparison_pair(const PhiFunction& phi, std::uint64_t seed,
                                                                     double h = 1.0 / 16) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    const Domain d = Domain::rasterize(Shape::rectangle({0, 0}, {1, 1}), h);
    const double a = u(rng), bx = u(rng), by = u(rng), c = u(rng);
    const double lift = 0.5 * pos(rng), tilt = 0.3 * pos(rng);
    const double cx1 = 0.3 + 0.4 * pos(rng), cy1 = 0.3 + 0.4 * pos(rng), hgt1 = 0.5 + pos(rng);
    const double cx2 = 0.3 + 0.4 * pos(rng), cy2 = 0.3 + 0.4 * pos(rng), hgt2 = 0.5 + pos(rng);
    auto f1 = [=](const Point& x) { return a + bx * x[0] + by * x[1] + c * std::sin(3 * x[0] * x[1]); };
    auto f2 = [=](const Point& x) { return f1(x) + lift + tilt * x[0] * x[0]; };
    auto bump = [](double cx, double cy, double height) {
        return [=](const Point& x) { return height - 6.0 * ((x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy)); };
    };
    const auto b1 = bump(cx1, cy1, hgt1 + a);
    const auto b2 = bump(cx2, cy2, hgt2 + a);
    auto psi1 = [=](const Point& x) { return std::min(b1(x), f1(x)); };
    auto psi2 = [=](const Point& x) { return std::max(psi1(x), std::min(b2(x), f2(x))); };
    ObstacleProblem p1{d, phi, ScalarField::sample(d, psi1), ScalarField::sample(d, f1)};
    ObstacleProblem p2{d, phi, ScalarField::sample(d, psi2), ScalarField::sample(d, f2)};
    return {p1, p2};
}

inline double max_abs_diff(const Domain& d, const ScalarField& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t j : d.interior_cells()) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

}  // namespace gorlicz::testing
