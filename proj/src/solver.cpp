#include "gorlicz/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Sparse>

#include "gorlicz/conditions.hpp"

namespace gorlicz {

namespace {

constexpr double kNoObstacle = -std::numeric_limits<double>::infinity();

double oscillation(const ScalarField& f, const std::vector<std::size_t>& cells) {
    if (cells.empty()) return 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t idx : cells) {
        lo = std::min(lo, f[idx]);
        hi = std::max(hi, f[idx]);
    }
    return hi - lo;
}

// Neighbour values and per-cell phi entering the energy terms that depend on one
// unknown u_j: the cell j itself and the cells j - e_d whose forward difference
// along d reaches j.
struct Stencil {
    int n = 2;
    double fwd[2]{};    // u(j + e_d)
    double bwd[2]{};    // u(j - e_d)
    double cross[2]{};  // squared fixed gradient components of cell j - e_d
    const LocalPhi* own = nullptr;
    const LocalPhi* back[2]{};
    double lo = 0.0;  // the unconstrained local minimizer lies in [lo, hi]
    double hi = 0.0;
};

class Workspace {
public:
    Workspace(const ObstacleProblem& problem, double delta)
        : domain_(problem.domain), n_(problem.domain.dim()), h_(problem.domain.h()), delta2_(delta * delta) {
        stride_[0] = 1;
        stride_[1] = static_cast<std::size_t>(domain_.nx());
        phi_.resize(domain_.size());
        for (std::size_t idx : domain_.measure_cells()) phi_[idx] = problem.phi.at(domain_.position(idx));
        psi_.assign(domain_.size(), kNoObstacle);
        if (problem.obstacle) {
            for (std::size_t idx : domain_.interior_cells()) psi_[idx] = (*problem.obstacle)[idx];
        }
    }

    const Domain& domain() const { return domain_; }
    const LocalPhi& phi(std::size_t idx) const { return phi_[idx]; }
    double psi(std::size_t j) const { return psi_[j]; }

    Stencil gather(std::span<const double> u, std::size_t j) const {
        Stencil s;
        s.n = n_;
        s.own = &phi_[j];
        s.lo = std::numeric_limits<double>::infinity();
        s.hi = -s.lo;
        for (int d = 0; d < n_; ++d) {
            s.fwd[d] = u[j + stride_[d]];
            const std::size_t c = j - stride_[d];
            s.bwd[d] = u[c];
            s.back[d] = &phi_[c];
            double cross = 0.0;
            for (int e = 0; e < n_; ++e) {
                if (e == d) continue;
                const double g = (u[c + stride_[e]] - u[c]) / h_;
                cross += g * g;
            }
            s.cross[d] = cross;
            s.lo = std::min({s.lo, s.fwd[d], s.bwd[d]});
            s.hi = std::max({s.hi, s.fwd[d], s.bwd[d]});
        }
        return s;
    }

    double local_energy(const Stencil& s, double v) const {
        double own2 = delta2_;
        for (int d = 0; d < s.n; ++d) {
            const double g = (s.fwd[d] - v) / h_;
            own2 += g * g;
        }
        double e = s.own->value(std::sqrt(own2));
        for (int d = 0; d < s.n; ++d) {
            const double g = (v - s.bwd[d]) / h_;
            e += s.back[d]->value(std::sqrt(g * g + s.cross[d] + delta2_));
        }
        return e;
    }

    // First and second derivative of the local energy in v.
    void local_derivatives(const Stencil& s, double v, double& d1, double& d2) const {
        const double inv_h2 = 1.0 / (h_ * h_);
        double own2 = delta2_;
        double dot = 0.0;
        for (int d = 0; d < s.n; ++d) {
            const double diff = s.fwd[d] - v;
            own2 += diff * diff * inv_h2;
            dot += diff;
        }
        double norm = std::sqrt(own2);
        double dn = -dot * inv_h2 / norm;
        double ddn = (s.n * inv_h2 - dn * dn) / norm;
        double p1 = 0.0, p2 = 0.0;
        s.own->derivatives(norm, p1, p2);
        d1 = p1 * dn;
        d2 = p2 * dn * dn + p1 * ddn;
        for (int d = 0; d < s.n; ++d) {
            const double diff = v - s.bwd[d];
            norm = std::sqrt(diff * diff * inv_h2 + s.cross[d] + delta2_);
            dn = diff * inv_h2 / norm;
            ddn = (inv_h2 - dn * dn) / norm;
            s.back[d]->derivatives(norm, p1, p2);
            d1 += p1 * dn;
            d2 += p2 * dn * dn + p1 * ddn;
        }
    }

    double local_slope(const Stencil& s, double v) const {
        double d1 = 0.0, d2 = 0.0;
        local_derivatives(s, v, d1, d2);
        return d1;
    }

    // Minimizer of the local energy over [psi, inf): safeguarded Newton inside the
    // bracket [max(lo, psi), hi] on which the derivative changes sign.
    double local_minimizer(const Stencil& s, double psi, double start) const {
        if (psi >= s.hi) return psi;
        double a = std::max(s.lo, psi);
        double b = s.hi;
        if (b - a <= 0.0) return a;
        const double tiny = 1e-14 * (std::abs(a) + std::abs(b) + (b - a));
        // Without an active obstacle the minimizer is interior to the neighbour range.
        if (psi > s.lo && local_slope(s, a) >= 0.0) return a;
        double x = std::clamp(start, a, b);
        for (int it = 0; it < 100; ++it) {
            double d1 = 0.0, d2 = 0.0;
            local_derivatives(s, x, d1, d2);
            if (d1 == 0.0) return x;
            (d1 < 0.0 ? a : b) = x;
            double next = (d2 > 0.0 && std::isfinite(d2)) ? x - d1 / d2 : 0.5 * (a + b);
            if (std::abs(next - x) <= tiny) return std::clamp(next, a, b);
            if (!(next > a && next < b)) next = 0.5 * (a + b);
            if (b - a <= tiny) return next;
            x = next;
        }
        return x;
    }

private:
    const Domain& domain_;
    int n_;
    double h_;
    double delta2_;
    std::size_t stride_[2]{1, 1};
    std::vector<LocalPhi> phi_;
    std::vector<double> psi_;
};

double residual_sweep(const Workspace& ws, std::span<const double> u, std::vector<double>* per_cell) {
    double worst = 0.0;
    if (per_cell) per_cell->assign(u.size(), 0.0);
    for (std::size_t j : ws.domain().interior_cells()) {
        const Stencil s = ws.gather(u, j);
        const double r = std::abs(ws.local_minimizer(s, ws.psi(j), u[j]) - u[j]);
        if (per_cell) (*per_cell)[j] = r;
        worst = std::max(worst, r);
    }
    return worst;
}

double smoothed_energy(const Domain& domain, const PhiFunction& phi, std::span<const double> u, double delta) {
    const double d2 = delta * delta;
    double sum = 0.0;
    for (std::size_t idx : domain.measure_cells()) {
        const Vec2 g = gradient_at(domain, u, idx);
        const double mag = std::sqrt(g[0] * g[0] + g[1] * g[1] + d2);
        sum += phi.evaluate(domain.position(idx), mag);
    }
    return sum * domain.cell_volume();
}

struct RunResult {
    int iterations = 0;
    bool converged = false;
    double kkt = std::numeric_limits<double>::infinity();
};

RunResult run_gauss_seidel(const Workspace& ws, const ObstacleProblem& problem, std::vector<double>& u,
                           const SolveOptions& options, double tol, double delta, std::vector<double>* trace) {
    const Domain& d = problem.domain;
    const int extent = std::max(d.nx(), d.ny());
    const double omega =
        options.omega > 0.0 ? options.omega : 2.0 / (1.0 + std::sin(std::numbers::pi / std::max(extent, 2)));
    RunResult r;
    for (int iter = 1; iter <= options.max_iters; ++iter) {
        r.iterations = iter;
        double sweep_change = 0.0;
        for (std::size_t j : d.interior_cells()) {
            const Stencil s = ws.gather(u, j);
            const double old = u[j];
            const double best = ws.local_minimizer(s, ws.psi(j), old);
            sweep_change = std::max(sweep_change, std::abs(best - old));
            double next = best;
            if (omega != 1.0) {
                const double relaxed = std::max(ws.psi(j), old + omega * (best - old));
                if (ws.local_energy(s, relaxed) <= ws.local_energy(s, old)) next = relaxed;
            }
            u[j] = next;
        }
        if (trace) trace->push_back(smoothed_energy(d, problem.phi, u, delta));
        if (sweep_change <= tol || iter % 50 == 0 || iter == options.max_iters) {
            r.kkt = residual_sweep(ws, u, nullptr);
            if (r.kkt <= tol) {
                r.converged = true;
                break;
            }
        }
    }
    return r;
}

// Jacobi-scaled projected gradient with Armijo backtracking.
RunResult run_projected_gradient(const Workspace& ws, const ObstacleProblem& problem, std::vector<double>& u,
                                 const SolveOptions& options, double tol, double delta, std::vector<double>* trace) {
    const Domain& d = problem.domain;
    const auto& cells = d.interior_cells();
    std::vector<double> grad(cells.size());
    std::vector<double> curvature(cells.size());
    std::vector<double> trial = u;
    double current = smoothed_energy(d, problem.phi, u, delta);
    double alpha = 1.0;
    const double vol = d.cell_volume();
    RunResult r;
    for (int iter = 1; iter <= options.max_iters; ++iter) {
        r.iterations = iter;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const Stencil s = ws.gather(u, cells[k]);
            double d1 = 0.0, d2 = 0.0;
            ws.local_derivatives(s, u[cells[k]], d1, d2);
            grad[k] = d1;
            curvature[k] = std::isfinite(d2) && d2 > 0.0 ? d2 : 1.0 / (d.h() * d.h());
        }
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            double directional = 0.0;
            for (std::size_t k = 0; k < cells.size(); ++k) {
                const std::size_t j = cells[k];
                trial[j] = std::max(ws.psi(j), u[j] - alpha * grad[k] / curvature[k]);
                directional += grad[k] * (trial[j] - u[j]);
            }
            const double next = smoothed_energy(d, problem.phi, trial, delta);
            if (next <= current + 1e-4 * directional * vol) {
                u.swap(trial);
                trial = u;
                current = next;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (trace) trace->push_back(current);
        alpha = std::min(1.0, 2.0 * alpha);
        if (!accepted || iter % 10 == 0 || iter == options.max_iters) {
            r.kkt = residual_sweep(ws, u, nullptr);
            if (r.kkt <= tol) {
                r.converged = true;
                break;
            }
            if (!accepted) break;
        }
    }
    return r;
}

// Projected Newton: Newton steps on the free unknowns (sparse LDLT of the energy
// Hessian), scaled gradient steps on the nearly active ones, projection onto
// u >= psi and Armijo backtracking along the projected arc.
RunResult run_newton(const Workspace& ws, const ObstacleProblem& problem, std::vector<double>& u,
                     const SolveOptions& options, double tol, double delta, std::vector<double>* trace) {
    const Domain& d = problem.domain;
    const int n = d.dim();
    const double inv_h = 1.0 / d.h();
    const double delta2 = delta * delta;
    const double vol = d.cell_volume();
    const std::size_t stride[2] = {1, static_cast<std::size_t>(d.nx())};
    const auto& cells = d.interior_cells();
    const auto& measure = d.measure_cells();

    std::vector<double> grad(d.size(), 0.0);
    std::vector<double> diag(d.size(), 0.0);
    std::vector<double> hess(measure.size() * 3, 0.0);  // per cell: M00, M01, M11
    std::vector<int> slot(d.size(), -1);
    std::vector<double> step(d.size(), 0.0);
    std::vector<double> trial = u;
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    double current = smoothed_energy(d, problem.phi, u, delta);

    // Derivative of the cell gradient component d with respect to the node value:
    // -1/h at the cell itself, +1/h at its forward neighbour along d.
    const auto coefficient = [&](int node_slot, int component) {
        if (node_slot == 0) return -inv_h;
        return node_slot == component + 1 ? inv_h : 0.0;
    };

    RunResult r;
    for (int iter = 1; iter <= options.max_iters; ++iter) {
        r.iterations = iter;
        for (std::size_t j : cells) grad[j] = diag[j] = 0.0;
        for (std::size_t k = 0; k < measure.size(); ++k) {
            const std::size_t c = measure[k];
            std::size_t nodes[3] = {c, c + stride[0], c + stride[1]};
            double g[2] = {0.0, 0.0};
            double n2 = delta2;
            for (int a = 0; a < n; ++a) {
                g[a] = (u[nodes[a + 1]] - u[c]) * inv_h;
                n2 += g[a] * g[a];
            }
            const double norm = std::sqrt(n2);
            double p1 = 0.0, p2 = 0.0;
            ws.phi(c).derivatives(norm, p1, p2);
            const double ratio = p1 / norm;
            const double radial = (p2 - ratio) / n2;
            const double m00 = ratio + radial * g[0] * g[0];
            const double m01 = radial * g[0] * g[1];
            const double m11 = ratio + radial * g[1] * g[1];
            hess[3 * k] = m00;
            hess[3 * k + 1] = m01;
            hess[3 * k + 2] = m11;
            for (int a = 0; a <= n; ++a) {
                const std::size_t node = nodes[a];
                if (!d.inside(node)) continue;
                const double b0 = coefficient(a, 0);
                const double b1 = n == 2 ? coefficient(a, 1) : 0.0;
                grad[node] += ratio * (b0 * g[0] + b1 * g[1]);
                diag[node] += b0 * (m00 * b0 + m01 * b1) + b1 * (m01 * b0 + m11 * b1);
            }
        }

        // Nearly active set with the Bertsekas threshold.
        double width = 0.0;
        for (std::size_t j : cells) {
            const double scaled = diag[j] > 0.0 ? grad[j] / diag[j] : grad[j];
            width = std::max(width, std::abs(u[j] - std::max(ws.psi(j), u[j] - scaled)));
        }
        int free_count = 0;
        for (std::size_t j : cells) {
            const bool active = u[j] - ws.psi(j) <= width && grad[j] > 0.0;
            slot[j] = active ? -1 : free_count++;
        }

        if (free_count > 0) {
            triplets.clear();
            for (std::size_t k = 0; k < measure.size(); ++k) {
                const std::size_t c = measure[k];
                const std::size_t nodes[3] = {c, c + stride[0], c + stride[1]};
                const double m00 = hess[3 * k], m01 = hess[3 * k + 1], m11 = hess[3 * k + 2];
                for (int a = 0; a <= n; ++a) {
                    if (!d.inside(nodes[a]) || slot[nodes[a]] < 0) continue;
                    const double a0 = coefficient(a, 0);
                    const double a1 = n == 2 ? coefficient(a, 1) : 0.0;
                    for (int b = 0; b <= n; ++b) {
                        if (!d.inside(nodes[b]) || slot[nodes[b]] < 0) continue;
                        const double b0 = coefficient(b, 0);
                        const double b1 = n == 2 ? coefficient(b, 1) : 0.0;
                        const double value = a0 * (m00 * b0 + m01 * b1) + a1 * (m01 * b0 + m11 * b1);
                        if (value != 0.0) triplets.emplace_back(slot[nodes[a]], slot[nodes[b]], value);
                    }
                }
            }
            Eigen::SparseMatrix<double> H(free_count, free_count);
            H.setFromTriplets(triplets.begin(), triplets.end());
            Eigen::VectorXd rhs(free_count);
            for (std::size_t j : cells) {
                if (slot[j] >= 0) rhs[slot[j]] = -grad[j];
            }
            ldlt.compute(H);
            if (ldlt.info() != Eigen::Success) break;
            const Eigen::VectorXd x = ldlt.solve(rhs);
            if (!x.allFinite()) break;
            for (std::size_t j : cells) {
                if (slot[j] >= 0) step[j] = x[slot[j]];
            }
        }
        for (std::size_t j : cells) {
            if (slot[j] < 0) step[j] = diag[j] > 0.0 ? -grad[j] / diag[j] : -grad[j];
        }

        bool accepted = false;
        double alpha = 1.0;
        for (int halving = 0; halving < 40 && !accepted; ++halving, alpha *= 0.5) {
            double directional = 0.0;
            for (std::size_t j : cells) {
                trial[j] = std::max(ws.psi(j), u[j] + alpha * step[j]);
                directional += grad[j] * (trial[j] - u[j]);
            }
            const double next = smoothed_energy(d, problem.phi, trial, delta);
            // The second test admits steps whose energy change is lost in rounding.
            if (next <= current + 1e-4 * directional * vol ||
                (halving == 0 && next <= current + 1e-14 * std::abs(current))) {
                u.swap(trial);
                current = next;
                accepted = true;
            }
        }
        trial = u;
        if (trace && accepted) trace->push_back(current);
        r.kkt = residual_sweep(ws, u, nullptr);
        if (r.kkt <= tol) {
            r.converged = true;
            break;
        }
        if (!accepted || iter >= 200) break;
    }
    return r;
}

// Initial guess from a solve on the lattice of spacing 2h (recursively), for
// problems large enough that Gauss-Seidel would spend most sweeps on smooth error.
std::optional<std::vector<double>> coarse_start(const ObstacleProblem& problem, const SolveOptions& options);

}  // namespace

double data_scale(const ObstacleProblem& problem) {
    const Domain& d = problem.domain;
    double scale = oscillation(problem.boundary, d.cells(CellSet::Active));
    if (problem.obstacle) scale = std::max(scale, oscillation(*problem.obstacle, d.interior_cells()));
    return scale > 0.0 ? scale : 1.0;
}

double effective_smoothing(const ObstacleProblem& problem) {
    if (problem.smoothing > 0.0) return problem.smoothing;
    const double diam = std::max(problem.domain.diameter(), problem.domain.h());
    // A zero smoothing request still needs a floor so |grad u| = 0 is differentiable.
    const double base = 1e-8 * std::max(1.0, data_scale(problem) / diam);
    return problem.smoothing == 0.0 ? 1e-300 + 1e-14 * base : base;
}

void validate(const ObstacleProblem& problem) {
    const Domain& d = problem.domain;
    if (problem.boundary.size() != d.size()) throw ArgumentError("boundary field does not match the domain lattice");
    if (problem.obstacle && problem.obstacle->size() != d.size()) {
        throw ArgumentError("obstacle field does not match the domain lattice");
    }
    if (!problem.obstacle) return;
    const double slack = 1e-12 * data_scale(problem);
    for (std::size_t idx : d.halo_cells()) {
        const double excess = (*problem.obstacle)[idx] - problem.boundary[idx];
        if (excess > slack) {
            const Point x = d.position(idx);
            throw InfeasibleError("obstacle exceeds boundary datum by " + std::to_string(excess) +
                                      " at halo cell " + std::to_string(idx) + " (" + std::to_string(x[0]) +
                                      ", " + std::to_string(x[1]) + "): (psi - f)_+ does not vanish on the boundary",
                                  idx);
        }
    }
}

double energy(const Domain& domain, const PhiFunction& phi, const ScalarField& field, double smoothing) {
    return smoothed_energy(domain, phi, field.values(), smoothing);
}

double energy(const ObstacleProblem& problem, const ScalarField& field, double smoothing) {
    return energy(problem.domain, problem.phi, field, smoothing);
}

double stationarity_residual(const ObstacleProblem& problem, const ScalarField& field, std::vector<double>* per_cell) {
    const Workspace ws(problem, effective_smoothing(problem));
    return residual_sweep(ws, field.values(), per_cell);
}

Solution solve(const ObstacleProblem& problem, const SolveOptions& options) {
    validate(problem);
    const Domain& d = problem.domain;
    const double delta = effective_smoothing(problem);
    const double scale = data_scale(problem);
    const double tol = options.tol * scale;
    const Workspace ws(problem, delta);

    // Feasible start: max(psi, f) inside, f on the halo.
    std::vector<double> u(d.size(), 0.0);
    for (std::size_t idx : d.halo_cells()) u[idx] = problem.boundary[idx];
    std::optional<std::vector<double>> prolonged;
    if (options.multilevel && !options.initial_guess && !options.random_start &&
        d.interior_cells().size() >= 4096) {
        prolonged = coarse_start(problem, options);
    }
    for (std::size_t idx : d.interior_cells()) {
        double guess = problem.boundary[idx];
        if (options.initial_guess) guess = (*options.initial_guess)[idx];
        if (prolonged) guess = (*prolonged)[idx];
        u[idx] = std::max(ws.psi(idx), guess);
    }
    if (options.random_start) {
        std::mt19937_64 rng(options.seed);
        std::uniform_real_distribution<double> bump(0.0, 0.5 * scale);
        for (std::size_t idx : d.interior_cells()) u[idx] += bump(rng);
    }
    if (!std::isfinite(smoothed_energy(d, problem.phi, u, 0.0))) {
        throw InfeasibleError("the feasible start max(psi, f) has infinite energy", 0);
    }

    Solution sol;
    sol.smoothing = delta;
    std::vector<double>* trace = options.record_energy ? &sol.energy_trace : nullptr;
    RunResult run;
    switch (options.method) {
        case SolverMethod::Newton:
            run = run_newton(ws, problem, u, options, tol, delta, trace);
            if (!run.converged && run.iterations < options.max_iters) {
                SolveOptions rest = options;
                rest.max_iters = options.max_iters - run.iterations;
                const RunResult polish = run_gauss_seidel(ws, problem, u, rest, tol, delta, trace);
                run.iterations += polish.iterations;
                run.converged = polish.converged;
                run.kkt = polish.kkt;
            }
            break;
        case SolverMethod::GaussSeidel: run = run_gauss_seidel(ws, problem, u, options, tol, delta, trace); break;
        case SolverMethod::ProjectedGradient:
            run = run_projected_gradient(ws, problem, u, options, tol, delta, trace);
            break;
    }
    int iter = run.iterations;
    bool converged = run.converged;
    double kkt = run.kkt;
    if (!std::isfinite(kkt)) kkt = residual_sweep(ws, u, nullptr);

    sol.u = ScalarField(std::move(u));
    sol.energy = smoothed_energy(d, problem.phi, sol.u.values(), 0.0);
    sol.iterations = std::min(iter, options.max_iters);
    sol.converged = converged;
    sol.kkt_residual = kkt / scale;

    if (problem.obstacle) {
        const double osc_psi = oscillation(*problem.obstacle, d.interior_cells());
        sol.contact_tol = options.contact_tol >= 0.0 ? options.contact_tol : 1e-7 * (osc_psi > 0.0 ? osc_psi : scale);
        for (std::size_t idx : d.interior_cells()) {
            if (sol.u[idx] - (*problem.obstacle)[idx] <= sol.contact_tol) sol.contact_set.push_back(idx);
        }
    }
    return sol;
}

RestrictionReport local_min_restriction_check(const ObstacleProblem& problem, const ScalarField& u,
                                              const std::vector<std::size_t>& subdomain, double tol,
                                              const SolveOptions& options) {
    const Domain& d = problem.domain;
    std::vector<std::uint8_t> mask(d.size(), 0);
    for (std::size_t idx : subdomain) {
        if (!d.inside(idx)) throw ArgumentError("sub-domain cells must lie in Omega");
        mask[idx] = 1;
    }
    Domain sub = Domain::from_mask(d.dim(), d.dims(), d.h(), d.origin(), mask, d.name() + "/sub");
    ObstacleProblem restricted{sub, problem.phi, problem.obstacle, u, problem.smoothing};
    // Keep the parent's smoothing so the two solves are comparable.
    restricted.smoothing = effective_smoothing(problem);

    SolveOptions opts = options;
    opts.initial_guess = u;
    const Solution resolved = solve(restricted, opts);

    RestrictionReport rep;
    rep.energy_restricted = energy(sub, problem.phi, u);
    rep.energy_resolved = resolved.energy;
    rep.gap = rep.energy_restricted - rep.energy_resolved;
    rep.pass = rep.gap <= tol;
    return rep;
}

ComparisonHypotheses verify_comparison_hypotheses(const PhiFunction& phi, const Domain& domain) {
    ComparisonHypotheses h;
    h.a0 = check_A0(phi, domain, default_beta_grid()).holds;
    h.adec = check_aInc_aDec(phi, domain, phi.q_upper(), Monotonicity::Dec, geometric_grid(1e-4, 1e4, 161)).holds;
    const Box box = domain.bounding_box();
    const Point mid{0.5 * (box.lo[0] + box.hi[0]), 0.5 * (box.lo[1] + box.hi[1])};
    std::vector<Point> centers{mid};
    for (std::size_t k = 0; k < domain.interior_cells().size(); k += std::max<std::size_t>(1, domain.interior_cells().size() / 4)) {
        centers.push_back(domain.position(domain.interior_cells()[k]));
    }
    const double r_max = 0.25 * domain.diameter();
    int levels = 0;
    while (levels < 4 && r_max * std::ldexp(1.0, -levels) >= domain.h()) ++levels;
    if (levels >= 3) {
        h.a1 = check_A1(phi, domain, dyadic_ball_sampler(centers, r_max, levels), A1Mode::A1).holds;
    }
    return h;
}

ComparisonReport comparison_check(const ObstacleProblem& first, const ObstacleProblem& second, double tol,
                                  const ComparisonHypotheses& hypotheses, const SolveOptions& options) {
    const Domain& d = first.domain;
    if (d.dims() != second.domain.dims() || d.h() != second.domain.h() || d.dim() != second.domain.dim()) {
        throw ArgumentError("comparison needs both problems on the same lattice");
    }
    if (!first.phi.strictly_convex()) throw ArgumentError("comparison principle needs a strictly convex phi");
    if (!hypotheses.a0 || !hypotheses.a1 || !hypotheses.adec) {
        throw ArgumentError("comparison principle needs (A0), (A1) and (aDec) verified");
    }
    if (first.obstacle) {
        if (!second.obstacle) throw ArgumentError("psi1 <= psi2 fails: second problem has no obstacle");
        for (std::size_t idx : d.interior_cells()) {
            if ((*first.obstacle)[idx] > (*second.obstacle)[idx]) {
                throw ArgumentError("psi1 <= psi2 fails at cell " + std::to_string(idx));
            }
        }
    }
    const double slack = 1e-12 * std::max(data_scale(first), data_scale(second));
    for (std::size_t idx : d.halo_cells()) {
        if (first.boundary[idx] - second.boundary[idx] > slack) {
            throw ArgumentError("(f1 - f2)_+ does not vanish on the boundary at cell " + std::to_string(idx));
        }
    }

    ComparisonReport rep;
    rep.first = solve(first, options);
    rep.second = solve(second, options);
    rep.max_difference = -std::numeric_limits<double>::infinity();
    for (std::size_t idx : d.interior_cells()) {
        rep.max_difference = std::max(rep.max_difference, rep.first.u[idx] - rep.second.u[idx]);
    }
    rep.pass = rep.max_difference <= tol;
    return rep;
}

namespace {

std::optional<std::vector<double>> coarse_start(const ObstacleProblem& problem, const SolveOptions& options) {
    const Domain& d = problem.domain;
    const int n = d.dim();
    const std::array<int, 2> dims{(d.nx() + 1) / 2, n == 1 ? 1 : (d.ny() + 1) / 2};
    const auto fine = [&](int i, int j) { return d.index(2 * i, 2 * j); };
    const auto fine_active = [&](int i, int j) {
        return 2 * i < d.nx() && 2 * j < d.ny() && d.active(fine(i, j));
    };

    // Coarse inside nodes need their whole coarse neighbourhood on active fine
    // nodes so every coarse halo value is defined.
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(dims[0]) * dims[1], 0);
    std::size_t count = 0;
    for (int j = 0; j < dims[1]; ++j) {
        for (int i = 0; i < dims[0]; ++i) {
            if (!fine_active(i, j) || !d.inside(fine(i, j))) continue;
            bool ok = true;
            for (int dj = (n == 2 ? -1 : 0); dj <= (n == 2 ? 1 : 0) && ok; ++dj) {
                for (int di = -1; di <= 1 && ok; ++di) {
                    const int a = i + di, b = j + dj;
                    ok = a >= 0 && b >= 0 && a < dims[0] && b < dims[1] && fine_active(a, b);
                }
            }
            if (ok) {
                mask[static_cast<std::size_t>(j) * dims[0] + i] = 1;
                ++count;
            }
        }
    }
    if (count < 16) return std::nullopt;

    std::optional<Domain> coarse;
    try {
        coarse = Domain::from_mask(n, dims, 2.0 * d.h(), d.origin(), mask, d.name() + "/coarse");
    } catch (const GeometryError&) {
        return std::nullopt;
    }
    ScalarField boundary(coarse->size());
    std::optional<ScalarField> obstacle;
    if (problem.obstacle) obstacle = ScalarField(coarse->size(), kNoObstacle);
    for (std::size_t c : coarse->cells(CellSet::Active)) {
        const auto [i, j] = coarse->coords(c);
        const std::size_t f = fine(i, j);
        double value = problem.boundary[f];
        if (problem.obstacle && d.inside(f)) {
            value = std::max(value, (*problem.obstacle)[f]);
            if (coarse->inside(c)) (*obstacle)[c] = (*problem.obstacle)[f];
        }
        boundary[c] = value;
    }
    ObstacleProblem sub{*coarse, problem.phi, obstacle, boundary, effective_smoothing(problem)};
    SolveOptions opts;
    opts.tol = std::max(options.tol, 1e-7);
    opts.max_iters = options.max_iters;
    opts.omega = options.omega;
    const Solution cs = solve(sub, opts);

    // Bilinear prolongation wherever the surrounding coarse nodes are active.
    std::vector<double> guess(d.size(), 0.0);
    const auto coarse_value = [&](int i, int j, double& out) {
        if (i < 0 || j < 0 || i >= dims[0] || j >= dims[1]) return false;
        const std::size_t c = static_cast<std::size_t>(j) * dims[0] + i;
        if (!coarse->active(c)) return false;
        out = cs.u[c];
        return true;
    };
    for (std::size_t idx : d.interior_cells()) {
        const auto [fi, fj] = d.coords(idx);
        const int i0 = fi / 2, j0 = fj / 2;
        const int i1 = i0 + (fi % 2), j1 = j0 + (fj % 2);
        double sum = 0.0;
        bool ok = true;
        for (int jj : {j0, j1}) {
            for (int ii : {i0, i1}) {
                double v = 0.0;
                ok = ok && coarse_value(ii, jj, v);
                sum += v;
            }
        }
        guess[idx] = ok ? 0.25 * sum : problem.boundary[idx];
    }
    return guess;
}

}  // namespace

}  // namespace gorlicz
