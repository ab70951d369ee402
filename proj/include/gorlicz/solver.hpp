#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gorlicz/grid.hpp"
#include "gorlicz/phi.hpp"

namespace gorlicz {

/// Minimize sum phi(x, |grad u|) h^n over u >= psi on Omega with u = f on the halo.
struct ObstacleProblem {
    Domain domain;
    PhiFunction phi;
    /// nullopt means no obstacle (psi = -infinity).
    std::optional<ScalarField> obstacle;
    /// Boundary datum f; its halo values are imposed, its interior values seed
    /// the feasible start max(psi, f).
    ScalarField boundary;
    /// Gradient smoothing delta in sqrt(|g|^2 + delta^2); negative selects the default.
    double smoothing = -1.0;
};

/// Oscillation scale of the data, used to make tolerances relative.
double data_scale(const ObstacleProblem& problem);

/// Smoothing actually used by the solver for this problem.
double effective_smoothing(const ObstacleProblem& problem);

/// Throws InfeasibleError (naming the offending halo cell) when (psi - f)_+ does
/// not vanish on the halo, and ArgumentError on mismatched field sizes.
void validate(const ObstacleProblem& problem);

/// Newton: projected Newton with a Gauss-Seidel polish if it stalls.
/// GaussSeidel: projected nonlinear SOR. ProjectedGradient: Jacobi-scaled
/// projected gradient with Armijo backtracking.
enum class SolverMethod { Newton, GaussSeidel, ProjectedGradient };

struct SolveOptions {
    int max_iters = 50000;
    /// Fixed-point residual of the projected coordinate-minimization map,
    /// relative to data_scale().
    double tol = 1e-10;
    std::uint64_t seed = 0;
    bool random_start = false;
    SolverMethod method = SolverMethod::Newton;
    /// Over-relaxation for Gauss-Seidel sweeps; <= 0 picks 2 / (1 + sin(pi / N)).
    double omega = -1.0;
    /// Contact tolerance; negative selects 1e-7 * osc(psi).
    double contact_tol = -1.0;
    bool record_energy = false;
    /// Start large problems from a prolonged solve on the 2h lattice. Ignored with
    /// random_start or an explicit initial_guess.
    bool multilevel = true;
    std::optional<ScalarField> initial_guess;
};

struct Solution {
    ScalarField u;
    double energy = 0.0;  // unsmoothed discrete energy
    std::vector<std::size_t> contact_set;
    int iterations = 0;
    bool converged = false;
    double kkt_residual = 0.0;
    double smoothing = 0.0;
    double contact_tol = 0.0;
    std::vector<double> energy_trace;  // smoothed energy after each iteration, if recorded
};

Solution solve(const ObstacleProblem& problem, const SolveOptions& options = {});

/// Discrete energy sum over measure cells of phi(x, sqrt(|grad u|^2 + delta^2)) h^n.
double energy(const Domain& domain, const PhiFunction& phi, const ScalarField& field, double smoothing = 0.0);
double energy(const ObstacleProblem& problem, const ScalarField& field, double smoothing = 0.0);

/// Fixed-point residual of the projected coordinate minimization at `field`
/// (absolute, in the units of u), and the per-cell residuals.
double stationarity_residual(const ObstacleProblem& problem, const ScalarField& field,
                             std::vector<double>* per_cell = nullptr);

struct RestrictionReport {
    bool pass = false;
    double gap = 0.0;  // energy_D(u) - energy_D(re-solved)
    double energy_restricted = 0.0;
    double energy_resolved = 0.0;
};

/// Re-solves on the sub-domain D (a set of Omega cells) with boundary datum u and
/// obstacle psi restricted to D, and compares energies over D.
RestrictionReport local_min_restriction_check(const ObstacleProblem& problem, const ScalarField& u,
                                              const std::vector<std::size_t>& subdomain, double tol = 1e-6,
                                              const SolveOptions& options = {});

struct ComparisonHypotheses {
    bool a0 = false;
    bool a1 = false;
    bool adec = false;
};

/// Runs the (A0), (A1) and (aDec)_q checkers with default sampling on the domain.
ComparisonHypotheses verify_comparison_hypotheses(const PhiFunction& phi, const Domain& domain);

struct ComparisonReport {
    double max_difference = 0.0;  // max over Omega of u1 - u2
    bool pass = false;
    Solution first;
    Solution second;
};

/// Solves both problems and checks u1 <= u2 + tol. Throws ArgumentError when the
/// hypotheses of the comparison principle are not met.
ComparisonReport comparison_check(const ObstacleProblem& first, const ObstacleProblem& second, double tol,
                                  const ComparisonHypotheses& hypotheses, const SolveOptions& options = {});

}  // namespace gorlicz
