#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gorlicz/grid.hpp"
#include "gorlicz/solver.hpp"

namespace gorlicz {

enum class CaccioppoliVariant { InteriorK, InteriorMean, Boundary };

std::string to_string(CaccioppoliVariant v);

struct CaccioppoliPair {
    double lhs = 0.0;
    double rhs = 0.0;
    /// Individual right-hand terms, before summation.
    std::vector<double> terms;
    double ratio() const { return rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0); }
};

/// Level-set estimate on A(k, rho) = B(x, rho) n {u > k}. Requires B(x, R) inside
/// Omega and k >= sup psi on it (ArgumentError otherwise).
CaccioppoliPair caccioppoli_interior_k(const ObstacleProblem& problem, const Solution& solution, const Point& x,
                                       double R, double r, double k);

/// Averages over B = B(x, r) and 2B; requires 2B inside Omega and the Luxemburg
/// norm of grad psi on 2B below 1. Terms: oscillation, obstacle gradient, constant.
CaccioppoliPair caccioppoli_interior_mean(const ObstacleProblem& problem, const Solution& solution, const Point& x,
                                          double r);

struct BoundaryCaccioppoliHypotheses {
    /// dist(K, boundary) for a compact K with f >= psi off K; needs r < r0 / 4.
    std::optional<double> r0;
    /// With (A0) and (A1) verified, f is replaced by max(f, psi).
    bool a0_a1_verified = false;
};

/// Boundary estimate on B = B(x, r). Throws WrongVariantError when 2B lies inside
/// Omega, ArgumentError when neither hypothesis holds. Terms: |u - f| term, grad f term.
CaccioppoliPair caccioppoli_boundary(const ObstacleProblem& problem, const Solution& solution, const Point& x,
                                     double r, const BoundaryCaccioppoliHypotheses& hypotheses);

struct CaccioppoliBall {
    Point center{0.0, 0.0};
    double r = 0.0;
    double R = 0.0;  // outer radius (interior-k only)
    double k = 0.0;  // level (interior-k only)
    CaccioppoliPair pair;
};

struct CaccioppoliReport {
    CaccioppoliVariant variant = CaccioppoliVariant::InteriorK;
    std::vector<CaccioppoliBall> balls;
    double fitted_C = 0.0;  // max ratio over balls
    /// Per distinct radius r: max ratio. Spread is max/min over radii with a nonzero fit.
    std::vector<std::pair<double, double>> per_radius;
    double spread = 1.0;
    bool pass = false;  // fitted C finite and spread <= max_spread
};

/// Evaluates one variant on every ball concurrently and fits C. For interior-k a
/// ball's level defaults to max(sup psi, mean u) on B(x, R) when k is NaN.
CaccioppoliReport caccioppoli_sweep(const ObstacleProblem& problem, const Solution& solution,
                                    CaccioppoliVariant variant, std::vector<CaccioppoliBall> balls,
                                    const BoundaryCaccioppoliHypotheses& hypotheses = {}, double max_spread = 10.0);

void write_csv(std::ostream& out, const CaccioppoliReport& report);

struct GehringLevel {
    double h = 0.0;
    std::vector<double> integrals;    // int phi(x, |grad u|)^{1+eps} per eps
    std::vector<double> power_means;  // (avg phi^{1+eps})^{1/(1+eps)} per eps
    double energy = 0.0;              // int phi(x, |grad u|)
    std::vector<double> psi_terms;    // int phi(x, |grad psi|)^{1+eps}
    std::vector<double> f_terms;      // int phi(x, |grad f|)^{1+eps}
};

struct GehringReport {
    std::vector<double> eps_grid;
    std::vector<GehringLevel> levels;  // coarse to fine
    /// Largest eps such that it and every smaller grid value grow by at most
    /// `max_growth` per refinement; 0 when even the smallest one is unstable.
    double eps_star = 0.0;
    std::vector<double> worst_growth;  // per eps, max ratio between consecutive levels
    double lhs = 0.0;                  // finest-level integral at eps_star
    double energy_term = 0.0;
    double psi_term = 0.0;
    double f_term = 0.0;
    double fitted_C = 0.0;  // lhs / (energy_term + psi_term + f_term + 1)
};

/// One (problem, solution) per refinement level, coarse to fine. Throws
/// ArgumentError with fewer than two levels or an empty eps grid.
GehringReport gehring_estimate(const std::vector<std::pair<ObstacleProblem, Solution>>& levels,
                               std::vector<double> eps_grid, double max_growth = 1.2);

void write_csv(std::ostream& out, const GehringReport& report);

enum class Verdict { Pass, Fail, NonConclusive };

std::string to_string(Verdict v);

struct BoundaryContinuityReport {
    Point x0{0.0, 0.0};
    double f_x0 = 0.0;
    double osc_f = 0.0;
    double tol = 1e-3;
    std::vector<double> radii;          // decreasing
    std::vector<double> sup_deviation;  // sup over B n Omega of |u - f(x0)|
    std::vector<double> oscillation;    // osc of u over B n Omega
    bool monotone = false;
    bool small_at_finest = false;
    bool fatness_certified = false;
    Verdict verdict = Verdict::NonConclusive;
};

/// Decay of |u - f(x0)| towards a boundary point. Without a fatness certificate a
/// failed decay is non-conclusive rather than a failure. Throws ArgumentError if
/// x0 is not on the rasterized boundary.
BoundaryContinuityReport boundary_continuity_check(const ObstacleProblem& problem, const Solution& solution,
                                                   const std::function<double(const Point&)>& f, const Point& x0,
                                                   std::vector<double> radii, bool fatness_certified,
                                                   double tol = 1e-3, double slack = 0.1);

void write_csv(std::ostream& out, const BoundaryContinuityReport& report);

/// Human-readable summary blocks.
std::string summary(const CaccioppoliReport& report);
std::string summary(const GehringReport& report);
std::string summary(const BoundaryContinuityReport& report);

}  // namespace gorlicz
