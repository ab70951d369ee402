#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "gorlicz/grid.hpp"
#include "gorlicz/phi.hpp"
#include "gorlicz/solver.hpp"

namespace gorlicz {

/// Condenser (E, ambient): E is a set of inside cells of `ambient`.
struct CapacityInstance {
    Domain ambient;
    std::vector<std::size_t> E;
    PhiFunction phi;
};

struct CapacityResult {
    double value = 0.0;  // minimal discrete energy
    ScalarField field;   // extremal potential, in [0, 1]
    Solution stats;
};

/// Relative capacity: minimal energy over fields that vanish on the ambient halo
/// and equal 1 on E and its one-cell neighbourhood. Throws GeometryError when that
/// neighbourhood leaves the ambient interior and ArgumentError when E is empty.
CapacityResult compute_capacity(const CapacityInstance& instance, const SolveOptions& options = {});

struct CapacityBounds {
    double lower = 0.0;  // |B| phi^-_{2B}(1/r)
    double upper = 0.0;  // |B| phi^+_{2B}(1/r)
};

/// phi^-/phi^+ over 2B are taken over lattice points of spacing r / cells_per_radius.
CapacityBounds ball_capacity_bounds(const PhiFunction& phi, const Point& center, double r, int n,
                                    int cells_per_radius = 16);

/// C_phi(B(center, r), B(center, 2r)) on a lattice with r / cells_per_radius spacing.
CapacityResult ball_capacity(const PhiFunction& phi, const Point& center, double r, int n,
                             int cells_per_radius = 16, const SolveOptions& options = {});

struct BoundaryPointReport {
    Point x0{0.0, 0.0};
    std::vector<double> radii;  // radii actually evaluated
    std::vector<double> measure_density_ratios;
    std::vector<double> fatness_ratios;
    double c_star_measure = 0.0;
    double c_star_capacity = 0.0;
    std::vector<std::string> warnings;  // skipped radii
};

/// Measure density |B \ Omega| / |B| and capacity fatness
/// C(B \ Omega, 2B) / C(B, 2B) at each radius. Radii below 4h are skipped with a
/// warning. Throws ArgumentError if x0 is not on the rasterized boundary.
BoundaryPointReport classify_boundary_point(const Domain& domain, const PhiFunction& phi, const Point& x0,
                                            const std::vector<double>& radii, int cells_per_radius = 16);

void write_csv(std::ostream& out, const BoundaryPointReport& report);

}  // namespace gorlicz
