#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gorlicz/common.hpp"
#include "gorlicz/phi.hpp"

namespace gorlicz {

/// An open set given by a membership predicate and a bounding box.
///
/// `contains(x, eps)` must return true only for points at least (roughly) eps
/// inside the set; rasterization passes eps = 1e-9 h so lattice nodes that sit on
/// the boundary are classified as outside.
struct Shape {
    int n = 2;
    std::string name;
    Box bbox;
    std::function<bool(const Point&, double)> contains;

    static Shape interval(double a, double b);
    static Shape rectangle(Point lo, Point hi);
    static Shape disk(Point center, double radius);
    /// [-a, a]^2 with the quadrant [0, a] x [-a, 0] removed; re-entrant corner at the origin.
    static Shape l_shape(double a = 1.0);
    /// Disk with the slit {y = c_y, x >= c_x} removed.
    static Shape slit_disk(Point center, double radius);
    /// [-a, a]^2 minus the horn {x >= 0, |y| <= k x^power}; the horn tip sits at the origin.
    static Shape cusp_square(double a = 1.0, double k = 0.5, double power = 2.0);
};

enum class CellKind : std::uint8_t { Outside = 0, Inside = 1, Halo = 2 };

/// Which lattice cells a query ranges over.
enum class CellSet {
    Inside,   // nodes of Omega (the unknowns)
    Active,   // Omega plus its halo
    Measure,  // cells integrated over: every cell whose forward square has a corner in Omega
    All,
};

struct BoundaryCell {
    std::size_t index;
    Point outward;  // unit vector pointing out of Omega
};

struct Ball {
    Point center{0.0, 0.0};
    double radius = 0.0;
};

/// Uniform lattice of spacing h with an inside mask.
///
/// Values live on lattice nodes. Omega is the set of nodes strictly inside the
/// shape; the halo is every outside node within one step (including diagonals),
/// which is where boundary data are prescribed. A cell's gradient uses forward
/// differences to its +e_d neighbours, and integrals run over the measure cells:
/// for the unit square this is exactly 1/h^2 cells, so |Omega| is reproduced
/// exactly and affine fields are discrete minimizers for every phi.
class Domain {
public:
    static Domain rasterize(const Shape& shape, double h);
    static Domain from_mask(int n, std::array<int, 2> dims, double h, Point origin,
                            const std::vector<std::uint8_t>& inside, std::string name = "mask");

    int dim() const { return n_; }
    double h() const { return h_; }
    int nx() const { return dims_[0]; }
    int ny() const { return dims_[1]; }
    std::array<int, 2> dims() const { return dims_; }
    Point origin() const { return origin_; }
    std::size_t size() const { return kind_.size(); }
    const std::string& name() const { return name_; }

    std::size_t index(int i, int j = 0) const { return static_cast<std::size_t>(j) * dims_[0] + i; }
    std::array<int, 2> coords(std::size_t idx) const {
        return {static_cast<int>(idx % dims_[0]), static_cast<int>(idx / dims_[0])};
    }
    Point position(std::size_t idx) const;
    /// Lattice index of the node closest to x, if x lies over the lattice.
    std::optional<std::size_t> nearest(const Point& x) const;
    /// Neighbour along `axis` in direction `dir` (+1/-1), or nullopt off the lattice.
    std::optional<std::size_t> neighbor(std::size_t idx, int axis, int dir) const;

    CellKind kind(std::size_t idx) const { return kind_[idx]; }
    bool inside(std::size_t idx) const { return kind_[idx] == CellKind::Inside; }
    bool active(std::size_t idx) const { return kind_[idx] != CellKind::Outside; }
    bool is_measure_cell(std::size_t idx) const { return measure_mask_[idx] != 0; }

    const std::vector<std::size_t>& interior_cells() const { return interior_; }
    const std::vector<std::size_t>& halo_cells() const { return halo_; }
    const std::vector<std::size_t>& measure_cells() const { return measure_; }
    const std::vector<BoundaryCell>& boundary_cells() const { return boundary_; }

    /// Membership of an arbitrary point in Omega: the shape predicate when the
    /// domain came from a shape, otherwise the nearest-node mask.
    bool contains(const Point& x) const;

    double cell_volume() const;
    /// Discrete |Omega|: number of measure cells times h^n.
    double measure() const;
    Box bounding_box() const { return bbox_; }
    double diameter() const;

    std::vector<std::size_t> cells_in_ball(const Ball& ball, CellSet set) const;
    std::vector<std::size_t> cells(CellSet set) const;

private:
    Domain() = default;
    void classify(const std::vector<std::uint8_t>& inside);

    int n_ = 2;
    double h_ = 0.0;
    std::array<int, 2> dims_{0, 1};
    Point origin_{0.0, 0.0};
    std::string name_;
    Box bbox_;
    std::function<bool(const Point&, double)> shape_contains_;

    std::vector<CellKind> kind_;
    std::vector<std::uint8_t> measure_mask_;
    std::vector<std::size_t> interior_;
    std::vector<std::size_t> halo_;
    std::vector<std::size_t> measure_;
    std::vector<BoundaryCell> boundary_;
};

/// True when points within 2h of x fall both inside and outside Omega, i.e. x
/// lies on the boundary at lattice resolution.
bool on_boundary(const Domain& domain, const Point& x);

/// Real values on every lattice node of a Domain. Outside nodes carry 0.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(std::size_t size, double value = 0.0) : values_(size, value) {}
    explicit ScalarField(std::vector<double> values) : values_(std::move(values)) {}

    /// Evaluates fn on every active node; throws DomainError on a non-finite value.
    static ScalarField sample(const Domain& domain, const std::function<double(const Point&)>& fn);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    std::span<const double> values() const { return values_; }
    std::vector<double>& data() { return values_; }

private:
    std::vector<double> values_;
};

using Vec2 = std::array<double, 2>;
using GradientField = std::vector<Vec2>;

/// Forward differences per axis; a cell whose forward neighbour is not active
/// falls back to the backward difference, and to 0 if neither exists.
GradientField discrete_gradient(const Domain& domain, const ScalarField& field);

/// Gradient at a single cell (same stencil rule as discrete_gradient).
Vec2 gradient_at(const Domain& domain, std::span<const double> values, std::size_t cell);

inline double norm(const Vec2& g) { return std::hypot(g[0], g[1]); }

/// rho_phi(f) = sum over measure cells of phi(x, |f|) h^n.
double modular(const Domain& domain, const PhiFunction& phi, const ScalarField& field);
double modular(const Domain& domain, const PhiFunction& phi, const ScalarField& field,
               std::span<const std::size_t> cells);

struct LuxemburgResult {
    double norm = 0.0;
    bool attained = true;       // rho(f / norm) = 1 up to the bisection tolerance
    double modular_at_norm = 0.0;
};

/// Generic Luxemburg solve: `rho(s)` must return the modular of s * f.
/// The bracket comes from the declared growth exponents and is repaired by
/// doubling if they are wrong.
LuxemburgResult luxemburg_from_modular(const std::function<double(double)>& rho, double p_lower,
                                       double q_upper, double L, double rel_tol = 1e-10);

LuxemburgResult luxemburg_norm(const Domain& domain, const PhiFunction& phi, const ScalarField& field,
                               double rel_tol = 1e-10);
LuxemburgResult luxemburg_norm(const Domain& domain, const PhiFunction& phi, const ScalarField& field,
                               std::span<const std::size_t> cells, double rel_tol = 1e-10);

struct SobolevPoincareReport {
    double scale = 1.0;  // factor applied to v so that ||grad v||_{phi^{1/s}} <= 1
    double rhs = 0.0;    // (avg phi(x,|grad v|)^{1/s})^s + 1
    std::vector<double> beta_grid;
    std::vector<double> lhs;     // avg phi(x, beta |v - v_B| / diam B) per beta
    std::vector<double> ratios;  // lhs / rhs
    double best_beta = 0.0;      // largest sampled beta with lhs <= rhs, 0 if none
    std::size_t cell_count = 0;
};

/// Sobolev-Poincare verifier on a ball (or the whole domain when `ball` is empty,
/// using the bounding-box diagonal as the diameter).
SobolevPoincareReport sobolev_poincare_check(const Domain& domain, const PhiFunction& phi,
                                             const ScalarField& field, double s,
                                             const std::optional<Ball>& ball,
                                             std::vector<double> beta_grid = {});

/// Plain-text lattice dump:
///
///     # gorlicz grid v1
///     n 2
///     dims <nx> <ny>
///     h <h>
///     origin <x0> <y0>
///     values
///     <nx * ny values, row-major, one per line>
struct GridFile {
    int n = 2;
    std::array<int, 2> dims{0, 1};
    double h = 0.0;
    Point origin{0.0, 0.0};
    std::vector<double> values;
};

void write_grid(const std::filesystem::path& path, const Domain& domain, const ScalarField& field);
GridFile read_grid(const std::filesystem::path& path);

/// One row per active node: i,j,x,y,kind,value.
void write_field_csv(std::ostream& out, const Domain& domain, const ScalarField& field);

}  // namespace gorlicz
