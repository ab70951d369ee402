#include "gorlicz/grid.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

namespace gorlicz {

// ---------------------------------------------------------------------------
// Shapes

Shape Shape::interval(double a, double b) {
    if (!(b > a)) throw ArgumentError("interval needs a < b");
    return Shape{1, "interval", Box{{a, 0.0}, {b, 0.0}},
                 [a, b](const Point& x, double eps) { return x[0] > a + eps && x[0] < b - eps; }};
}

Shape Shape::rectangle(Point lo, Point hi) {
    if (!(hi[0] > lo[0] && hi[1] > lo[1])) throw ArgumentError("rectangle needs lo < hi");
    return Shape{2, "rectangle", Box{lo, hi}, [lo, hi](const Point& x, double eps) {
                     return x[0] > lo[0] + eps && x[0] < hi[0] - eps && x[1] > lo[1] + eps && x[1] < hi[1] - eps;
                 }};
}

Shape Shape::disk(Point c, double radius) {
    if (!(radius > 0.0)) throw ArgumentError("disk radius must be positive");
    return Shape{2, "disk", Box{{c[0] - radius, c[1] - radius}, {c[0] + radius, c[1] + radius}},
                 [c, radius](const Point& x, double eps) { return distance(x, c) < radius - eps; }};
}

Shape Shape::l_shape(double a) {
    if (!(a > 0.0)) throw ArgumentError("L-shape size must be positive");
    return Shape{2, "l_shape", Box{{-a, -a}, {a, a}}, [a](const Point& x, double eps) {
                     const bool square = x[0] > -a + eps && x[0] < a - eps && x[1] > -a + eps && x[1] < a - eps;
                     const bool notch = x[0] > -eps && x[1] < eps;
                     return square && !notch;
                 }};
}

Shape Shape::slit_disk(Point c, double radius) {
    if (!(radius > 0.0)) throw ArgumentError("disk radius must be positive");
    return Shape{2, "slit_disk", Box{{c[0] - radius, c[1] - radius}, {c[0] + radius, c[1] + radius}},
                 [c, radius](const Point& x, double eps) {
                     if (!(distance(x, c) < radius - eps)) return false;
                     return !(std::abs(x[1] - c[1]) <= eps && x[0] > c[0] - eps);
                 }};
}

Shape Shape::cusp_square(double a, double k, double power) {
    if (!(a > 0.0 && k > 0.0 && power > 1.0)) throw ArgumentError("cusp parameters must be positive, power > 1");
    return Shape{2, "cusp_square", Box{{-a, -a}, {a, a}}, [a, k, power](const Point& x, double eps) {
                     const bool square = x[0] > -a + eps && x[0] < a - eps && x[1] > -a + eps && x[1] < a - eps;
                     const bool horn = x[0] > -eps && std::abs(x[1]) <= k * std::pow(std::max(x[0], 0.0), power) + eps;
                     return square && !horn;
                 }};
}

// ---------------------------------------------------------------------------
// Domain

Domain Domain::rasterize(const Shape& shape, double h) {
    if (!(h > 0.0)) throw ArgumentError("cell size h must be positive");
    if (shape.n != 1 && shape.n != 2) throw ArgumentError("only n = 1 and n = 2 are supported");
    Domain d;
    d.n_ = shape.n;
    d.h_ = h;
    d.name_ = shape.name;
    d.bbox_ = shape.bbox;
    d.shape_contains_ = shape.contains;
    for (int axis = 0; axis < 2; ++axis) {
        if (axis >= shape.n) {
            d.dims_[axis] = 1;
            d.origin_[axis] = 0.0;
            continue;
        }
        const double extent = shape.bbox.hi[axis] - shape.bbox.lo[axis];
        const int cells = static_cast<int>(std::ceil(extent / h - 1e-9));
        d.dims_[axis] = cells + 3;
        d.origin_[axis] = shape.bbox.lo[axis] - h;
    }
    std::vector<std::uint8_t> inside(static_cast<std::size_t>(d.dims_[0]) * d.dims_[1], 0);
    const double eps = 1e-9 * h;
    for (std::size_t idx = 0; idx < inside.size(); ++idx) {
        inside[idx] = shape.contains(d.position(idx), eps) ? 1 : 0;
    }
    d.classify(inside);
    return d;
}

Domain Domain::from_mask(int n, std::array<int, 2> dims, double h, Point origin,
                         const std::vector<std::uint8_t>& inside, std::string name) {
    if (n != 1 && n != 2) throw ArgumentError("only n = 1 and n = 2 are supported");
    if (!(h > 0.0)) throw ArgumentError("cell size h must be positive");
    if (n == 1) dims[1] = 1;
    if (dims[0] < 1 || dims[1] < 1 ||
        inside.size() != static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1])) {
        throw ArgumentError("mask size does not match lattice dimensions");
    }
    Domain d;
    d.n_ = n;
    d.h_ = h;
    d.dims_ = dims;
    d.origin_ = origin;
    if (n == 1) d.origin_[1] = 0.0;
    d.name_ = std::move(name);
    d.classify(inside);
    // Bounding box of the active region.
    Point lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    Point hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    for (std::size_t idx : d.halo_) {
        const Point x = d.position(idx);
        for (int a = 0; a < 2; ++a) {
            lo[a] = std::min(lo[a], x[a]);
            hi[a] = std::max(hi[a], x[a]);
        }
    }
    d.bbox_ = Box{lo, hi};
    return d;
}

void Domain::classify(const std::vector<std::uint8_t>& inside) {
    const std::size_t total = inside.size();
    kind_.assign(total, CellKind::Outside);
    interior_.clear();
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (!inside[idx]) continue;
        const auto [i, j] = coords(idx);
        const bool on_edge = i == 0 || i == dims_[0] - 1 || (n_ == 2 && (j == 0 || j == dims_[1] - 1));
        if (on_edge) throw GeometryError("inside cell on the lattice edge leaves no room for the halo");
        kind_[idx] = CellKind::Inside;
        interior_.push_back(idx);
    }
    if (interior_.empty()) throw GeometryError("domain '" + name_ + "' has no inside cells at this resolution");

    const int jr = n_ == 2 ? 1 : 0;
    for (std::size_t idx : interior_) {
        const auto [i, j] = coords(idx);
        for (int dj = -jr; dj <= jr; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                const std::size_t nb = index(i + di, j + dj);
                if (kind_[nb] == CellKind::Outside) kind_[nb] = CellKind::Halo;
            }
        }
    }
    halo_.clear();
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (kind_[idx] == CellKind::Halo) halo_.push_back(idx);
    }

    // Lattice connectivity through axis neighbours.
    std::vector<std::uint8_t> seen(total, 0);
    std::deque<std::size_t> queue{interior_.front()};
    seen[interior_.front()] = 1;
    std::size_t reached = 0;
    while (!queue.empty()) {
        const std::size_t cur = queue.front();
        queue.pop_front();
        ++reached;
        for (int axis = 0; axis < n_; ++axis) {
            for (int dir : {-1, 1}) {
                const auto nb = neighbor(cur, axis, dir);
                if (nb && inside[*nb] && !seen[*nb]) {
                    seen[*nb] = 1;
                    queue.push_back(*nb);
                }
            }
        }
    }
    if (reached != interior_.size()) throw GeometryError("domain '" + name_ + "' is not lattice-connected");

    // Measure cells: every cell whose forward square [x, x + h]^n has a corner in Omega.
    measure_mask_.assign(total, 0);
    for (std::size_t idx : interior_) {
        const auto [i, j] = coords(idx);
        for (int dj = 0; dj <= jr; ++dj) {
            for (int di = 0; di <= 1; ++di) measure_mask_[index(i - di, j - dj)] = 1;
        }
    }
    measure_.clear();
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (measure_mask_[idx]) measure_.push_back(idx);
    }

    boundary_.clear();
    for (std::size_t idx : interior_) {
        Point out{0.0, 0.0};
        bool touches = false;
        Point first{0.0, 0.0};
        for (int axis = 0; axis < n_; ++axis) {
            for (int dir : {-1, 1}) {
                const auto nb = neighbor(idx, axis, dir);
                if (nb && kind_[*nb] == CellKind::Inside) continue;
                if (!touches) first[axis] = dir;
                touches = true;
                out[axis] += dir;
            }
        }
        if (!touches) continue;
        double len = std::hypot(out[0], out[1]);
        if (len == 0.0) {
            out = first;
            len = 1.0;
        }
        boundary_.push_back({idx, {out[0] / len, out[1] / len}});
    }
}

Point Domain::position(std::size_t idx) const {
    const auto [i, j] = coords(idx);
    return {origin_[0] + i * h_, n_ == 2 ? origin_[1] + j * h_ : 0.0};
}

std::optional<std::size_t> Domain::nearest(const Point& x) const {
    const long i = std::lround((x[0] - origin_[0]) / h_);
    const long j = n_ == 2 ? std::lround((x[1] - origin_[1]) / h_) : 0;
    if (i < 0 || i >= dims_[0] || j < 0 || j >= dims_[1]) return std::nullopt;
    return index(static_cast<int>(i), static_cast<int>(j));
}

std::optional<std::size_t> Domain::neighbor(std::size_t idx, int axis, int dir) const {
    if (axis >= n_) return std::nullopt;
    auto c = coords(idx);
    c[axis] += dir;
    if (c[axis] < 0 || c[axis] >= dims_[axis]) return std::nullopt;
    return index(c[0], c[1]);
}

bool Domain::contains(const Point& x) const {
    if (shape_contains_) return shape_contains_(x, 1e-9 * h_);
    const auto idx = nearest(x);
    return idx && inside(*idx);
}

double Domain::cell_volume() const {
    return n_ == 2 ? h_ * h_ : h_;
}

double Domain::measure() const {
    return static_cast<double>(measure_.size()) * cell_volume();
}

double Domain::diameter() const {
    return std::hypot(bbox_.hi[0] - bbox_.lo[0], bbox_.hi[1] - bbox_.lo[1]);
}

namespace {

bool in_set(const Domain& d, std::size_t idx, CellSet set) {
    switch (set) {
        case CellSet::Inside: return d.inside(idx);
        case CellSet::Active: return d.active(idx);
        case CellSet::Measure: return d.is_measure_cell(idx);
        case CellSet::All: return true;
    }
    return false;
}

}  // namespace

std::vector<std::size_t> Domain::cells_in_ball(const Ball& ball, CellSet set) const {
    std::vector<std::size_t> out;
    const int reach = static_cast<int>(std::ceil(ball.radius / h_)) + 1;
    const auto centre = [&](int axis) {
        return static_cast<int>(std::lround((ball.center[axis] - origin_[axis]) / h_));
    };
    const int ci = centre(0);
    const int cj = n_ == 2 ? centre(1) : 0;
    const int jlo = n_ == 2 ? std::max(0, cj - reach) : 0;
    const int jhi = n_ == 2 ? std::min(dims_[1] - 1, cj + reach) : 0;
    for (int j = jlo; j <= jhi; ++j) {
        for (int i = std::max(0, ci - reach); i <= std::min(dims_[0] - 1, ci + reach); ++i) {
            const std::size_t idx = index(i, j);
            if (distance(position(idx), ball.center) < ball.radius && in_set(*this, idx, set)) out.push_back(idx);
        }
    }
    return out;
}

std::vector<std::size_t> Domain::cells(CellSet set) const {
    switch (set) {
        case CellSet::Inside: return interior_;
        case CellSet::Measure: return measure_;
        default: break;
    }
    std::vector<std::size_t> out;
    for (std::size_t idx = 0; idx < size(); ++idx) {
        if (in_set(*this, idx, set)) out.push_back(idx);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fields

ScalarField ScalarField::sample(const Domain& domain, const std::function<double(const Point&)>& fn) {
    ScalarField f(domain.size(), 0.0);
    for (std::size_t idx = 0; idx < domain.size(); ++idx) {
        if (!domain.active(idx)) continue;
        const double v = fn(domain.position(idx));
        if (!std::isfinite(v)) {
            const Point x = domain.position(idx);
            throw DomainError("field value is not finite at (" + std::to_string(x[0]) + ", " +
                              std::to_string(x[1]) + ")");
        }
        f[idx] = v;
    }
    return f;
}

Vec2 gradient_at(const Domain& domain, std::span<const double> values, std::size_t cell) {
    Vec2 g{0.0, 0.0};
    for (int axis = 0; axis < domain.dim(); ++axis) {
        const auto fwd = domain.neighbor(cell, axis, +1);
        if (fwd && domain.active(*fwd)) {
            g[axis] = (values[*fwd] - values[cell]) / domain.h();
            continue;
        }
        const auto bwd = domain.neighbor(cell, axis, -1);
        if (bwd && domain.active(*bwd)) g[axis] = (values[cell] - values[*bwd]) / domain.h();
    }
    return g;
}

GradientField discrete_gradient(const Domain& domain, const ScalarField& field) {
    GradientField grad(domain.size(), Vec2{0.0, 0.0});
    for (std::size_t idx = 0; idx < domain.size(); ++idx) {
        if (domain.active(idx)) grad[idx] = gradient_at(domain, field.values(), idx);
    }
    return grad;
}

double modular(const Domain& domain, const PhiFunction& phi, const ScalarField& field,
               std::span<const std::size_t> cells) {
    double sum = 0.0;
    for (std::size_t idx : cells) sum += phi.evaluate(domain.position(idx), std::abs(field[idx]));
    return sum * domain.cell_volume();
}

double modular(const Domain& domain, const PhiFunction& phi, const ScalarField& field) {
    return modular(domain, phi, field, domain.measure_cells());
}

LuxemburgResult luxemburg_from_modular(const std::function<double(double)>& rho, double p_lower,
                                       double q_upper, double L, double rel_tol) {
    (void)q_upper;
    const double rho0 = rho(1.0);
    if (rho0 == 0.0) return {0.0, true, 0.0};
    if (!std::isfinite(rho0)) throw DomainError("modular is not finite");

    // rho(f / lambda) <= L lambda^{-p} rho(f) for lambda >= 1 and
    // rho(f / lambda) >= lambda^{-p} rho(f) / L for lambda <= 1.
    double hi = std::pow(L * (1.0 + rho0), 1.0 / p_lower);
    double lo = std::pow(rho0 / (L * (1.0 + rho0)), 1.0 / p_lower);
    for (int i = 0; i < 2000 && rho(1.0 / hi) > 1.0; ++i) hi *= 2.0;
    for (int i = 0; i < 2000 && rho(1.0 / lo) <= 1.0; ++i) lo *= 0.5;

    while (hi / lo - 1.0 > rel_tol) {
        const double mid = std::sqrt(lo * hi);
        if (mid <= lo || mid >= hi) break;
        if (rho(1.0 / mid) <= 1.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    const double at_hi = rho(1.0 / hi);
    return {hi, std::abs(at_hi - 1.0) <= 1e-6, at_hi};
}

LuxemburgResult luxemburg_norm(const Domain& domain, const PhiFunction& phi, const ScalarField& field,
                               std::span<const std::size_t> cells, double rel_tol) {
    std::vector<LocalPhi> local;
    std::vector<double> mag;
    local.reserve(cells.size());
    for (std::size_t idx : cells) {
        local.push_back(phi.at(domain.position(idx)));
        mag.push_back(std::abs(field[idx]));
    }
    const double vol = domain.cell_volume();
    auto rho = [&](double s) {
        double sum = 0.0;
        for (std::size_t k = 0; k < local.size(); ++k) sum += local[k].value(s * mag[k]);
        return sum * vol;
    };
    return luxemburg_from_modular(rho, phi.p_lower(), phi.q_upper(), phi.L(), rel_tol);
}

LuxemburgResult luxemburg_norm(const Domain& domain, const PhiFunction& phi, const ScalarField& field,
                               double rel_tol) {
    return luxemburg_norm(domain, phi, field, domain.measure_cells(), rel_tol);
}

SobolevPoincareReport sobolev_poincare_check(const Domain& domain, const PhiFunction& phi,
                                             const ScalarField& field, double s,
                                             const std::optional<Ball>& ball, std::vector<double> beta_grid) {
    const int n = domain.dim();
    if (!(s >= 1.0) || (n == 2 && !(s < 2.0))) {
        throw ArgumentError("Sobolev-Poincare exponent s must lie in [1, n/(n-1))");
    }
    if (beta_grid.empty()) {
        for (int k = 0; k <= 20; ++k) beta_grid.push_back(std::pow(2.0, -0.5 * k));
    }
    const std::vector<std::size_t> cells =
        ball ? domain.cells_in_ball(*ball, CellSet::Measure) : domain.measure_cells();
    if (cells.empty()) throw ArgumentError("ball contains no measure cells");
    const double diam = ball ? 2.0 * ball->radius : domain.diameter();

    SobolevPoincareReport rep;
    rep.cell_count = cells.size();
    rep.beta_grid = beta_grid;

    std::vector<LocalPhi> local;
    std::vector<double> grad;
    for (std::size_t idx : cells) {
        local.push_back(phi.at(domain.position(idx)));
        grad.push_back(norm(gradient_at(domain, field.values(), idx)));
    }
    const double vol = domain.cell_volume();
    const double inv_s = 1.0 / s;
    auto rho_root = [&](double scale) {
        double sum = 0.0;
        for (std::size_t k = 0; k < local.size(); ++k) sum += std::pow(local[k].value(scale * grad[k]), inv_s);
        return sum * vol;
    };
    const auto lux = luxemburg_from_modular(rho_root, phi.p_lower() / s, phi.q_upper() / s, phi.L());
    rep.scale = lux.norm > 1.0 ? 1.0 / (lux.norm * (1.0 + 1e-9)) : 1.0;

    const double count = static_cast<double>(cells.size());
    rep.rhs = std::pow(rho_root(rep.scale) / (count * vol), s) + 1.0;

    // Shifted by the first value so constant fields give v - v_B = 0 exactly.
    const double shift = field[cells.front()];
    double mean = 0.0;
    for (std::size_t idx : cells) mean += field[idx] - shift;
    mean = shift + mean / count;
    for (double beta : beta_grid) {
        double sum = 0.0;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            sum += local[k].value(beta * rep.scale * std::abs(field[cells[k]] - mean) / diam);
        }
        const double lhs = sum / count;
        rep.lhs.push_back(lhs);
        rep.ratios.push_back(lhs / rep.rhs);
        if (lhs <= rep.rhs) rep.best_beta = std::max(rep.best_beta, beta);
    }
    return rep;
}

bool on_boundary(const Domain& domain, const Point& x) {
    const double h = domain.h();
    const int n = domain.dim();
    bool seen_in = false, seen_out = false;
    for (int j = (n == 2 ? -8 : 0); j <= (n == 2 ? 8 : 0); ++j) {
        for (int i = -8; i <= 8; ++i) {
            const Point y{x[0] + 0.25 * h * i, x[1] + 0.25 * h * j};
            if (distance(x, y) > 2.0 * h) continue;
            (domain.contains(y) ? seen_in : seen_out) = true;
        }
    }
    return seen_in && seen_out;
}

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_grid(const std::filesystem::path& path, const Domain& domain, const ScalarField& field) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    const Point o = domain.origin();
    out << "# gorlicz grid v1\n"
        << "n " << domain.dim() << '\n'
        << "dims " << domain.nx() << ' ' << domain.ny() << '\n'
        << "h " << fmt17(domain.h()) << '\n'
        << "origin " << fmt17(o[0]) << ' ' << fmt17(o[1]) << '\n'
        << "values\n";
    for (std::size_t i = 0; i < field.size(); ++i) out << fmt17(field[i]) << '\n';
}

GridFile read_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open grid file '" + path.string() + "'");
    GridFile g;
    std::string line;
    int line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.rfind("# gorlicz grid v1", 0) == 0) {
            header = true;
            continue;
        }
        if (line.front() == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "n") {
            ls >> g.n;
        } else if (key == "dims") {
            ls >> g.dims[0] >> g.dims[1];
        } else if (key == "h") {
            ls >> g.h;
        } else if (key == "origin") {
            ls >> g.origin[0] >> g.origin[1];
        } else if (key == "values") {
            break;
        } else {
            throw ParseError("unexpected grid header line", line_no, 1);
        }
        if (!ls) throw ParseError("malformed grid header", line_no, 1);
    }
    if (!header) throw ParseError("missing '# gorlicz grid v1' header", 1, 1);
    const std::size_t count = static_cast<std::size_t>(g.dims[0]) * static_cast<std::size_t>(g.dims[1]);
    g.values.reserve(count);
    double v = 0.0;
    while (g.values.size() < count && in >> v) g.values.push_back(v);
    if (g.values.size() != count) throw ParseError("grid file has too few values", line_no, 1);
    return g;
}

void write_field_csv(std::ostream& out, const Domain& domain, const ScalarField& field) {
    out << "i,j,x,y,kind,value\n";
    for (std::size_t idx = 0; idx < domain.size(); ++idx) {
        if (!domain.active(idx)) continue;
        const auto [i, j] = domain.coords(idx);
        const Point x = domain.position(idx);
        out << i << ',' << j << ',' << fmt17(x[0]) << ',' << fmt17(x[1]) << ','
            << (domain.inside(idx) ? "inside" : "halo") << ',' << fmt17(field[idx]) << '\n';
    }
}

}  // namespace gorlicz
