#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "gorlicz/capacity.hpp"
#include "gorlicz/conditions.hpp"
#include "gorlicz/diagnostics.hpp"
#include "gorlicz/expr.hpp"
#include "gorlicz/runner.hpp"

namespace py = pybind11;
using namespace gorlicz;

namespace {

using release = py::call_guard<py::gil_scoped_release>;

const Box kEverywhere{{-1e6, -1e6}, {1e6, 1e6}};

py::array_t<double> to_array(std::span<const double> v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
    py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

// Accepts an expression string in x, y; a callable f(x, y); a number; or an array
// with one value per lattice node.
ScalarField to_field(const Domain& d, const py::object& value) {
    if (py::isinstance<py::str>(value)) {
        const Expression e = Expression::parse(value.cast<std::string>());
        return ScalarField::sample(d, [&e](const Point& x) { return e(x); });
    }
    if (py::isinstance<py::float_>(value) || py::isinstance<py::int_>(value)) {
        const double c = value.cast<double>();
        return ScalarField::sample(d, [c](const Point&) { return c; });
    }
    if (PyCallable_Check(value.ptr())) {
        return ScalarField::sample(d, [&value](const Point& x) { return value(x[0], x[1]).cast<double>(); });
    }
    const auto arr = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(value);
    if (!arr || static_cast<std::size_t>(arr.size()) != d.size()) {
        throw ArgumentError("field must be an expression, callable, number or array of length " +
                            std::to_string(d.size()));
    }
    return ScalarField(std::vector<double>(arr.data(), arr.data() + arr.size()));
}

CoefficientField to_coefficient(const py::object& value, const std::string& label) {
    if (py::isinstance<py::str>(value)) {
        const Expression e = Expression::parse(value.cast<std::string>());
        return CoefficientField{[e](const Point& x) { return e(x); }, kEverywhere, e.text()};
    }
    if (py::isinstance<py::float_>(value) || py::isinstance<py::int_>(value)) {
        const double c = value.cast<double>();
        return CoefficientField{[c](const Point&) { return c; }, kEverywhere, label};
    }
    auto fn = value.cast<std::function<double(double, double)>>();
    return CoefficientField{[fn](const Point& x) { return fn(x[0], x[1]); }, kEverywhere, label};
}

py::dict to_dict(const ConditionReport& r) {
    py::dict d;
    d["condition"] = to_string(r.condition);
    d["holds"] = r.holds;
    d["witness"] = r.witness_beta_or_L;
    d["exponent"] = r.exponent;
    d["skipped"] = r.skipped;
    d["scale_profile"] = r.scale_profile;
    d["beta_decay_slope"] = r.beta_decay_slope;
    d["note"] = r.note;
    if (r.violating_sample) {
        const auto& s = *r.violating_sample;
        py::dict v;
        v["x"] = s.x;
        v["t"] = s.t;
        v["s"] = s.s;
        v["radius"] = s.radius;
        v["beta"] = s.beta;
        v["lhs"] = s.lhs;
        v["rhs"] = s.rhs;
        d["violating_sample"] = v;
    } else {
        d["violating_sample"] = py::none();
    }
    return d;
}

py::dict to_dict(const CaccioppoliPair& p) {
    py::dict d;
    d["lhs"] = p.lhs;
    d["rhs"] = p.rhs;
    d["terms"] = p.terms;
    d["ratio"] = p.ratio();
    return d;
}

template <class Report>
std::string csv_of(const Report& r) {
    std::ostringstream out;
    write_csv(out, r);
    return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Obstacle problems, capacities and regularity diagnostics for generalized Orlicz energies";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
    py::register_exception<NotInvertibleError>(m, "NotInvertibleError", PyExc_ArithmeticError);
    py::register_exception<WrongVariantError>(m, "WrongVariantError", PyExc_ValueError);

    py::class_<PhiFunction>(m, "Phi")
        .def_static("power", &PhiFunction::power, py::arg("p"))
        .def_static(
            "double_phase",
            [](double p, double q, const py::object& weight) {
                return PhiFunction::double_phase(p, q, to_coefficient(weight, "a"));
            },
            py::arg("p"), py::arg("q"), py::arg("weight"))
        .def_static(
            "variable_exponent",
            [](const py::object& exponent, double p_lower, double q_upper) {
                return PhiFunction::variable_exponent(to_coefficient(exponent, "p"), p_lower, q_upper);
            },
            py::arg("exponent"), py::arg("p_lower"), py::arg("q_upper"))
        .def_static("orlicz", &PhiFunction::orlicz, py::arg("t"), py::arg("values"), py::arg("p_lower"),
                    py::arg("q_upper"), py::arg("L") = 1.0, py::arg("strictly_convex") = true)
        .def("evaluate", &PhiFunction::evaluate, py::arg("x"), py::arg("t"))
        .def("left_inverse", &PhiFunction::left_inverse, py::arg("x"), py::arg("tau"))
        .def_property_readonly("p_lower", &PhiFunction::p_lower)
        .def_property_readonly("q_upper", &PhiFunction::q_upper)
        .def_property_readonly("L", &PhiFunction::L)
        .def("describe", &PhiFunction::describe)
        .def("__repr__", [](const PhiFunction& p) { return "<Phi " + p.describe() + ">"; });

    py::class_<Shape>(m, "Shape")
        .def_static("interval", &Shape::interval, py::arg("a"), py::arg("b"))
        .def_static("rectangle", &Shape::rectangle, py::arg("lo"), py::arg("hi"))
        .def_static("disk", &Shape::disk, py::arg("center"), py::arg("radius"))
        .def_static("l_shape", &Shape::l_shape, py::arg("a") = 1.0)
        .def_static("slit_disk", &Shape::slit_disk, py::arg("center"), py::arg("radius"))
        .def_static("cusp_square", &Shape::cusp_square, py::arg("a") = 1.0, py::arg("k") = 0.5,
                    py::arg("power") = 2.0)
        .def_readonly("name", &Shape::name)
        .def_readonly("n", &Shape::n);

    py::class_<Domain>(m, "Domain")
        .def_static("rasterize", &Domain::rasterize, py::arg("shape"), py::arg("h"))
        .def_property_readonly("dim", &Domain::dim)
        .def_property_readonly("h", &Domain::h)
        .def_property_readonly("dims", &Domain::dims)
        .def_property_readonly("origin", &Domain::origin)
        .def_property_readonly("size", &Domain::size)
        .def_property_readonly("name", &Domain::name)
        .def("measure", &Domain::measure)
        .def("diameter", &Domain::diameter)
        .def("contains", &Domain::contains, py::arg("x"))
        .def("position", &Domain::position, py::arg("index"))
        .def("interior_cells", [](const Domain& d) { return to_array(d.interior_cells()); })
        .def("halo_cells", [](const Domain& d) { return to_array(d.halo_cells()); })
        .def("cells_in_ball",
             [](const Domain& d, const Point& c, double r) {
                 return to_array(d.cells_in_ball(Ball{c, r}, CellSet::Inside));
             },
             py::arg("center"), py::arg("radius"))
        .def("kinds",
             [](const Domain& d) {
                 std::vector<std::uint8_t> k(d.size());
                 for (std::size_t i = 0; i < d.size(); ++i) k[i] = static_cast<std::uint8_t>(d.kind(i));
                 return to_array(k);
             })
        .def("positions",
             [](const Domain& d) {
                 py::array_t<double> out({static_cast<py::ssize_t>(d.size()), py::ssize_t{2}});
                 auto w = out.mutable_unchecked<2>();
                 for (std::size_t i = 0; i < d.size(); ++i) {
                     const Point p = d.position(i);
                     w(i, 0) = p[0];
                     w(i, 1) = p[1];
                 }
                 return out;
             })
        .def("sample", [](const Domain& d, const py::object& f) { return to_array(to_field(d, f).values()); },
             py::arg("field"))
        .def("on_boundary", [](const Domain& d, const Point& x) { return on_boundary(d, x); }, py::arg("x"));

    py::class_<ObstacleProblem>(m, "ObstacleProblem")
        .def(py::init([](const Domain& d, const PhiFunction& phi, const py::object& boundary,
                         const py::object& obstacle, double smoothing) {
                 ObstacleProblem p{d, phi, std::nullopt, to_field(d, boundary), smoothing};
                 if (!obstacle.is_none()) p.obstacle = to_field(d, obstacle);
                 return p;
             }),
             py::arg("domain"), py::arg("phi"), py::arg("boundary"), py::arg("obstacle") = py::none(),
             py::arg("smoothing") = -1.0)
        .def_readonly("domain", &ObstacleProblem::domain)
        .def_readonly("phi", &ObstacleProblem::phi)
        .def_property_readonly("boundary", [](const ObstacleProblem& p) { return to_array(p.boundary.values()); })
        .def_property_readonly("obstacle", [](const ObstacleProblem& p) -> py::object {
            if (!p.obstacle) return py::none();
            return to_array(p.obstacle->values());
        });

    py::class_<Solution>(m, "Solution")
        .def_property_readonly("u", [](const Solution& s) { return to_array(s.u.values()); })
        .def_readonly("energy", &Solution::energy)
        .def_property_readonly("contact_set", [](const Solution& s) { return to_array(s.contact_set); })
        .def_readonly("iterations", &Solution::iterations)
        .def_readonly("converged", &Solution::converged)
        .def_readonly("kkt_residual", &Solution::kkt_residual)
        .def_readonly("smoothing", &Solution::smoothing)
        .def_property_readonly("energy_trace", [](const Solution& s) { return to_array(s.energy_trace); });

    m.def(
        "solve",
        [](const ObstacleProblem& p, const std::string& method, double tol, int max_iters, std::uint64_t seed,
           bool random_start, bool record_energy) {
            SolveOptions o;
            if (method == "newton") {
                o.method = SolverMethod::Newton;
            } else if (method == "gauss_seidel") {
                o.method = SolverMethod::GaussSeidel;
            } else if (method == "projected_gradient") {
                o.method = SolverMethod::ProjectedGradient;
            } else {
                throw ArgumentError("unknown method '" + method + "'");
            }
            o.tol = tol;
            o.max_iters = max_iters;
            o.seed = seed;
            o.random_start = random_start;
            o.record_energy = record_energy;
            py::gil_scoped_release nogil;
            return solve(p, o);
        },
        py::arg("problem"), py::arg("method") = "newton", py::arg("tol") = 1e-10, py::arg("max_iters") = 50000,
        py::arg("seed") = 0, py::arg("random_start") = false, py::arg("record_energy") = false);

    m.def(
        "energy",
        [](const ObstacleProblem& p, const py::object& u) { return energy(p, to_field(p.domain, u)); },
        py::arg("problem"), py::arg("u"));
    m.def(
        "stationarity_residual",
        [](const ObstacleProblem& p, const py::object& u) { return stationarity_residual(p, to_field(p.domain, u)); },
        py::arg("problem"), py::arg("u"));
    m.def(
        "modular",
        [](const Domain& d, const PhiFunction& phi, const py::object& f) { return modular(d, phi, to_field(d, f)); },
        py::arg("domain"), py::arg("phi"), py::arg("field"));
    m.def(
        "luxemburg_norm",
        [](const Domain& d, const PhiFunction& phi, const py::object& f) {
            return luxemburg_norm(d, phi, to_field(d, f)).norm;
        },
        py::arg("domain"), py::arg("phi"), py::arg("field"));

    m.def(
        "check_A0",
        [](const PhiFunction& phi, const Domain& d, std::optional<std::vector<double>> grid) {
            return to_dict(check_A0(phi, d, grid ? *grid : default_beta_grid()));
        },
        py::arg("phi"), py::arg("domain"), py::arg("beta_grid") = py::none());
    m.def(
        "check_aInc_aDec",
        [](const PhiFunction& phi, const Domain& d, double exponent, const std::string& mode,
           std::optional<std::vector<double>> grid) {
            if (mode != "inc" && mode != "dec") throw ArgumentError("mode must be 'inc' or 'dec'");
            return to_dict(check_aInc_aDec(phi, d, exponent, mode == "inc" ? Monotonicity::Inc : Monotonicity::Dec,
                                           grid ? *grid : geometric_grid(1e-3, 1e3, 121)));
        },
        py::arg("phi"), py::arg("domain"), py::arg("exponent"), py::arg("mode"), py::arg("t_grid") = py::none());
    m.def(
        "check_A1",
        [](const PhiFunction& phi, const Domain& d, std::vector<Point> centers, double r_max, int levels,
           const std::string& mode) {
            if (mode != "A1" && mode != "A1n") throw ArgumentError("mode must be 'A1' or 'A1n'");
            ConditionReport rep;
            {
                py::gil_scoped_release nogil;
                rep = check_A1(phi, d, dyadic_ball_sampler(std::move(centers), r_max, levels),
                               mode == "A1" ? A1Mode::A1 : A1Mode::A1n);
            }
            return to_dict(rep);
        },
        py::arg("phi"), py::arg("domain"), py::arg("centers"), py::arg("r_max"), py::arg("levels") = 5,
        py::arg("mode") = "A1");

    m.def(
        "capacity",
        [](const Domain& d, std::vector<std::size_t> E, const PhiFunction& phi) {
            return compute_capacity(CapacityInstance{d, std::move(E), phi}).value;
        },
        py::arg("domain"), py::arg("E"), py::arg("phi"), release());
    m.def(
        "ball_capacity",
        [](const PhiFunction& phi, const Point& c, double r, int n, int cpr) {
            return ball_capacity(phi, c, r, n, cpr).value;
        },
        py::arg("phi"), py::arg("center"), py::arg("r"), py::arg("n") = 2, py::arg("cells_per_radius") = 16,
        release());
    m.def(
        "ball_capacity_bounds",
        [](const PhiFunction& phi, const Point& c, double r, int n, int cpr) {
            const auto b = ball_capacity_bounds(phi, c, r, n, cpr);
            return std::make_pair(b.lower, b.upper);
        },
        py::arg("phi"), py::arg("center"), py::arg("r"), py::arg("n") = 2, py::arg("cells_per_radius") = 16,
        release());
    m.def(
        "classify_boundary_point",
        [](const Domain& d, const PhiFunction& phi, const Point& x0, const std::vector<double>& radii, int cpr) {
            BoundaryPointReport r;
            {
                py::gil_scoped_release nogil;
                r = classify_boundary_point(d, phi, x0, radii, cpr);
            }
            py::dict out;
            out["radii"] = r.radii;
            out["measure_density_ratios"] = r.measure_density_ratios;
            out["fatness_ratios"] = r.fatness_ratios;
            out["c_star_measure"] = r.c_star_measure;
            out["c_star_capacity"] = r.c_star_capacity;
            out["warnings"] = r.warnings;
            out["csv"] = csv_of(r);
            return out;
        },
        py::arg("domain"), py::arg("phi"), py::arg("x0"), py::arg("radii"), py::arg("cells_per_radius") = 16);

    m.def(
        "caccioppoli_interior_k",
        [](const ObstacleProblem& p, const Solution& s, const Point& x, double R, double r, double k) {
            return to_dict(caccioppoli_interior_k(p, s, x, R, r, k));
        },
        py::arg("problem"), py::arg("solution"), py::arg("x"), py::arg("R"), py::arg("r"), py::arg("k"));
    m.def(
        "caccioppoli_interior_mean",
        [](const ObstacleProblem& p, const Solution& s, const Point& x, double r) {
            return to_dict(caccioppoli_interior_mean(p, s, x, r));
        },
        py::arg("problem"), py::arg("solution"), py::arg("x"), py::arg("r"));
    m.def(
        "caccioppoli_boundary",
        [](const ObstacleProblem& p, const Solution& s, const Point& x, double r, std::optional<double> r0,
           bool a0_a1_verified) {
            return to_dict(caccioppoli_boundary(p, s, x, r, {r0, a0_a1_verified}));
        },
        py::arg("problem"), py::arg("solution"), py::arg("x"), py::arg("r"), py::arg("r0") = py::none(),
        py::arg("a0_a1_verified") = false);
    m.def(
        "gehring_estimate",
        [](const std::vector<std::pair<ObstacleProblem, Solution>>& levels, std::vector<double> eps,
           double max_growth) {
            GehringReport r;
            {
                py::gil_scoped_release nogil;
                r = gehring_estimate(levels, std::move(eps), max_growth);
            }
            py::dict out;
            out["eps_star"] = r.eps_star;
            out["eps_grid"] = r.eps_grid;
            out["worst_growth"] = r.worst_growth;
            out["fitted_C"] = r.fitted_C;
            out["lhs"] = r.lhs;
            out["csv"] = csv_of(r);
            return out;
        },
        py::arg("levels"), py::arg("eps_grid"), py::arg("max_growth") = 1.2);
    m.def(
        "boundary_continuity_check",
        [](const ObstacleProblem& p, const Solution& s, const std::string& f, const Point& x0,
           std::vector<double> radii, bool fatness_certified, double tol) {
            const Expression e = Expression::parse(f);
            const auto r = boundary_continuity_check(p, s, [&e](const Point& x) { return e(x); }, x0,
                                                     std::move(radii), fatness_certified, tol);
            py::dict out;
            out["radii"] = r.radii;
            out["sup_deviation"] = r.sup_deviation;
            out["monotone"] = r.monotone;
            out["small_at_finest"] = r.small_at_finest;
            out["verdict"] = to_string(r.verdict);
            return out;
        },
        py::arg("problem"), py::arg("solution"), py::arg("f"), py::arg("x0"), py::arg("radii"),
        py::arg("fatness_certified"), py::arg("tol") = 1e-3);

    m.def(
        "run",
        [](const std::string& command, const std::filesystem::path& config, std::optional<std::filesystem::path> out,
           std::optional<std::uint64_t> seed, double grid_scale) {
            RunOptions o;
            o.out_dir = std::move(out);
            o.seed = seed;
            o.grid_scale = grid_scale;
            std::ostringstream log, err;
            int code;
            {
                py::gil_scoped_release nogil;
                code = execute(command, config, o, log, err);
            }
            return py::make_tuple(code, log.str(), err.str());
        },
        py::arg("command"), py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(),
        py::arg("grid_scale") = 1.0);
}
