#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "gorlicz/grid.hpp"

using namespace gorlicz;

namespace {

const Box kWide{{-10.0, -10.0}, {10.0, 10.0}};

Domain unit_square(double h) { return Domain::rasterize(Shape::rectangle({0, 0}, {1, 1}), h); }

std::vector<PhiFunction> families() {
    return {PhiFunction::power(2.0), PhiFunction::power(1.5), PhiFunction::power(3.2),
            PhiFunction::double_phase(1.6, 2.6, CoefficientField{[](const Point& x) { return x[0] * x[0]; }, kWide, "a"}),
            PhiFunction::variable_exponent(CoefficientField{[](const Point& x) { return 2.2 + 0.5 * x[1]; }, kWide, "p"},
                                           1.7, 2.7)};
}

ScalarField random_field(const Domain& d, std::mt19937_64& rng, double amplitude) {
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    ScalarField f(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.active(i)) f[i] = u(rng);
    }
    return f;
}

}  // namespace

TEST(Domain, UnitSquareMeasureIsExact) {
    const Domain d = unit_square(1.0 / 64);
    EXPECT_DOUBLE_EQ(d.measure(), 1.0);
    EXPECT_EQ(d.interior_cells().size(), 63u * 63u);
}

TEST(Domain, BoundaryCellsCoverOmegaNextToOutside) {
    const Domain d = Domain::rasterize(Shape::l_shape(1.0), 1.0 / 16);
    std::set<std::size_t> listed;
    for (const auto& b : d.boundary_cells()) {
        listed.insert(b.index);
        EXPECT_NEAR(norm(Vec2{b.outward[0], b.outward[1]}), 1.0, 1e-12);
    }
    for (std::size_t idx : d.interior_cells()) {
        bool touches = false;
        for (int axis = 0; axis < 2; ++axis) {
            for (int dir : {-1, 1}) {
                const auto nb = d.neighbor(idx, axis, dir);
                if (nb && !d.inside(*nb)) touches = true;
            }
        }
        if (touches) EXPECT_TRUE(listed.count(idx)) << idx;
    }
}

TEST(Domain, ShapesAreNonEmpty) {
    for (const Shape& s : {Shape::disk({0, 0}, 1.0), Shape::slit_disk({0, 0}, 1.0), Shape::cusp_square(1.0, 0.5, 2.0),
                           Shape::interval(-1.0, 2.0)}) {
        const Domain d = Domain::rasterize(s, 1.0 / 16);
        EXPECT_FALSE(d.interior_cells().empty()) << s.name;
        EXPECT_FALSE(d.halo_cells().empty()) << s.name;
    }
}

TEST(Domain, OnBoundaryDetection) {
    const Domain d = unit_square(1.0 / 32);
    EXPECT_TRUE(on_boundary(d, {0.0, 0.5}));
    EXPECT_FALSE(on_boundary(d, {0.5, 0.5}));
}

TEST(Gradient, OneDimensionalLinear) {
    // Interval (0, 1) with h = 0.5 has a single inside node; check the stencil on it.
    const Domain d = Domain::rasterize(Shape::interval(0.0, 1.0), 0.5);
    const ScalarField f = ScalarField::sample(d, [](const Point& x) { return 2.0 * x[0]; });
    const auto g = discrete_gradient(d, f);
    for (std::size_t idx = 0; idx < d.size(); ++idx) {
        if (d.active(idx)) EXPECT_NEAR(g[idx][0], 2.0, 1e-14);
    }
}

TEST(Gradient, ConstantFieldIsZero) {
    const Domain d = Domain::rasterize(Shape::disk({0, 0}, 1.0), 0.1);
    const ScalarField f = ScalarField::sample(d, [](const Point&) { return 3.5; });
    for (const auto& g : discrete_gradient(d, f)) EXPECT_EQ(norm(g), 0.0);
}

TEST(Gradient, ForwardDifferenceOfSquares) {
    const Domain d = unit_square(0.1);
    const ScalarField f = ScalarField::sample(d, [](const Point& x) { return x[0] * x[0]; });
    const auto idx = d.nearest({0.3, 0.5});
    ASSERT_TRUE(idx.has_value());
    EXPECT_NEAR(d.position(*idx)[0], 0.3, 1e-12);
    EXPECT_NEAR(gradient_at(d, f.values(), *idx)[0], 0.7, 1e-12);
}

TEST(Modular, ConstantAndZero) {
    const Domain d = unit_square(1.0 / 64);
    const ScalarField one = ScalarField::sample(d, [](const Point&) { return 1.0; });
    EXPECT_NEAR(modular(d, PhiFunction::power(2.0), one), 1.0, 1e-12);
    for (const auto& phi : families()) EXPECT_EQ(modular(d, phi, ScalarField(d.size())), 0.0);
}

TEST(Modular, CubeIntegralFirstOrder) {
    double prev_err = 1.0;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        const Domain d = unit_square(h);
        const ScalarField f = ScalarField::sample(d, [](const Point& x) { return x[0]; });
        const double err = std::abs(modular(d, PhiFunction::power(3.0), f) - 0.25);
        EXPECT_LE(err, 2.0 * h);
        EXPECT_LT(err, prev_err);
        prev_err = err;
    }
}

TEST(Luxemburg, ConstantAndLinear) {
    const Domain d = unit_square(1.0 / 64);
    const ScalarField c = ScalarField::sample(d, [](const Point&) { return 2.5; });
    EXPECT_NEAR(luxemburg_norm(d, PhiFunction::power(2.0), c).norm, 2.5, 1e-9);
    EXPECT_EQ(luxemburg_norm(d, PhiFunction::power(2.0), ScalarField(d.size())).norm, 0.0);
    const ScalarField lin = ScalarField::sample(d, [](const Point& x) { return x[0]; });
    const double discrete = std::sqrt(modular(d, PhiFunction::power(2.0), lin));
    const auto r = luxemburg_norm(d, PhiFunction::power(2.0), lin);
    EXPECT_NEAR(r.norm, discrete, 1e-9);
    EXPECT_NEAR(r.norm, 1.0 / std::sqrt(3.0), 1e-2);
    EXPECT_TRUE(r.attained);
}

TEST(Luxemburg, BracketConditions) {
    const Domain d = unit_square(1.0 / 16);
    std::mt19937_64 rng(3);
    const auto phi = families()[3];
    const ScalarField f = random_field(d, rng, 4.0);
    const double tol = 1e-10;
    const double lam = luxemburg_norm(d, phi, f, tol).norm;
    auto scaled = [&](double s) {
        ScalarField g = f;
        for (auto& v : g.data()) v *= s;
        return modular(d, phi, g);
    };
    EXPECT_LE(scaled(1.0 / lam), 1.0 + 1e-9);
    EXPECT_GT(scaled(1.0 / (lam * (1.0 - 10.0 * tol))), 1.0);
}

TEST(FunctionSpaceProperties, UnitBall) {
    std::mt19937_64 rng(2024);
    const Domain d = unit_square(1.0 / 16);
    const auto fams = families();
    int violations = 0;
    for (int k = 0; k < 100; ++k) {
        const auto& phi = fams[k % fams.size()];
        ScalarField f = random_field(d, rng, 3.0);
        const double m = modular(d, phi, f);
        if (m > 1.0) {
            // Pull the field into the unit ball of the modular.
            const double s = std::pow(1.0 / (m * phi.L()), 1.0 / phi.p_lower()) * 0.999;
            for (auto& v : f.data()) v *= s;
        }
        ASSERT_LE(modular(d, phi, f), 1.0);
        if (luxemburg_norm(d, phi, f).norm > 1.0 + 1e-10) ++violations;
    }
    EXPECT_EQ(violations, 0);
}

TEST(FunctionSpaceProperties, Homogeneity) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> scale(-20.0, 20.0);
    const Domain d = unit_square(1.0 / 16);
    const auto fams = families();
    int violations = 0;
    for (int k = 0; k < 100; ++k) {
        const auto& phi = fams[k % fams.size()];
        const ScalarField f = random_field(d, rng, 2.0);
        const double c = scale(rng);
        ScalarField g = f;
        for (auto& v : g.data()) v *= c;
        const double a = luxemburg_norm(d, phi, g).norm;
        const double b = std::abs(c) * luxemburg_norm(d, phi, f).norm;
        if (std::abs(a - b) > 1e-8 * std::max(1.0, b)) ++violations;
    }
    EXPECT_EQ(violations, 0);
}

TEST(FunctionSpaceProperties, ModularMonotone) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> shrink(0.0, 1.0);
    const Domain d = Domain::rasterize(Shape::disk({0, 0}, 1.0), 1.0 / 16);
    const auto fams = families();
    int violations = 0;
    for (int k = 0; k < 100; ++k) {
        const auto& phi = fams[k % fams.size()];
        const ScalarField g = random_field(d, rng, 5.0);
        ScalarField f = g;
        for (auto& v : f.data()) v *= shrink(rng);
        if (modular(d, phi, f) > modular(d, phi, g)) ++violations;
    }
    EXPECT_EQ(violations, 0);
}

TEST(SobolevPoincare, ConstantFieldTrivial) {
    const Domain d = unit_square(1.0 / 32);
    const ScalarField c = ScalarField::sample(d, [](const Point&) { return 1.7; });
    const auto rep = sobolev_poincare_check(d, PhiFunction::power(2.0), c, 1.0, Ball{{0.5, 0.5}, 0.3});
    for (double l : rep.lhs) EXPECT_EQ(l, 0.0);
    EXPECT_EQ(rep.best_beta, rep.beta_grid.back() > rep.beta_grid.front() ? rep.beta_grid.back() : rep.beta_grid.front());
}

TEST(SobolevPoincare, LinearFieldPassesWithBetaOne) {
    const Domain d = Domain::rasterize(Shape::disk({0, 0}, 1.0), 1.0 / 32);
    const ScalarField v = ScalarField::sample(d, [](const Point& x) { return x[0]; });
    const auto rep = sobolev_poincare_check(d, PhiFunction::power(2.0), v, 1.0, Ball{{0, 0}, 0.9}, {0.25, 0.5, 1.0});
    EXPECT_GE(rep.best_beta, 1.0);
}

TEST(SobolevPoincare, RejectsExponentOutOfRange) {
    const Domain d = unit_square(1.0 / 16);
    const ScalarField v(d.size());
    EXPECT_THROW(sobolev_poincare_check(d, PhiFunction::power(2.0), v, 2.0, std::nullopt), ArgumentError);
    EXPECT_THROW(sobolev_poincare_check(d, PhiFunction::power(2.0), v, 0.5, std::nullopt), ArgumentError);
}

TEST(SobolevPoincare, RandomSmoothFieldsKeepBetaAwayFromZero) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const Domain d = unit_square(1.0 / 32);
    double worst = 1.0;
    for (int seed = 0; seed < 20; ++seed) {
        const double a = coef(rng), b = coef(rng), c = coef(rng);
        const ScalarField v = ScalarField::sample(
            d, [&](const Point& x) { return std::sin(3 * a * x[0]) + b * x[1] * x[1] + c * x[0] * x[1]; });
        for (double r : {0.4, 0.2, 0.1}) {
            const auto rep = sobolev_poincare_check(d, PhiFunction::power(2.0), v, 1.2, Ball{{0.5, 0.5}, r});
            worst = std::min(worst, rep.best_beta);
        }
    }
    EXPECT_GT(worst, 0.0);
}

TEST(GridFile, RoundTrip) {
    const Domain d = Domain::rasterize(Shape::disk({0.2, -0.1}, 0.7), 1.0 / 16);
    const ScalarField f = ScalarField::sample(d, [](const Point& x) { return std::exp(x[0]) - x[1] / 3.0; });
    const auto path = std::filesystem::temp_directory_path() / "gorlicz_roundtrip.grid";
    write_grid(path, d, f);
    const GridFile g = read_grid(path);
    EXPECT_EQ(g.n, 2);
    EXPECT_EQ(g.dims, d.dims());
    EXPECT_EQ(g.h, d.h());
    EXPECT_EQ(g.origin, d.origin());
    ASSERT_EQ(g.values.size(), f.size());
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(g.values[i], f[i]);
    std::filesystem::remove(path);
}

TEST(GridFile, FieldCsvListsActiveNodes) {
    const Domain d = unit_square(0.25);
    const ScalarField f = ScalarField::sample(d, [](const Point& x) { return x[0]; });
    std::ostringstream out;
    write_field_csv(out, d, f);
    std::size_t rows = 0;
    std::string line;
    std::istringstream in(out.str());
    std::getline(in, line);
    EXPECT_EQ(line, "i,j,x,y,kind,value");
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, d.interior_cells().size() + d.halo_cells().size());
}
