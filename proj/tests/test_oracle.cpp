#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "layerheat/oracle.hpp"
#include "reference_kernels.hpp"

using namespace layerheat;

namespace {

DiffusionTensor tensor(std::vector<double> v, int n) { return DiffusionTensor::validate(v, n); }

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::kOk;
}

Point pt(double a, double b = 0.0) { return Point{a, b}; }

// Largest relative deviation over nodes where the reference exceeds `level` of its peak.
template <class Ref>
double bulk_rel_error(const GridFunction& u, std::size_t slice, Ref&& ref, double level = 1e-2) {
    const Grid& g = u.grid();
    double peak = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) peak = std::max(peak, ref(g.node(i)));
    double worst = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const double r = ref(g.node(i));
        if (r < level * peak) continue;
        worst = std::max(worst, std::abs(u.values(slice)[i] - r) / r);
    }
    return worst;
}

}  // namespace

TEST(Grid, ValidatesParameters) {
    const Cube box = Cube::make(1.0, {});
    EXPECT_EQ(code_of([&] { Grid::make(box, 1, 15, 0.01, 0, 1); }), ErrorCode::kInvalidArgument);
    EXPECT_EQ(code_of([&] { Grid::make(box, 3, 17, 0.01, 0, 1); }), ErrorCode::kUnsupportedDimension);
    EXPECT_EQ(code_of([&] { Grid::make(box, 1, 17, 0.2, 0, 1); }), ErrorCode::kInvalidArgument);
    EXPECT_EQ(code_of([&] { Grid::make(box, 1, 17, 0.01, 1, 1); }), ErrorCode::kInvalidArgument);
    const Grid g = Grid::make(box, 2, 17, 0.03, 0, 1);
    EXPECT_EQ(g.node_count(), 289u);
    EXPECT_DOUBLE_EQ(g.spacing(), 0.125);
    EXPECT_EQ(g.steps(), 34);
    EXPECT_NEAR(g.steps() * g.step_size(), 1.0, 1e-15);
    EXPECT_EQ(g.node(18), pt(-0.875, -0.875));
    EXPECT_TRUE(g.on_boundary(16));
    EXPECT_FALSE(g.on_boundary(18));
}

TEST(Fdm, ZeroInitialStaysZero) {
    const TwoLayerMedium m(tensor({2, 0.5, 0.5, 1}, 2), tensor({1, -0.3, -0.3, 0.5}, 2));
    const Grid g = Grid::make(Cube::make(1.0, {}), 2, 17, 0.05, 0, 0.5);
    const GridFunction zero = GridFunction::sample(g, [](const Point&) { return 0.0; });
    for (const BoundaryCondition bc : {BoundaryCondition::dirichlet0(), BoundaryCondition::none()}) {
        const GridFunction u = fdm_solve(m, g, zero, bc);
        for (double v : u.last()) EXPECT_EQ(v, 0.0);
    }
}

TEST(Fdm, InterfaceMustBeAGridPlane) {
    const TwoLayerMedium m(tensor({1}, 1), tensor({4}, 1));
    const Grid off = Grid::make(Cube::make(1.0, {0.03}), 1, 17, 0.01, 0, 0.1);
    const GridFunction zero = GridFunction::sample(off, [](const Point&) { return 0.0; });
    EXPECT_EQ(code_of([&] { fdm_solve(m, off, zero, BoundaryCondition::dirichlet0()); }),
              ErrorCode::kInterfaceNotOnGrid);
    const TwoLayerMedium hom = TwoLayerMedium::homogeneous(tensor({1}, 1));
    EXPECT_NO_THROW(fdm_solve(hom, off, zero, BoundaryCondition::dirichlet0()));
}

TEST(Fdm, IdentityGaussianFollowsHeatFlow) {
    const DiffusionTensor id = tensor({1, 0, 0, 1}, 2);
    const Grid g = Grid::make(Cube::make(4.0, {}), 2, 81, 0.01, 0.0, 0.4);
    const double t_init = 0.2;
    const GridFunction u0 = GridFunction::sample(g, [&](const Point& x) {
        return reference::gaussian(id, x, {}, t_init);
    });
    const GridFunction u = fdm_solve(TwoLayerMedium::homogeneous(id), g, u0, BoundaryCondition::dirichlet0(),
                                     {TimeScheme::kCrankNicolson});
    const double err = bulk_rel_error(u, 1, [&](const Point& x) { return reference::gaussian(id, x, {}, 0.6); });
    EXPECT_LE(err, 0.01);
}

TEST(Fdm, ManufacturedSolutionConvergesAtSecondOrder) {
    const DiffusionTensor a = tensor({1.3, 0.4, 0.4, 0.7}, 2);
    const double lambda = 2.0, pi = std::numbers::pi;
    auto exact = [&](const Point& x, double t) { return std::sin(pi * x[0]) * std::exp(-lambda * t) * (1.0 + x[1]); };
    SolveOptions opts{TimeScheme::kCrankNicolson};
    // u_t - ∇·A∇u for the exact solution above.
    opts.forcing = [&](const Point& x, double t) {
        const double e = std::exp(-lambda * t);
        return (-lambda + a(0, 0) * pi * pi) * std::sin(pi * x[0]) * e * (1.0 + x[1]) -
               2.0 * a(0, 1) * pi * std::cos(pi * x[0]) * e;
    };
    std::vector<double> errs;
    for (int N : {17, 33, 65}) {
        const Grid g = Grid::make(Cube::make(1.0, {}), 2, N, 0.5 * 2.0 / (N - 1), 0.0, 0.5);
        const GridFunction u0 = GridFunction::sample(g, [&](const Point& x) { return exact(x, 0.0); });
        const GridFunction u = fdm_solve(TwoLayerMedium::homogeneous(a), g, u0, {BoundaryKind::kDirichlet, exact}, opts);
        double err = 0.0;
        for (std::size_t i = 0; i < g.node_count(); ++i) err = std::max(err, std::abs(u.last()[i] - exact(g.node(i), 0.5)));
        errs.push_back(err);
    }
    for (std::size_t k = 1; k < errs.size(); ++k) EXPECT_GE(std::log2(errs[k - 1] / errs[k]), 1.9) << k;
}

TEST(ApproximateKernel, MassConservedEachStep) {
    const TwoLayerMedium m(tensor({2, 0.5, 0.5, 1}, 2), tensor({1, -0.3, -0.3, 0.5}, 2));
    const Grid g = Grid::make(Cube::make(1.5, {}), 2, 31, 0.05, 0.0, 1.0);
    SolveOptions opts;
    opts.store_every = 1;
    const GridFunction u = approximate_kernel(m, pt(0.2, -0.3), 3.0 * g.spacing(), g, BoundaryCondition::none(), opts);
    ASSERT_EQ(u.slices(), static_cast<std::size_t>(g.steps() + 1));
    EXPECT_NEAR(discrete_mass(g, u.values(0), BoundaryKind::kNone), 1.0, 1e-14);
    for (std::size_t k = 1; k < u.slices(); ++k) {
        EXPECT_LE(std::abs(discrete_mass(g, u.values(k), BoundaryKind::kNone) -
                           discrete_mass(g, u.values(k - 1), BoundaryKind::kNone)),
                  1e-10);
    }
}

TEST(ApproximateKernel, IdentityMatchesGaussianInBulk) {
    const DiffusionTensor id1 = tensor({1}, 1);
    const Grid g1 = Grid::make(Cube::make(5.0, {}), 1, 1001, 0.005, 0.0, 0.5);
    const GridFunction u1 = approximate_kernel(TwoLayerMedium::homogeneous(id1), pt(0.3), 3.0 * g1.spacing(), g1,
                                              BoundaryCondition::none(), {TimeScheme::kCrankNicolson});
    EXPECT_LE(bulk_rel_error(u1, 1, [&](const Point& x) { return reference::gaussian(id1, x, pt(0.3), 0.5); }), 0.01);

    const DiffusionTensor id2 = tensor({1, 0, 0, 1}, 2);
    const Grid g2 = Grid::make(Cube::make(3.5, {}), 2, 351, 0.01, 0.0, 0.5);
    const GridFunction u2 = approximate_kernel(TwoLayerMedium::homogeneous(id2), pt(0.1, -0.2),
                                              3.0 * g2.spacing(), g2, BoundaryCondition::none(),
                                              {TimeScheme::kCrankNicolson});
    EXPECT_LE(bulk_rel_error(u2, 1, [&](const Point& x) { return reference::gaussian(id2, x, pt(0.1, -0.2), 0.5); },
                             0.1),
              0.01);
}

TEST(ApproximateKernel, LayeredLineMatchesClosedForm) {
    const TwoLayerMedium m(tensor({1}, 1), tensor({4}, 1));
    const Grid g = Grid::make(Cube::make(8.0, {}), 1, 1601, 0.005, 0.0, 0.5);
    for (double y : {0.5, -0.4}) {
        const GridFunction u = approximate_kernel(m, pt(y), 3.0 * g.spacing(), g, BoundaryCondition::none(),
                                                  {TimeScheme::kCrankNicolson});
        EXPECT_LE(bulk_rel_error(u, 1, [&](const Point& x) { return reference::layered_line(1, 4, x[0], y, 0.5); }),
                  0.01)
            << y;
    }
}

TEST(ApproximateKernel, RefinementImprovesLayeredError) {
    const TwoLayerMedium m(tensor({1}, 1), tensor({4}, 1));
    double prev = INFINITY;
    for (int N : {201, 401, 801}) {
        const Grid g = Grid::make(Cube::make(8.0, {}), 1, N, 0.005, 0.0, 0.5);
        const GridFunction u =
            approximate_kernel(m, pt(0.5), 3.0 * g.spacing(), g, BoundaryCondition::none(), {TimeScheme::kCrankNicolson});
        const double err = bulk_rel_error(u, 1, [&](const Point& x) { return reference::layered_line(1, 4, x[0], 0.5, 0.5); });
        EXPECT_LT(err, 0.6 * prev);
        prev = err;
    }
}

TEST(ApproximateKernel, WidthBelowTwoSpacingsRejected) {
    const Grid g = Grid::make(Cube::make(1.0, {}), 1, 17, 0.01, 0.0, 0.1);
    EXPECT_EQ(code_of([&] { approximate_kernel(TwoLayerMedium::homogeneous(tensor({1}, 1)), pt(0), 0.1, g); }),
              ErrorCode::kInvalidArgument);
}

TEST(Sampler, ConstantBoundaryObeysMaximumPrinciple) {
    const TwoLayerMedium m(tensor({2, 0, 0, 1}, 2), tensor({0.5, 0, 0, 3}, 2));
    const Grid g = Grid::make(Cube::make(1.0, {}), 2, 33, 0.05, 0.0, 2.0);
    SolveOptions opts;
    opts.store_every = 4;
    const GridFunction u = interior_solution_sampler(m, [](const Point&, double) { return 1.0; }, g, opts);
    for (std::size_t k = 0; k < u.slices(); ++k) {
        for (double v : u.values(k)) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
    EXPECT_GT(*std::min_element(u.last().begin(), u.last().end()), 0.9);
}

TEST(Sampler, RandomBoundaryIsReproducible) {
    const TwoLayerMedium m(tensor({2, 0.5, 0.5, 1}, 2), tensor({1, -0.3, -0.3, 0.5}, 2));
    const Grid g = Grid::make(Cube::make(1.0, {}), 2, 33, 0.05, 0.0, 0.5);
    const GridFunction a = interior_solution_sampler(m, random_smooth_boundary(42, 2), g);
    const GridFunction b = interior_solution_sampler(m, random_smooth_boundary(42, 2), g);
    const GridFunction c = interior_solution_sampler(m, random_smooth_boundary(43, 2), g);
    EXPECT_EQ(std::memcmp(a.last().data(), b.last().data(), a.last().size() * sizeof(double)), 0);
    EXPECT_NE(a.last(), c.last());
}

TEST(Sampler, LinearDataReachesSteadyState) {
    const TwoLayerMedium m = TwoLayerMedium::homogeneous(tensor({1, 0, 0, 1}, 2));
    const Grid g = Grid::make(Cube::make(1.0, {}), 2, 17, 0.125, 0.0, 10.0);
    const GridFunction u = interior_solution_sampler(m, [](const Point& x, double) { return x[0]; }, g);
    for (std::size_t i = 0; i < g.node_count(); ++i) EXPECT_NEAR(u.last()[i], g.node(i)[0], 1e-12);
}

TEST(GridFunction, InterpolatesLinearDataExactly) {
    const Grid g = Grid::make(Cube::make(1.0, {0.5, 0.0}), 2, 17, 0.1, 0.0, 1.0);
    const GridFunction f = GridFunction::sample(g, [](const Point& x) { return 2.0 * x[0] - x[1] + 0.25; });
    EXPECT_NEAR(f.interpolate(0, pt(0.333, -0.71)), 2 * 0.333 + 0.71 + 0.25, 1e-14);
    EXPECT_EQ(code_of([&] { f.interpolate(0, pt(2.0, 0.0)); }), ErrorCode::kInvalidArgument);
}

TEST(GridFunction, CsvRoundTrip) {
    const Grid g = Grid::make(Cube::make(1.0, {}), 1, 17, 0.1, 0.0, 0.3);
    const GridFunction u = fdm_solve(TwoLayerMedium::homogeneous(tensor({1}, 1)), g,
                                     GridFunction::sample(g, [](const Point& x) { return std::cos(x[0]); }),
                                     BoundaryCondition::dirichlet0());
    const auto path = std::filesystem::temp_directory_path() / "layerheat_oracle_test.csv";
    u.write_csv(path);
    std::ifstream in(path);
    std::string header, line;
    std::getline(in, header);
    EXPECT_EQ(header, "x1,t,value");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, u.slices() * g.node_count());
    EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    std::filesystem::remove(path);
}
