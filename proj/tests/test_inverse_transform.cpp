#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "layerheat/inverse_transform.hpp"
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

QuadratureConfig config(double tol) {
    QuadratureConfig cfg;
    cfg.target_rel_tol = tol;
    return cfg;
}

const TwoLayerMedium& layered_plane() {
    static const TwoLayerMedium m(tensor({2, 0.5, 0.5, 1}, 2), tensor({1, -0.3, -0.3, 0.5}, 2));
    return m;
}

// Fourth-order central difference of a closed form.
template <class F>
double derivative(F f, double x, double h) {
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

}  // namespace

TEST(QuadratureConfig, Validation) {
    QuadratureConfig cfg;
    cfg.contour_nodes = 4;
    EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::kInvalidArgument);
    cfg = {};
    cfg.target_rel_tol = 1.5;
    EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::kInvalidArgument);
    cfg = {};
    cfg.sigma_abscissa = 0.0;
    EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::kInvalidArgument);
}

TEST(EvalKernel, UnitGaussianAtTheSource) {
    const TwoLayerMedium m = TwoLayerMedium::homogeneous(tensor({1}, 1));
    const KernelValue v = eval_kernel(m, KernelQuery::make(Point{0.3}, 1.0, Point{0.3}, 0.0), config(1e-10));
    EXPECT_NEAR(v.gamma, 0.2820947917738781, 1e-10);
    EXPECT_NEAR(v.grad[0], 0.0, 1e-10);
}

TEST(EvalKernel, RejectsNonPositiveElapsedTime) {
    const TwoLayerMedium m = TwoLayerMedium::homogeneous(tensor({1}, 1));
    EXPECT_NE(code_of([&] { eval_kernel(m, KernelQuery::make(Point{0.3}, 1.0, Point{0.3}, 1.0), config(1e-8)); }),
              ErrorCode::kOk);
}

TEST(EvalKernelProperty, AnisotropicGaussianClosedForm) {
    const DiffusionTensor a = tensor({2, 0.5, 0.5, 1}, 2);
    const KernelEvaluator ev(TwoLayerMedium::homogeneous(a), config(1e-9));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 40; ++i) {
        const double T = std::exp(std::log(0.02) + (std::log(2.0) - std::log(0.02)) * 0.5 * (u(rng) + 1.0));
        const Point y{0.5 * u(rng), 0.5 * u(rng)};
        const Point x{y[0] + 3.0 * std::sqrt(T) * u(rng), y[1] + 3.0 * std::sqrt(T) * u(rng)};
        const KernelValue v = ev.eval(KernelQuery::make(x, T, y, 0.0), false);
        const double want = reference::gaussian(a, x, y, T);
        EXPECT_NEAR(v.gamma, want, 1e-6 * want) << "T=" << T;
    }
}

TEST(EvalKernel, LayeredLineExample) {
    const TwoLayerMedium m(tensor({1}, 1), tensor({4}, 1));
    const KernelValue v = eval_kernel(m, KernelQuery::make(Point{2.0}, 1.0, Point{1.0}, 0.0), config(1e-10));
    // g(x - y) + r g(x + y) with r = (1 - 2)/(1 + 2).
    const double g1 = std::exp(-0.25) / std::sqrt(4.0 * std::numbers::pi);
    const double g3 = std::exp(-9.0 / 4.0) / std::sqrt(4.0 * std::numbers::pi);
    EXPECT_NEAR(v.gamma, g1 - g3 / 3.0, 1e-9);
}

TEST(EvalKernelProperty, LayeredLineAllRegions) {
    const double a = 1.0, b = 4.0;
    const KernelEvaluator ev(TwoLayerMedium(tensor({a}, 1), tensor({b}, 1)), config(1e-10));
    for (double y : {-0.7, 0.4}) {
        for (double x : {-1.5, -0.2, 0.3, 1.1}) {
            for (double T : {0.05, 0.5, 2.0}) {
                const KernelValue v = ev.eval(KernelQuery::make(Point{x}, T, Point{y}, 0.0), true);
                const double want = reference::layered_line(a, b, x, y, T);
                EXPECT_NEAR(v.gamma, want, 1e-8 * want + 1e-14);
                const double dwant = derivative([&](double z) { return reference::layered_line(a, b, z, y, T); }, x,
                                                1e-3 * std::min(std::abs(x), std::sqrt(T)));
                EXPECT_NEAR(v.grad[0], dwant, 1e-5 * std::abs(dwant) + 1e-12);
            }
        }
    }
}

TEST(EvalGradient, GaussianDerivativeExample) {
    const TwoLayerMedium m = TwoLayerMedium::homogeneous(tensor({1}, 1));
    const Point g = eval_gradient(m, KernelQuery::make(Point{1.0}, 1.0, Point{0.0}, 0.0), config(1e-10));
    EXPECT_NEAR(g[0], -0.5 * std::exp(-0.25) / std::sqrt(4.0 * std::numbers::pi), 1e-10);
}

TEST(EvalGradientProperty, MatchesFiniteDifferences) {
    const KernelEvaluator ev(layered_plane(), config(1e-10));
    const std::vector<std::pair<Point, Point>> pts = {
        {Point{0.3, 0.4}, Point{0.0, 0.2}},
        {Point{-0.2, -0.3}, Point{0.1, 0.25}},
        {Point{0.5, 0.6}, Point{-0.1, -0.4}},
        {Point{0.1, -0.5}, Point{0.0, -0.2}},
    };
    const double T = 0.3, h = 1e-4;
    for (const auto& [x, y] : pts) {
        const KernelValue v = ev.eval(KernelQuery::make(x, T, y, 0.0), true);
        for (int i = 0; i < 2; ++i) {
            Point xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const KernelValue vp = ev.eval(KernelQuery::make(xp, T, y, 0.0), false);
            const KernelValue vm = ev.eval(KernelQuery::make(xm, T, y, 0.0), false);
            const double fd = (vp.gamma - vm.gamma) / (2 * h);
            const double gnorm = std::hypot(v.grad[0], v.grad[1]);
            EXPECT_NEAR(v.grad[i], fd, std::max(5e-4 * gnorm, 10.0 * v.grad_est_error));
        }
    }
}

TEST(EvalGradient, VanishesAtTheSourceForHomogeneousMedia) {
    const TwoLayerMedium m = TwoLayerMedium::homogeneous(tensor({2, 0.5, 0.5, 1}, 2));
    const Point g = eval_gradient(m, KernelQuery::make(Point{0.2, 0.3}, 0.5, Point{0.2, 0.3}, 0.0), config(1e-9));
    EXPECT_NEAR(g[0], 0.0, 1e-9);
    EXPECT_NEAR(g[1], 0.0, 1e-9);
}

TEST(EvalBatch, AgreesWithSingleEvaluation) {
    const KernelEvaluator ev(layered_plane(), config(1e-9));
    std::vector<KernelQuery> qs;
    for (int i = 0; i < 5; ++i) qs.push_back(KernelQuery::make(Point{0.1 * i, 0.3}, 0.4, Point{0.0, -0.2}, 0.0));
    qs.push_back(KernelQuery::make(Point{0.2, -0.6}, 0.7, Point{0.0, -0.2}, 0.0));
    const std::vector<KernelValue> vs = ev.eval_batch(qs, true);
    ASSERT_EQ(vs.size(), qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const KernelValue one = ev.eval(qs[i], true);
        EXPECT_NEAR(vs[i].gamma, one.gamma, 1e-9 * one.gamma);
    }
}

TEST(ChooseContour, VerticalBromwichHasFixedAbscissa) {
    QuadratureConfig cfg = config(1e-8);
    cfg.contour_kind = ContourKind::kVerticalBromwich;
    cfg.sigma_abscissa = 1.0;
    cfg.contour_nodes = 64;
    const TwoLayerMedium m = TwoLayerMedium::homogeneous(tensor({1}, 1));
    const Contour c = choose_contour(m, KernelQuery::make(Point{0.5}, 1.0, Point{0.0}, 0.0), cfg);
    ASSERT_GE(c.nodes.size(), 64u);
    for (const ContourNode& nd : c.nodes) EXPECT_DOUBLE_EQ(nd.tau.real(), 1.0);
}

TEST(ChooseContour, HyperbolaBendsIntoTheLeftHalfPlane) {
    const TwoLayerMedium& m = layered_plane();
    const Contour c = choose_contour(m, KernelQuery::make(Point{0.1, 0.4}, 1.0, Point{0.0, 0.2}, 0.0), config(1e-8));
    std::vector<ContourNode> upper;
    for (const ContourNode& nd : c.nodes) {
        if (nd.tau.imag() > 0.0) upper.push_back(nd);
    }
    std::sort(upper.begin(), upper.end(), [](const auto& a, const auto& b) { return a.tau.imag() < b.tau.imag(); });
    ASSERT_GT(upper.size(), 8u);
    for (std::size_t i = 1; i < upper.size(); ++i) EXPECT_LT(upper[i].tau.real(), upper[i - 1].tau.real());
    EXPECT_LT(upper.back().tau.real(), 0.0);
}

TEST(ChooseContourProperty, NodesStayInTheAnalyticityDomain) {
    const TwoLayerMedium& m = layered_plane();
    const KernelEvaluator ev(m, config(1e-8));
    for (double T : {0.01, 0.3, 3.0}) {
        for (double xi2 : {0.0, 1.0, 100.0}) {
            const Contour c = ev.contour(KernelQuery::make(Point{0.1, 0.4}, T, Point{0.0, 0.2}, 0.0), xi2);
            for (const ContourNode& nd : c.nodes) {
                const SpectralPoint sp = SpectralPoint::from_tau({cplx(std::sqrt(xi2), 0.0)}, 1, nd.tau);
                EXPECT_TRUE(in_analyticity_domain(sp, ev.mu())) << "tau=" << nd.tau;
            }
        }
    }
}

TEST(EvalKernelProperty, ImaginaryResidualAndPositivity) {
    QuadratureConfig cfg = config(1e-8);
    cfg.use_symmetry = false;
    const KernelEvaluator ev(layered_plane(), cfg);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 30; ++i) {
        const double T = 0.05 + 0.95 * 0.5 * (u(rng) + 1.0);
        const Point y{0.5 * u(rng), 0.5 * u(rng)};
        const Point x{y[0] + 2.0 * std::sqrt(T) * u(rng), 0.8 * u(rng)};
        const KernelValue v = ev.eval(KernelQuery::make(x, T, y, 0.0), false);
        EXPECT_LE(v.imag_residual, 10.0 * v.est_error + 1e-300);
        EXPECT_GT(v.gamma, -10.0 * v.est_error);
    }
}

TEST(EvalKernelProperty, PdeResidualIsSecondOrder) {
    const TwoLayerMedium& m = layered_plane();
    const KernelEvaluator ev(m, config(1e-12));
    const Point y{0.0, 0.3};
    const double T = 0.5;
    auto residual = [&](const Point& x, double h) {
        const DiffusionTensor& a = x[1] > 0.0 ? m.upper() : m.lower();
        auto G = [&](double d0, double d1, double dt) {
            return ev.eval(KernelQuery::make(Point{x[0] + d0, x[1] + d1}, T + dt, y, 0.0), false).gamma;
        };
        const double c = G(0, 0, 0);
        const double gt = (G(0, 0, h * h) - G(0, 0, -h * h)) / (2 * h * h);
        const double g00 = (G(h, 0, 0) - 2 * c + G(-h, 0, 0)) / (h * h);
        const double g11 = (G(0, h, 0) - 2 * c + G(0, -h, 0)) / (h * h);
        const double g01 = (G(h, h, 0) - G(h, -h, 0) - G(-h, h, 0) + G(-h, -h, 0)) / (4 * h * h);
        return gt - (a(0, 0) * g00 + 2 * a(0, 1) * g01 + a(1, 1) * g11);
    };
    for (const Point& x : {Point{0.4, 0.8}, Point{-0.3, -0.6}}) {
        const double r1 = std::abs(residual(x, 0.04));
        const double r2 = std::abs(residual(x, 0.02));
        EXPECT_GT(std::log2(r1 / r2), 1.8) << r1 << " " << r2;
    }
}

TEST(EvalKernelProperty, InterfaceContinuityAndFlux) {
    const TwoLayerMedium& m = layered_plane();
    const KernelEvaluator ev(m, config(1e-10));
    const Point y{0.0, 0.3};
    const double T = 0.4, eps = 1e-12;
    for (double x0 : {-0.4, 0.0, 0.5}) {
        const KernelValue up = ev.eval(KernelQuery::make(Point{x0, eps}, T, y, 0.0), true);
        const KernelValue dn = ev.eval(KernelQuery::make(Point{x0, -eps}, T, y, 0.0), true);
        EXPECT_NEAR(up.gamma, dn.gamma, 1e-8 * up.gamma);
        const double fu = m.upper()(1, 0) * up.grad[0] + m.upper()(1, 1) * up.grad[1];
        const double fl = m.lower()(1, 0) * dn.grad[0] + m.lower()(1, 1) * dn.grad[1];
        EXPECT_NEAR(fu, fl, 1e-6 * (std::abs(fu) + std::abs(up.grad[0])));
    }
}

TEST(EvalKernelProperty, OneSidedFluxJumpIsFirstOrder) {
    const double a = 1.0, b = 4.0;
    const KernelEvaluator ev(TwoLayerMedium(tensor({a}, 1), tensor({b}, 1)), config(1e-12));
    const double y = 0.3, T = 0.5, eps = 1e-13;
    auto G = [&](double x) { return ev.eval(KernelQuery::make(Point{x}, T, Point{y}, 0.0), false).gamma; };
    const double g0p = G(eps), g0m = G(-eps);
    EXPECT_NEAR(g0p, g0m, 1e-9 * g0p);
    auto jump = [&](double h) { return std::abs(a * (G(h) - g0p) / h - b * (g0m - G(-h)) / h); };
    const double j1 = jump(0.02), j2 = jump(0.01), j3 = jump(0.005);
    EXPECT_NEAR(std::log2(j1 / j2), 1.0, 0.1);
    EXPECT_NEAR(std::log2(j2 / j3), 1.0, 0.1);
}

TEST(EvalKernelProperty, ParabolicScaling) {
    const KernelEvaluator ev(TwoLayerMedium::homogeneous(tensor({2, 0.5, 0.5, 1}, 2)), config(1e-10));
    const double lambda = 2.0;
    const Point x{0.3, -0.2}, y{-0.1, 0.25};
    const double T = 0.3;
    const double base = ev.eval(KernelQuery::make(x, T, y, 0.0), false).gamma;
    const double scaled = ev.eval(KernelQuery::make(Point{lambda * x[0], lambda * x[1]}, lambda * lambda * T,
                                                    Point{lambda * y[0], lambda * y[1]}, 0.0),
                                  false)
                              .gamma;
    EXPECT_NEAR(scaled, base / (lambda * lambda), 1e-9 * base);
}

TEST(MassIntegral, IdentityAndLayeredLine) {
    const QuadratureConfig cfg = config(1e-9);
    EXPECT_NEAR(mass_integral(TwoLayerMedium::homogeneous(tensor({1}, 1)), 1.0, Point{0.2}, cfg), 1.0, 1e-4);
    const TwoLayerMedium lay(tensor({1}, 1), tensor({4}, 1));
    for (double T : {0.01, 0.3, 2.0}) EXPECT_NEAR(mass_integral(lay, T, Point{0.3}, cfg), 1.0, 1e-4) << T;
}

TEST(MassIntegral, LayeredPlane) {
    EXPECT_NEAR(mass_integral(layered_plane(), 0.2, Point{0.1, 0.15}, config(1e-8)), 1.0, 1e-4);
}

TEST(DeltaRecovery, ConstantGaussianBumpAndDisjointSupport) {
    const KernelEvaluator ev(TwoLayerMedium(tensor({1}, 1), tensor({4}, 1)), config(1e-9));
    const Point y{0.4};
    const std::vector<double> ts = {0.1, 0.03, 0.01, 0.003, 0.001};

    for (double v : delta_recovery(ev, y, [](const Point&) { return 1.0; }, ts)) EXPECT_NEAR(v, 1.0, 1e-4);

    const auto bump = [&](const Point& x) { return std::exp(-(x[0] - y[0]) * (x[0] - y[0]) / 0.02); };
    const std::vector<double> b = delta_recovery(ev, y, bump, ts);
    for (std::size_t i = 1; i < b.size(); ++i) EXPECT_GT(b[i], b[i - 1]);
    EXPECT_NEAR(b.back(), 1.0, 0.1);

    const auto below = [](const Point& x) {
        const double r = x[0] + 0.5;
        return std::abs(r) < 0.3 ? std::exp(-1.0 / (1.0 - r * r / 0.09)) : 0.0;
    };
    const std::vector<double> d = delta_recovery(ev, y, below, ts);
    EXPECT_LT(std::abs(d.back()), 1e-12);
    for (std::size_t i = 1; i < d.size(); ++i) EXPECT_LE(std::abs(d[i]), std::abs(d[i - 1]) + 1e-15);
}
