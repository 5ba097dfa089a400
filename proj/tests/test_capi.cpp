#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "layerheat/layerheat.h"

namespace {

struct Fixture {
    lh_medium* medium = nullptr;
    lh_evaluator* ev = nullptr;

    Fixture(int dim, std::vector<double> upper, std::vector<double> lower) {
        EXPECT_EQ(lh_medium_create(dim, upper.data(), lower.empty() ? nullptr : lower.data(), &medium), LH_OK);
        EXPECT_EQ(lh_evaluator_create(medium, nullptr, &ev), LH_OK);
    }
    ~Fixture() {
        lh_evaluator_destroy(ev);
        lh_medium_destroy(medium);
    }
};

}  // namespace

TEST(CApi, Defaults) {
    lh_quadrature q;
    lh_quadrature_defaults(&q);
    EXPECT_EQ(q.contour_kind, LH_CONTOUR_DEFORMED_HYPERBOLIC);
    EXPECT_GT(q.target_rel_tol, 0.0);
    EXPECT_LE(q.mu, 0.0);
    EXPECT_STREQ(lh_status_name(LH_OK), "Ok");
    EXPECT_STREQ(lh_status_name(LH_UNSUPPORTED_GEOMETRY), "UnsupportedGeometry");
}

TEST(CApi, MediumErrors) {
    lh_medium* m = nullptr;
    const double bad[] = {1.0, 0.5, 0.2, 1.0};
    EXPECT_EQ(lh_medium_create(2, bad, nullptr, &m), LH_NOT_SYMMETRIC);
    EXPECT_EQ(m, nullptr);
    EXPECT_NE(std::string(lh_last_error()), "");
    const double neg[] = {-1.0};
    EXPECT_EQ(lh_medium_create(1, neg, nullptr, &m), LH_NOT_ELLIPTIC);
    const double one[] = {1.0};
    EXPECT_EQ(lh_medium_create(4, one, nullptr, &m), LH_INVALID_ARGUMENT);
    EXPECT_EQ(lh_medium_create(1, nullptr, nullptr, &m), LH_INVALID_ARGUMENT);
    EXPECT_EQ(lh_medium_create(1, one, nullptr, &m), LH_OK);
    EXPECT_EQ(lh_medium_dim(m), 1);
    EXPECT_STREQ(lh_last_error(), "");
    lh_medium_destroy(m);
}

TEST(CApi, EvalMatchesHeatKernel) {
    Fixture f(1, {1.0}, {});
    const double x = 0.7, y = -0.2, t = 0.4;
    lh_kernel_value v;
    ASSERT_EQ(lh_eval(f.ev, &x, t, &y, 0.0, 1, &v), LH_OK);
    const double expected = std::exp(-(x - y) * (x - y) / (4 * t)) / std::sqrt(4 * std::numbers::pi * t);
    EXPECT_NEAR(v.gamma / expected, 1.0, 1e-8);
    EXPECT_NEAR(v.grad[0] / (-(x - y) / (2 * t) * expected), 1.0, 1e-7);
    EXPECT_GT(lh_evaluator_mu(f.ev), 0.0);
}

TEST(CApi, BatchEqualsSingle) {
    Fixture f(2, {1, 0.2, 0.2, 1}, {2, 0.3, 0.3, 0.5});
    const std::vector<double> xs = {0.3, 0.4, -0.2, -0.5, 0.1, 0.9};
    const std::vector<double> ys = {0.0, 0.2, 0.0, 0.2, 0.1, -0.3};
    const std::vector<double> ts = {0.5, 0.2, 1.0}, ss = {0.0, 0.0, 0.25};
    std::vector<lh_kernel_value> out(3);
    ASSERT_EQ(lh_eval_batch(f.ev, 3, xs.data(), ts.data(), ys.data(), ss.data(), 1, out.data()), LH_OK);
    for (int i = 0; i < 3; ++i) {
        lh_kernel_value v;
        ASSERT_EQ(lh_eval(f.ev, &xs[2 * i], ts[i], &ys[2 * i], ss[i], 1, &v), LH_OK);
        EXPECT_EQ(v.gamma, out[i].gamma);
        EXPECT_EQ(v.grad[1], out[i].grad[1]);
    }
}

TEST(CApi, EvalErrors) {
    Fixture f(2, {1, 0, 0, 1}, {2, 0, 0, 1});
    const double x[] = {0.0, 0.0}, y[] = {0.0, 0.0};
    lh_kernel_value v;
    EXPECT_EQ(lh_eval(f.ev, x, 0.0, y, 0.5, 0, &v), LH_INVALID_ARGUMENT);
    EXPECT_EQ(lh_eval(f.ev, nullptr, 1.0, y, 0.0, 0, &v), LH_INVALID_ARGUMENT);
}

TEST(CApi, GreenFunctions) {
    Fixture f(2, {1, 0, 0, 1.5}, {2, 0, 0, 0.5});
    lh_green* unsupported = nullptr;
    EXPECT_EQ(lh_green_half_space(f.ev, 1, 0.5, 1, &unsupported), LH_UNSUPPORTED_GEOMETRY);
    const double c[] = {0.0, 0.0};
    EXPECT_EQ(lh_green_cube(f.ev, c, 1.0, 2, 4.0, 1e-6, &unsupported), LH_UNSUPPORTED_GEOMETRY);

    lh_green* g = nullptr;
    ASSERT_EQ(lh_green_half_space(f.ev, 0, -1.0, 1, &g), LH_OK);
    lh_green* gs = nullptr;
    ASSERT_EQ(lh_green_adjoint(g, &gs), LH_OK);
    const double x[] = {0.2, 0.3}, y[] = {-0.4, -0.1};
    const double t = 0.6, s = 0.1;
    lh_kernel_value a, b;
    ASSERT_EQ(lh_green_eval_batch(g, 1, x, &t, y, &s, 0, &a), LH_OK);
    ASSERT_EQ(lh_green_eval_batch(gs, 1, y, &s, x, &t, 0, &b), LH_OK);
    EXPECT_EQ(a.gamma, b.gamma);
    EXPECT_GT(a.gamma, 0.0);

    const double face[] = {-1.0, 0.3};
    ASSERT_EQ(lh_green_eval_batch(g, 1, face, &t, y, &s, 0, &a), LH_OK);
    EXPECT_LT(std::abs(a.gamma), 1e-9);
    lh_green_destroy(gs);
    lh_green_destroy(g);
}

TEST(CApi, CubeGreenBoundary) {
    Fixture f(1, {2.0}, {});
    const double c[] = {0.0};
    lh_green* g = nullptr;
    ASSERT_EQ(lh_green_cube(f.ev, c, 1.0, 3, 12.0, 1e-9, &g), LH_OK);
    const double xb[] = {1.0}, y[] = {0.3}, t = 0.3, s = 0.0;
    lh_kernel_value v;
    ASSERT_EQ(lh_green_eval_batch(g, 1, xb, &t, y, &s, 0, &v), LH_OK);
    double tail = 0.0;
    ASSERT_EQ(lh_cube_tail_bound(1, c, 1.0, xb, y, t - s, 3, 12.0, &tail), LH_OK);
    EXPECT_LE(std::abs(v.gamma), tail + 10.0 * v.est_error);
    lh_green_destroy(g);
    EXPECT_EQ(lh_green_cube(f.ev, c, -1.0, 3, 12.0, 1e-9, &g), LH_INVALID_ARGUMENT);
}

TEST(CApi, VerifyReport) {
    Fixture f(1, {1.0}, {});
    char* report = nullptr;
    int passed = 0;
    ASSERT_EQ(lh_verify(f.medium, nullptr, "mass", "{}", 1, 0.0, &report, &passed), LH_OK);
    const nlohmann::json j = nlohmann::json::parse(report);
    lh_string_free(report);
    EXPECT_EQ(passed, 1);
    EXPECT_EQ(j.at("harness"), "mass");
    EXPECT_EQ(lh_verify(f.medium, nullptr, "unknown", "{}", 1, 0.0, &report, &passed), LH_INVALID_ARGUMENT);
}

TEST(CApi, CompareOracleSpecErrors) {
    Fixture f(1, {1.0}, {});
    char* report = nullptr;
    EXPECT_EQ(lh_compare_oracle(f.ev, "{not json", &report), LH_CONFIG);
    EXPECT_EQ(lh_compare_oracle(f.ev, "[]", &report), LH_CONFIG);
    EXPECT_EQ(lh_compare_oracle(f.ev, "{\"levels\": [101, 201]}", &report), LH_INVALID_ARGUMENT);
    ASSERT_EQ(lh_compare_oracle(f.ev, "{\"levels\": [101, 201, 401]}", &report), LH_OK);
    const nlohmann::json j = nlohmann::json::parse(report);
    lh_string_free(report);
    EXPECT_EQ(j.at("levels").size(), 3u);
}
