#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "layerheat/verify.hpp"

using namespace layerheat;
using nlohmann::json;

namespace {

TwoLayerMedium medium(std::vector<double> a, std::vector<double> b, int n) {
    return TwoLayerMedium(DiffusionTensor::validate(a, n), DiffusionTensor::validate(b, n));
}

const TwoLayerMedium& identity1() {
    static const TwoLayerMedium m = medium({1.0}, {1.0}, 1);
    return m;
}

const TwoLayerMedium& layered1() {
    static const TwoLayerMedium m = medium({1.0}, {4.0}, 1);
    return m;
}

VerifyReport run(std::string_view name, const TwoLayerMedium& m, std::string params = "{}", double time_power = 0.0) {
    VerifyOptions o;
    o.params_json = std::move(params);
    o.time_power = time_power;
    return run_verify(name, m, QuadratureConfig{}, o);
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::kOk;
}

const VerifyCheck* find(const VerifyReport& r, const std::string& prefix) {
    for (const VerifyCheck& c : r.checks) {
        if (c.name.rfind(prefix, 0) == 0) return &c;
    }
    return nullptr;
}

}  // namespace

TEST(Verify, HarnessNames) {
    const auto& names = harness_names();
    EXPECT_EQ(names.size(), 9u);
    EXPECT_EQ(code_of([] { run("nonsense", identity1()); }), ErrorCode::kInvalidArgument);
}

TEST(Verify, MalformedParameters) {
    EXPECT_EQ(code_of([] { run("mass", identity1(), "[1,2]"); }), ErrorCode::kInvalidArgument);
    EXPECT_EQ(code_of([] { run("mass", identity1(), "{\"tolerance\": \"tight\"}"); }), ErrorCode::kInvalidArgument);
    EXPECT_EQ(code_of([] { run("mass", identity1(), "{oops"); }), ErrorCode::kInvalidArgument);
}

TEST(Verify, ReportJson) {
    const VerifyReport r = run("mass", identity1());
    const json j = json::parse(r.to_json());
    EXPECT_EQ(j.at("harness"), "mass");
    EXPECT_EQ(j.at("passed").get<bool>(), r.passed());
    ASSERT_EQ(j.at("checks").size(), r.checks.size());
    for (const json& c : j.at("checks")) {
        EXPECT_TRUE(c.contains("name") && c.contains("value") && c.contains("limit") && c.contains("passed"));
    }
    EXPECT_TRUE(j.at("details").is_object());
}

TEST(Verify, MassIdentityAndLayered) {
    EXPECT_TRUE(run("mass", identity1()).passed());
    EXPECT_TRUE(run("mass", layered1()).passed());
}

TEST(Verify, MassToleranceIsHonoured) {
    // No quadrature reaches 1e-30 of the unit mass.
    EXPECT_FALSE(run("mass", layered1(), "{\"tolerance\": 1e-30}").passed());
}

TEST(Verify, TransmissionLayered) { EXPECT_TRUE(run("transmission", layered1()).passed()); }

TEST(Verify, DeltaLayered) { EXPECT_TRUE(run("delta", layered1()).passed()); }

TEST(Verify, AronsonIdentity) {
    const VerifyReport r = run("aronson", identity1(), "{\"samples\": 200}");
    EXPECT_TRUE(r.passed());
    const VerifyCheck* slope = find(r, "scaling slope");
    ASSERT_NE(slope, nullptr);
    EXPECT_NEAR(slope->value, -0.5, 0.01);
}

TEST(Verify, TimePerturbationBreaksScaling) {
    const VerifyReport r = run("aronson", identity1(), "{\"samples\": 200}", 1.0);
    EXPECT_FALSE(r.passed());
    const VerifyCheck* slope = find(r, "scaling slope");
    ASSERT_NE(slope, nullptr);
    EXPECT_FALSE(slope->passed);
    EXPECT_NEAR(slope->value, 0.5, 0.05);
}

TEST(Verify, SchurLayered) { EXPECT_TRUE(run("schur", layered1(), "{\"trials\": 20, \"points\": 60}").passed()); }

TEST(Verify, AdjointLayered) { EXPECT_TRUE(run("adjoint", layered1(), "{\"samples\": 10}").passed()); }

TEST(Verify, InteriorIdentity) {
    const VerifyReport r = run("interior", identity1());
    EXPECT_TRUE(r.passed());
    const VerifyCheck* slope = find(r, "rho scaling slope");
    ASSERT_NE(slope, nullptr);
    EXPECT_NEAR(slope->value, -2.5, 0.25);
}

TEST(Verify, QRhoLayeredSmall) {
    EXPECT_TRUE(run("qrho", layered1(), "{\"samples\": 30, \"training\": 60}").passed());
}

TEST(CompareOracle, IdentityLineConverges) {
    const auto ev = std::make_shared<const KernelEvaluator>(identity1(), QuadratureConfig{});
    OracleComparisonSpec spec;
    spec.source[0] = 0.1;
    spec.levels = {201, 401, 801, 1601};
    const OracleComparison r = compare_oracle(*ev, spec);
    ASSERT_EQ(r.levels.size(), 4u);
    for (std::size_t i = 1; i < r.levels.size(); ++i) {
        EXPECT_LT(r.levels[i].linf, r.levels[i - 1].linf);
        EXPECT_GT(r.levels[i].l2_order, 1.5);
    }
    EXPECT_LT(r.levels.back().linf, 0.01);
    EXPECT_TRUE(std::isnan(r.levels.front().linf_order));
    const json j = json::parse(r.to_json());
    EXPECT_TRUE(j["levels"][0]["linf_order"].is_null());
}

TEST(CompareOracle, SpecValidation) {
    const auto ev = std::make_shared<const KernelEvaluator>(identity1(), QuadratureConfig{});
    OracleComparisonSpec spec;
    spec.levels = {101, 201};
    EXPECT_EQ(code_of([&] { compare_oracle(*ev, spec); }), ErrorCode::kInvalidArgument);
    spec.levels = {101, 201, 401};
    spec.source[0] = 5.0;
    EXPECT_EQ(code_of([&] { compare_oracle(*ev, spec); }), ErrorCode::kInvalidArgument);
    const TwoLayerMedium m3 = medium({1, 0, 0, 0, 1, 0, 0, 0, 1}, {1, 0, 0, 0, 1, 0, 0, 0, 1}, 3);
    const auto ev3 = std::make_shared<const KernelEvaluator>(m3, QuadratureConfig{});
    EXPECT_EQ(code_of([&] { compare_oracle(*ev3, OracleComparisonSpec{}); }), ErrorCode::kUnsupportedDimension);
}
