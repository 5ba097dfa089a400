#pragma once

// Named verification harnesses and the kernel-versus-oracle comparison.
// Each harness runs a fixed set of checks and reports them as JSON.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "layerheat/inverse_transform.hpp"

namespace layerheat {

struct VerifyCheck {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool passed = false;
};

struct VerifyReport {
    std::string harness;
    std::vector<VerifyCheck> checks;
    std::string details = "{}";  // harness-specific JSON object

    bool passed() const noexcept;
    /// {"harness", "passed", "checks": [{"name", "value", "limit", "passed"}], "details"}
    std::string to_json() const;
};

struct VerifyOptions {
    std::uint64_t seed = 20240611;
    /// Harness parameters as a JSON object; missing keys take defaults.
    std::string params_json = "{}";
    /// Test hook: multiplies every kernel value and gradient by (t - s)^time_power.
    double time_power = 0.0;
};

/// aronson, gradient, qrho, interior, schur, transmission, mass, delta, adjoint.
const std::vector<std::string>& harness_names();

/// Throws InvalidArgument for unknown names or malformed parameters.
VerifyReport run_verify(std::string_view harness, const TwoLayerMedium& medium, const QuadratureConfig& quad,
                        const VerifyOptions& opts = {});

struct OracleComparisonSpec {
    Point source{};
    double elapsed = 0.25;
    double half_width = 4.0;
    std::vector<int> levels{201, 401, 801};  // nodes per dimension
    double max_dt = 0.01;
    double width_factor = 3.0;      // mollifier width in grid spacings
    double bulk_level = 1e-2;       // nodes where Γ >= bulk_level · max Γ
    double exclusion_widths = 3.0;  // drop nodes this many widths from the source
    double interface_band = 0.25;   // |x_n| below this counts as near the interface

    void validate(int dim) const;
};

struct OracleLevel {
    int nodes_per_dim = 0;
    double spacing = 0.0;
    double linf = 0.0;  // relative, over the bulk
    double l2 = 0.0;
    double interface_linf = 0.0;
    double linf_order = 0.0;  // against the previous level; NaN on the first
    double l2_order = 0.0;
    double interface_order = 0.0;
    int bulk_nodes = 0;
};

struct OracleComparison {
    std::vector<OracleLevel> levels;

    std::string to_json() const;
};

/// approximate_kernel against the evaluator on each grid of the refinement study.
OracleComparison compare_oracle(const KernelEvaluator& ev, const OracleComparisonSpec& spec);

}  // namespace layerheat
