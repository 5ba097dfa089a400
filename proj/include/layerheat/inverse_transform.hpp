#pragma once

// Numerical inversion of the partial Fourier (ξ') and Laplace (τ) transforms.
//
// Each exponential summand of the region symbol is inverted separately. The
// Laplace integral runs over a hyperbola z(u) = ζ(1 + sin(iu - α)) shifted by
// τ = z - μ|ξ'|², which keeps every node inside L_μ; the Fourier integral is
// a trapezoidal sum whose step is matched to the spatial offset so that the
// aliased images are negligible. Errors are estimated by comparing the full
// rule against its even-index subset in both variables.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "layerheat/medium.hpp"
#include "layerheat/symbols.hpp"

namespace layerheat {

enum class ContourKind : int { kVerticalBromwich = 0, kDeformedHyperbolic = 1 };

struct QuadratureConfig {
    ContourKind contour_kind = ContourKind::kDeformedHyperbolic;
    double sigma_abscissa = 1.0;
    int contour_nodes = 64;             // minimum half-contour node count
    double xi_truncation_radius = 0.0;  // 0: adaptive outward marching
    int xi_nodes_per_dim = 16;          // minimum nodes per half axis
    double target_rel_tol = 1e-9;
    std::optional<double> mu;           // certified when absent
    int max_refinements = 3;
    bool use_symmetry = true;           // false also computes the imaginary residual

    void validate() const;
};

struct KernelValue {
    double gamma = 0.0;
    Point grad{};
    double est_error = 0.0;
    double grad_est_error = 0.0;
    double imag_residual = 0.0;
    Region region = Region::kR11;
};

struct ContourNode {
    cplx tau;
    cplx weight;  // includes h·z'(u)/(2πi)
};

struct Contour {
    std::vector<ContourNode> nodes;
    double xi_norm2 = 0.0;
};

class KernelEvaluator {
public:
    KernelEvaluator(TwoLayerMedium medium, QuadratureConfig cfg);

    KernelValue eval(const KernelQuery& q, bool gradient = true) const;

    /// Queries sharing (x_n, y_n, t - s) reuse the transform-domain columns.
    /// Results are returned in input order.
    std::vector<KernelValue> eval_batch(std::span<const KernelQuery> qs, bool gradient = true) const;

    const TwoLayerMedium& medium() const noexcept { return medium_; }
    const QuadratureConfig& config() const noexcept { return cfg_; }
    double mu() const noexcept { return mu_; }

    /// Laplace nodes for the first symbol term of q's region at |ξ'|² = xi_norm2.
    Contour contour(const KernelQuery& q, double xi_norm2 = 0.0, int refinement = 0) const;

private:
    TwoLayerMedium medium_;
    QuadratureConfig cfg_;
    double mu_;
};

KernelValue eval_kernel(const TwoLayerMedium& medium, const KernelQuery& q, const QuadratureConfig& cfg);

Point eval_gradient(const TwoLayerMedium& medium, const KernelQuery& q, const QuadratureConfig& cfg);

/// Throws ContourLeavesDomain if any emitted node falls outside L_μ.
Contour choose_contour(const TwoLayerMedium& medium, const KernelQuery& q, const QuadratureConfig& cfg,
                       double xi_norm2 = 0.0);

/// ∫ Γ(x, t; y, s) dx over a box sized by the Gaussian tail.
double mass_integral(const KernelEvaluator& ev, double elapsed, const Point& y);
double mass_integral(const TwoLayerMedium& medium, double elapsed, const Point& y, const QuadratureConfig& cfg);

using TestFunction = std::function<double(const Point&)>;

/// ∫ Γ(x, s + T; y, s) φ(x) dx for each T in `elapsed`.
std::vector<double> delta_recovery(const KernelEvaluator& ev, const Point& y, const TestFunction& phi,
                                   std::span<const double> elapsed);

}  // namespace layerheat
