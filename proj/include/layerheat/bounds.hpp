#pragma once

// Numerical checks of the Gaussian bounds, the Q_ρ estimate, the interior
// gradient estimate and the Schur test. The theorems only assert that some
// finite constant exists, so each harness fits the smallest constant that
// works on its samples and reports how it scales.

#include <cstdint>
#include <string>
#include <vector>

#include "layerheat/images.hpp"
#include "layerheat/oracle.hpp"

namespace layerheat {

struct SpaceTimePoint {
    Point x{};
    double t = 0.0;
    Point y{};
    double s = 0.0;
};

struct BoundFitReport {
    double fitted_constant = 0.0;
    SpaceTimePoint worst_point;
    int sample_count = 0;
    double exponent_slope = 0.0;
    double residual = 0.0;  // RMS residual of the log-log regression

    /// {"constant", "slope", "samples", "worst_point", "residual"}
    std::string to_json() const;
};

/// t - s log-uniform in [t_min, t_max], y uniform in the box of half-width
/// source_spread around source_center, x = y + r·e with r uniform in
/// [0, radius_factor·sqrt(t - s)] and e a uniform random direction.
struct SampleSpec {
    int count = 1000;
    std::uint64_t seed = 20240611;
    double t_min = 1e-2;
    double t_max = 1.0;
    double radius_factor = 4.0;
    Point source_center{};
    double source_spread = 0.5;
    int slope_points = 12;  // times used for the scaling regression

    void validate() const;
};

std::vector<SpaceTimePoint> draw_samples(const SampleSpec& spec, int dim);

/// Smallest C with v ≤ C·T^{-p}·exp(-r²/(C·T)); the right side increases with C.
double minimal_gaussian_constant(double value, double r2, double elapsed, double power);

/// Smallest C with values[i] ≤ C·T^{-power}·exp(-|x-y|²/(C·T)) for every sample; the
/// maximum of the per-sample constants, so fits over subsets never exceed it.
BoundFitReport fit_gaussian_bound(const std::vector<SpaceTimePoint>& samples, const std::vector<double>& values,
                                  double power, int dim);

/// Γ ≤ C (t-s)^{-n/2} exp(-|x-y|²/(C(t-s))); slope of log Γ(y, t; y, 0) against log t.
BoundFitReport fit_aronson(const Green& kernel, const SampleSpec& spec);

/// |∇Γ| ≤ C (t-s)^{-(n+1)/2} exp(-|x-y|²/(C(t-s))); slope of max_x |∇Γ| against log t.
BoundFitReport fit_gradient_bound(const Green& kernel, const SampleSpec& spec);

/// Q_ρ(x₀, t₀) = B_ρ(x₀) × (t₀ - ρ², t₀).
struct ParabolicCylinder {
    Point center{};
    double t0 = 0.0;
    double radius = 0.0;

    /// ρ = ¼ sqrt(|x₀ - ξ|² + t₀ - τ).
    static ParabolicCylinder for_source(const Point& x0, double t0, const Point& xi, double tau, int dim);
};

struct QRhoConfig {
    int space_order = 6;  // Gauss nodes across the ball (θ in 2-D); chords use twice as many
    int time_order = 6;   // per graded time panel
    double rel_tol = 1e-4;
    int max_levels = 3;
};

/// ∫_{Q_ρ ∩ {t > τ}} |Γ(x, t; ξ, τ)|² dx dt.
double q_rho_integral(const Green& kernel, const Point& x0, double t0, const Point& xi, double tau,
                      const QRhoConfig& cfg = {});

/// C ρⁿ (t₀-τ)^{1-n} exp(-|x₀-ξ|²/(C(t₀-τ))).
double q_rho_bound(double C, const Point& x0, double t0, const Point& xi, double tau, int dim);

/// Smallest C for which q_rho_bound dominates the given integral.
double q_rho_minimal_constant(double integral, const Point& x0, double t0, const Point& xi, double tau, int dim);

struct QRhoSample {
    Point x0{};
    double t0 = 0.0;
    Point xi{};
    double tau = 0.0;
};

enum class QRhoCase {
    kNearInTime,   // t₀ - ρ² ≤ τ < t₀
    kFarInTime,    // τ < t₀ - ρ²
};

QRhoCase classify_q_rho(const QRhoSample& s, int dim);

/// Samples of one case with t₀ - τ log-uniform in [t_min, t_max] and
/// |x₀ - ξ|²/(t₀ - τ) uniform over the case's admissible range, capped at ratio_max.
std::vector<QRhoSample> draw_q_rho_samples(QRhoCase which, int count, int dim, std::uint64_t seed,
                                           double t_min = 0.05, double t_max = 1.0, double ratio_max = 40.0,
                                           double source_spread = 0.5);

/// Smallest C for which q_rho_bound dominates q_rho_integral on every sample.
BoundFitReport fit_q_rho(const Green& kernel, const std::vector<QRhoSample>& samples, const QRhoConfig& cfg = {});

struct InteriorCheckSpec {
    Point center{};
    double time = 0.0;
    std::vector<double> rhos;
    /// Replace u by u - u(center, time). Constants solve the equation, so the
    /// estimate still applies, and the ratio then scales like ρ^{-(n/2+2)}.
    bool subtract_center_value = true;
};

/// max over solutions and ρ of ‖∇u‖_{L∞(ρΩ(x)×(t-ρ²,t))} ρ^{n/2+2} / ‖u‖_{L²(2ρΩ(x)×(t-4ρ²,t))}.
/// Gradients are one-sided across the interface (the larger of the two limits).
BoundFitReport interior_estimate_check(const TwoLayerMedium& medium, const std::vector<GridFunction>& solutions,
                                       const InteriorCheckSpec& spec);

/// Left and right sides of the interior estimate for one solution and radius.
struct InteriorSides {
    double grad_sup = 0.0;
    double l2_norm = 0.0;
};
InteriorSides interior_sides(const TwoLayerMedium& medium, const GridFunction& u, const Point& center, double time,
                             double rho, bool subtract_center_value);

/// L1^{1/p1}·L2^{1-1/p2}; requires 1/p2 + 1/q = 1/p1 + 1.
double schur_bound(double L1, double L2, double p1, double p2, double q);

/// K(x_i, y_j) on weighted point sets (discrete measures m1, m2).
struct SampledKernel {
    std::vector<double> w1;  // weights on X1 (rows)
    std::vector<double> w2;  // weights on X2 (columns)
    std::vector<double> k;   // row-major |X1| × |X2|

    double operator()(std::size_t i, std::size_t j) const { return k[i * w2.size() + j]; }
    /// sup over x2 of ∫|K|^q dm1.
    double column_integral(double q) const;
    /// sup over x1 of ∫|K|^q dm2.
    double row_integral(double q) const;
    std::vector<double> apply(const std::vector<double>& f) const;
};

double schur_bound(const SampledKernel& kernel, double p1, double p2, double q);

double weighted_norm(const std::vector<double>& f, const std::vector<double>& w, double p);

struct SchurTestReport {
    double bound = 0.0;
    double worst_ratio = 0.0;  // max ‖Kf‖_{p1} / ‖f‖_{p2}
    int trials = 0;
    bool holds = false;  // worst_ratio ≤ bound·(1 + 1e-10)
};

SchurTestReport schur_test(const SampledKernel& kernel, double p1, double p2, double q, int trials,
                           std::uint64_t seed);

}  // namespace layerheat
