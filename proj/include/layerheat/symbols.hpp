#pragma once

// Transform-domain algebra for the two-layer operator: the Θ symbols, the
// interface transmission coefficients and the region symbols V, plus the
// analyticity predicates used to certify integration contours.
//
// All symbols here have the source prefactor exp(-τ s - i y'·ξ') stripped;
// they depend only on (x_n, y_n, ξ', τ).

#include <array>
#include <complex>
#include <cstdint>
#include <string_view>

#include "layerheat/medium.hpp"

namespace layerheat {

using cplx = std::complex<double>;

/// Frequency pair (ξ', τ) with τ = iη. Only τ is stored; η is derived.
struct SpectralPoint {
    std::array<cplx, kMaxDim - 1> xi{};
    int tangential_dim = 0;  // n - 1
    cplx tau{};

    static SpectralPoint from_tau(const std::array<cplx, kMaxDim - 1>& xi, int tangential_dim, cplx tau);
    static SpectralPoint from_eta(const std::array<cplx, kMaxDim - 1>& xi, int tangential_dim, cplx eta);

    cplx eta() const noexcept { return cplx(0.0, -1.0) * tau; }
};

/// Tangential pieces of one tensor evaluated at ξ':
/// quad = Ãξ'·ξ', lin = Σ_{j<n} γ_jn ξ_j.
struct TangentialForms {
    cplx quad{};
    cplx lin{};
};

TangentialForms tangential_forms(const DiffusionTensor& t, const SpectralPoint& sp) noexcept;

struct ThetaPair {
    cplx theta_a{};
    cplx theta_b{};
    cplx a{};
    cplx b{};
};

/// Principal square roots Θ = [γ_nn(Ãξ'·ξ' + τ) - lin²]^{1/2} for both layers.
/// Throws BranchAmbiguity when the radicand lies on (-inf, 0].
ThetaPair theta_pair(const TwoLayerMedium& medium, const SpectralPoint& sp);

struct TransmissionCoefficients {
    cplx c1{}, c2{}, c3{}, c4{};
};

/// C1..C4 for a source above the interface (y_n > 0), prefactor included.
TransmissionCoefficients transmission_coefficients(const TwoLayerMedium& medium, const SpectralPoint& sp,
                                                   double y_n, const Point& y_prime, double s);

/// Relative residuals of the two source conditions at x_n = y_n and the two
/// interface conditions at x_n = 0, in that order.
std::array<double, 4> coefficient_system_residuals(const TwoLayerMedium& medium, const SpectralPoint& sp,
                                                   double y_n, const Point& y_prime, double s,
                                                   const TransmissionCoefficients& c);

/// Six (x_n, y_n) regions. R11: x_n > y_n > 0, R12: y_n > x_n > 0,
/// R2: x_n < 0 < y_n, R1: x_n > 0 > y_n, R21: y_n < x_n < 0, R22: x_n < y_n < 0.
enum class Region : std::uint8_t { kR11, kR12, kR2, kR1, kR21, kR22 };

std::string_view to_string(Region r) noexcept;

/// Region of (x_n, y_n). Signed zeros select the one-sided limit
/// (+0.0 is above the interface, -0.0 below). On the source plane the
/// x_n >= y_n side is chosen.
Region classify_region(double x_n, double y_n) noexcept;

/// True when (x_n, y_n) lies in the closure of `region` on the correct side
/// of the interface.
bool region_matches(Region region, double x_n, double y_n) noexcept;

/// One exponential summand of a region symbol:
///   amplitude(Θ_A, Θ_B) · exp(i(phase_a·a + phase_b·b) - decay_a·Θ_A - decay_b·Θ_B)
/// with d/dx_n of the exponent equal to
///   i(dphase_a·a + dphase_b·b) + dtheta_a·Θ_A + dtheta_b·Θ_B.
struct SymbolTerm {
    enum class Amplitude : std::uint8_t { kDirectA, kReflectA, kTransmit, kDirectB, kReflectB };

    Amplitude amplitude = Amplitude::kDirectA;
    double decay_a = 0.0, decay_b = 0.0;
    double phase_a = 0.0, phase_b = 0.0;
    double dphase_a = 0.0, dphase_b = 0.0;
    double dtheta_a = 0.0, dtheta_b = 0.0;
};

struct SymbolTerms {
    std::array<SymbolTerm, 2> term{};
    int count = 0;
};

SymbolTerms symbol_terms(Region region, const TwoLayerMedium& medium, double x_n, double y_n);

cplx term_amplitude(SymbolTerm::Amplitude kind, cplx theta_a, cplx theta_b) noexcept;

/// V for the given region. Throws RegionMismatch if (x_n, y_n) is not in it.
cplx v_symbol(Region region, const TwoLayerMedium& medium, double x_n, double y_n, const SpectralPoint& sp);

/// Analytic ∂V/∂x_n.
cplx v_symbol_dxn(Region region, const TwoLayerMedium& medium, double x_n, double y_n, const SpectralPoint& sp);

/// Central-difference residual of γ_nn V'' + 2i·lin·V' - (Ãξ'·ξ' + τ)V with step h.
cplx ode_residual(Region region, const TwoLayerMedium& medium, double x_n, double y_n,
                  const SpectralPoint& sp, double h);

/// Strict membership in
/// L_μ = {Im η < μ(|Re η| + |Re ξ'|²) - μ^{-1}|Im ξ'|²}.
bool in_analyticity_domain(const SpectralPoint& sp, double mu);

/// True iff p1² - 4 p0 p2 + 4 p0 iη avoids [0, ∞) for both layers.
bool root_avoidance_check(const TwoLayerMedium& medium, const SpectralPoint& sp, double mu);

/// Largest μ in {1, 1/2, 1/4, ...} for which `samples` random points of L_μ
/// all pass root_avoidance_check.
double certify_mu(const TwoLayerMedium& medium, int samples = 10000, std::uint64_t seed = 7);

/// Default rate c = δ / (2 max(a_nn, b_nn)) for symbol_decay_margin.
double default_decay_rate(const TwoLayerMedium& medium) noexcept;

/// log|V| + log(|ξ'| + |η|^{1/2}) + c|x_n - y_n|(|ξ'| + |η|^{1/2}).
double symbol_decay_margin(Region region, const TwoLayerMedium& medium, double x_n, double y_n,
                           const SpectralPoint& sp, double c);

}  // namespace layerheat
