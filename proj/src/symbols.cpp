#include "layerheat/symbols.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace layerheat {

namespace {

constexpr cplx kI(0.0, 1.0);

const DiffusionTensor& layer_of(Region r, const TwoLayerMedium& m) noexcept {
    switch (r) {
        case Region::kR11:
        case Region::kR12:
        case Region::kR1: return m.upper();
        default: return m.lower();
    }
}

cplx principal_theta(const DiffusionTensor& t, const TangentialForms& f, cplx tau) {
    const cplx radicand = t.normal() * (f.quad + tau) - f.lin * f.lin;
    if (radicand.imag() == 0.0 && radicand.real() <= 0.0) {
        fail(ErrorCode::kBranchAmbiguity, "Θ radicand on the nonpositive real axis");
    }
    return std::sqrt(radicand);
}

// p1² - 4 p0 p2 + 4 p0 iη for one tensor.
cplx root_discriminant(const DiffusionTensor& t, const SpectralPoint& sp) noexcept {
    const TangentialForms f = tangential_forms(t, sp);
    const cplx p0 = -t.normal();
    const cplx p1 = -2.0 * f.lin;
    const cplx p2 = -f.quad;
    return p1 * p1 - 4.0 * p0 * p2 + 4.0 * p0 * kI * sp.eta();
}

bool on_nonnegative_ray(cplx d) noexcept {
    return d.real() >= 0.0 && std::abs(d.imag()) <= 1e-14 * std::abs(d);
}

double norm2_real(const SpectralPoint& sp) noexcept {
    double s = 0.0;
    for (int j = 0; j < sp.tangential_dim; ++j) s += sp.xi[j].real() * sp.xi[j].real();
    return s;
}

double norm2_imag(const SpectralPoint& sp) noexcept {
    double s = 0.0;
    for (int j = 0; j < sp.tangential_dim; ++j) s += sp.xi[j].imag() * sp.xi[j].imag();
    return s;
}

}  // namespace

SpectralPoint SpectralPoint::from_tau(const std::array<cplx, kMaxDim - 1>& xi, int tangential_dim, cplx tau) {
    if (tangential_dim < 0 || tangential_dim > kMaxDim - 1) {
        fail(ErrorCode::kUnsupportedDimension, "tangential dimension out of range");
    }
    SpectralPoint sp;
    sp.xi = xi;
    sp.tangential_dim = tangential_dim;
    sp.tau = tau;
    return sp;
}

SpectralPoint SpectralPoint::from_eta(const std::array<cplx, kMaxDim - 1>& xi, int tangential_dim, cplx eta) {
    return from_tau(xi, tangential_dim, kI * eta);
}

TangentialForms tangential_forms(const DiffusionTensor& t, const SpectralPoint& sp) noexcept {
    const int k = t.dim() - 1;
    TangentialForms f;
    for (int i = 0; i < k; ++i) {
        f.lin += t(i, k) * sp.xi[i];
        for (int j = 0; j < k; ++j) f.quad += t(i, j) * sp.xi[i] * sp.xi[j];
    }
    return f;
}

ThetaPair theta_pair(const TwoLayerMedium& medium, const SpectralPoint& sp) {
    const TangentialForms fa = tangential_forms(medium.upper(), sp);
    const TangentialForms fb = tangential_forms(medium.lower(), sp);
    ThetaPair p;
    p.a = fa.lin;
    p.b = fb.lin;
    p.theta_a = principal_theta(medium.upper(), fa, sp.tau);
    p.theta_b = principal_theta(medium.lower(), fb, sp.tau);
    return p;
}

TransmissionCoefficients transmission_coefficients(const TwoLayerMedium& medium, const SpectralPoint& sp,
                                                   double y_n, const Point& y_prime, double s) {
    if (!(y_n > 0.0)) fail(ErrorCode::kInvalidArgument, "transmission_coefficients requires y_n > 0");
    const ThetaPair th = theta_pair(medium, sp);
    const cplx sum = th.theta_a + th.theta_b;
    if (std::abs(th.theta_a) == 0.0 || std::abs(sum) == 0.0) {
        fail(ErrorCode::kDegenerateDenominator, "Θ_A = 0 or Θ_A + Θ_B = 0");
    }
    cplx phase = 0.0;
    for (int j = 0; j < sp.tangential_dim; ++j) phase += y_prime[j] * sp.xi[j];
    const cplx pre = std::exp(-sp.tau * s - kI * phase);
    const double ann = medium.upper().normal();
    const cplx up = std::exp((kI * th.a + th.theta_a) * y_n / ann);
    const cplx down = std::exp((kI * th.a - th.theta_a) * y_n / ann);
    const cplx reflect = (th.theta_a - th.theta_b) / (2.0 * th.theta_a * sum);

    TransmissionCoefficients c;
    c.c1 = pre * up / (2.0 * th.theta_a) + pre * reflect * down;
    c.c2 = pre * reflect * down;
    c.c3 = pre * down / (2.0 * th.theta_a);
    c.c4 = pre * down / sum;
    return c;
}

std::array<double, 4> coefficient_system_residuals(const TwoLayerMedium& medium, const SpectralPoint& sp,
                                                   double y_n, const Point& y_prime, double s,
                                                   const TransmissionCoefficients& c) {
    const ThetaPair th = theta_pair(medium, sp);
    cplx phase = 0.0;
    for (int j = 0; j < sp.tangential_dim; ++j) phase += y_prime[j] * sp.xi[j];
    const cplx pre = std::exp(-sp.tau * s - kI * phase);
    const double ann = medium.upper().normal();
    const cplx grow = std::exp(2.0 * th.theta_a * y_n / ann);
    const cplx rhs = pre * std::exp((kI * th.a + th.theta_a) * y_n / ann);

    auto rel = [](cplx residual, double scale) {
        return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual);
    };

    std::array<double, 4> r{};
    {
        const cplx t3 = c.c3 * grow;
        r[0] = rel(c.c1 - c.c2 - t3, std::abs(c.c1) + std::abs(c.c2) + std::abs(t3));
    }
    {
        const cplx t1 = (c.c1 - c.c2) * (-kI * th.a - th.theta_a);
        const cplx t2 = c.c3 * (-kI * th.a + th.theta_a) * grow;
        r[1] = rel(t1 - t2 + rhs, std::abs(t1) + std::abs(t2) + std::abs(rhs));
    }
    r[2] = rel(c.c2 + c.c3 - c.c4, std::abs(c.c2) + std::abs(c.c3) + std::abs(c.c4));
    {
        const cplx t1 = c.c2 * th.theta_a, t2 = c.c3 * th.theta_a, t3 = c.c4 * th.theta_b;
        r[3] = rel(t1 - t2 + t3, std::abs(t1) + std::abs(t2) + std::abs(t3));
    }
    return r;
}

std::string_view to_string(Region r) noexcept {
    switch (r) {
        case Region::kR11: return "R11";
        case Region::kR12: return "R12";
        case Region::kR2: return "R2";
        case Region::kR1: return "R1";
        case Region::kR21: return "R21";
        case Region::kR22: return "R22";
    }
    return "?";
}

Region classify_region(double x_n, double y_n) noexcept {
    const bool x_up = !std::signbit(x_n);
    if (!std::signbit(y_n)) {
        if (x_n >= y_n) return Region::kR11;
        return x_up ? Region::kR12 : Region::kR2;
    }
    if (x_up) return Region::kR1;
    return x_n >= y_n ? Region::kR21 : Region::kR22;
}

bool region_matches(Region region, double x_n, double y_n) noexcept {
    switch (region) {
        case Region::kR11: return y_n >= 0.0 && x_n >= y_n;
        case Region::kR12: return y_n >= 0.0 && x_n >= 0.0 && x_n <= y_n;
        case Region::kR2: return y_n >= 0.0 && x_n <= 0.0;
        case Region::kR1: return y_n <= 0.0 && x_n >= 0.0;
        case Region::kR21: return y_n <= 0.0 && x_n <= 0.0 && x_n >= y_n;
        case Region::kR22: return y_n <= 0.0 && x_n <= y_n;
    }
    return false;
}

SymbolTerms symbol_terms(Region region, const TwoLayerMedium& medium, double x, double y) {
    if (!region_matches(region, x, y)) {
        fail(ErrorCode::kRegionMismatch, "(x_n, y_n) not in region " + std::string(to_string(region)));
    }
    using A = SymbolTerm::Amplitude;
    const double ia = 1.0 / medium.upper().normal();
    const double ib = 1.0 / medium.lower().normal();
    SymbolTerms out;
    auto push = [&out](SymbolTerm t) { out.term[out.count++] = t; };

    switch (region) {
        case Region::kR11:
            push({A::kDirectA, (x - y) * ia, 0.0, -(x - y) * ia, 0.0, -ia, 0.0, -ia, 0.0});
            push({A::kReflectA, (x + y) * ia, 0.0, -(x - y) * ia, 0.0, -ia, 0.0, -ia, 0.0});
            break;
        case Region::kR12:
            push({A::kReflectA, (x + y) * ia, 0.0, -(x - y) * ia, 0.0, -ia, 0.0, -ia, 0.0});
            push({A::kDirectA, (y - x) * ia, 0.0, -(x - y) * ia, 0.0, -ia, 0.0, ia, 0.0});
            break;
        case Region::kR2:
            push({A::kTransmit, y * ia, -x * ib, y * ia, -x * ib, 0.0, -ib, 0.0, ib});
            break;
        case Region::kR1:
            push({A::kTransmit, x * ia, -y * ib, -x * ia, y * ib, -ia, 0.0, -ia, 0.0});
            break;
        case Region::kR21:
            push({A::kDirectB, 0.0, (x - y) * ib, 0.0, -(x - y) * ib, 0.0, -ib, 0.0, -ib});
            push({A::kReflectB, 0.0, -(x + y) * ib, 0.0, -(x - y) * ib, 0.0, -ib, 0.0, ib});
            break;
        case Region::kR22:
            push({A::kReflectB, 0.0, -(x + y) * ib, 0.0, -(x - y) * ib, 0.0, -ib, 0.0, ib});
            push({A::kDirectB, 0.0, (y - x) * ib, 0.0, -(x - y) * ib, 0.0, -ib, 0.0, ib});
            break;
    }
    return out;
}

cplx term_amplitude(SymbolTerm::Amplitude kind, cplx ta, cplx tb) noexcept {
    using A = SymbolTerm::Amplitude;
    switch (kind) {
        case A::kDirectA: return 0.5 / ta;
        case A::kReflectA: return (ta - tb) / (2.0 * ta * (ta + tb));
        case A::kTransmit: return 1.0 / (ta + tb);
        case A::kDirectB: return 0.5 / tb;
        case A::kReflectB: return (tb - ta) / (2.0 * tb * (ta + tb));
    }
    return 0.0;
}

namespace {

template <bool Derivative>
cplx eval_symbol(Region region, const TwoLayerMedium& medium, double x_n, double y_n, const SpectralPoint& sp) {
    const SymbolTerms terms = symbol_terms(region, medium, x_n, y_n);
    const ThetaPair th = theta_pair(medium, sp);
    cplx v = 0.0;
    for (int k = 0; k < terms.count; ++k) {
        const SymbolTerm& t = terms.term[k];
        const cplx e = std::exp(kI * (t.phase_a * th.a + t.phase_b * th.b) - t.decay_a * th.theta_a -
                                t.decay_b * th.theta_b);
        cplx c = term_amplitude(t.amplitude, th.theta_a, th.theta_b) * e;
        if constexpr (Derivative) {
            c *= kI * (t.dphase_a * th.a + t.dphase_b * th.b) + t.dtheta_a * th.theta_a + t.dtheta_b * th.theta_b;
        }
        v += c;
    }
    return v;
}

}  // namespace

cplx v_symbol(Region region, const TwoLayerMedium& medium, double x_n, double y_n, const SpectralPoint& sp) {
    return eval_symbol<false>(region, medium, x_n, y_n, sp);
}

cplx v_symbol_dxn(Region region, const TwoLayerMedium& medium, double x_n, double y_n, const SpectralPoint& sp) {
    return eval_symbol<true>(region, medium, x_n, y_n, sp);
}

cplx ode_residual(Region region, const TwoLayerMedium& medium, double x_n, double y_n, const SpectralPoint& sp,
                  double h) {
    const DiffusionTensor& g = layer_of(region, medium);
    const TangentialForms f = tangential_forms(g, sp);
    const cplx vm = v_symbol(region, medium, x_n - h, y_n, sp);
    const cplx v0 = v_symbol(region, medium, x_n, y_n, sp);
    const cplx vp = v_symbol(region, medium, x_n + h, y_n, sp);
    const cplx d1 = (vp - vm) / (2.0 * h);
    const cplx d2 = (vp - 2.0 * v0 + vm) / (h * h);
    return g.normal() * d2 + 2.0 * kI * f.lin * d1 - (f.quad + sp.tau) * v0;
}

bool in_analyticity_domain(const SpectralPoint& sp, double mu) {
    if (!(mu > 0.0)) fail(ErrorCode::kInvalidArgument, "mu must be positive");
    const cplx eta = sp.eta();
    return eta.imag() < mu * (std::abs(eta.real()) + norm2_real(sp)) - norm2_imag(sp) / mu;
}

bool root_avoidance_check(const TwoLayerMedium& medium, const SpectralPoint& sp, double mu) {
    if (!(mu > 0.0)) fail(ErrorCode::kInvalidArgument, "mu must be positive");
    return !on_nonnegative_ray(root_discriminant(medium.upper(), sp)) &&
           !on_nonnegative_ray(root_discriminant(medium.lower(), sp));
}

double certify_mu(const TwoLayerMedium& medium, int samples, std::uint64_t seed) {
    // A μ that is too large lets L_μ touch the set where the discriminant
    // crosses [0, ∞); nearby samples then show a vanishing argument. Real τ
    // with real ξ' makes the discriminant real, so that family hits the ray
    // exactly.
    constexpr double kAngleMargin = 1e-6;
    const int k = medium.dim() - 1;
    auto clear = [&](const SpectralPoint& sp, double mu) {
        if (!root_avoidance_check(medium, sp, mu)) return false;
        for (const DiffusionTensor* t : {&medium.upper(), &medium.lower()}) {
            if (std::abs(std::arg(root_discriminant(*t, sp))) < kAngleMargin) return false;
        }
        return true;
    };

    for (double mu = 1.0; mu > 1e-6; mu *= 0.5) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        bool ok = true;
        for (int i = 0; i < samples && ok; ++i) {
            const double scale = std::pow(10.0, -2.0 + 4.0 * unit(rng));
            std::array<cplx, kMaxDim - 1> xi{};
            const int family = i % 3;
            for (int j = 0; j < k; ++j) {
                const double re = scale * normal(rng);
                const double im = family == 0 ? 0.0 : scale * normal(rng);
                xi[j] = cplx(re, im);
            }
            SpectralPoint probe = SpectralPoint::from_eta(xi, k, 0.0);
            const double re_xi2 = norm2_real(probe), im_xi2 = norm2_imag(probe);
            cplx eta;
            if (family == 0) {
                // τ real in (-μ|ξ'|² - slack, scale²): Re η = 0.
                const double lo = -mu * re_xi2;
                const double tau = lo + (scale * scale - lo) * unit(rng);
                eta = cplx(0.0, -tau);
            } else {
                const double re_eta = scale * scale * normal(rng);
                const double bound = mu * (std::abs(re_eta) + re_xi2) - im_xi2 / mu;
                const double eps = family == 1 ? std::pow(10.0, -8.0 * unit(rng)) : unit(rng);
                eta = cplx(re_eta, bound - eps * (1.0 + std::abs(bound)));
            }
            const SpectralPoint sp = SpectralPoint::from_eta(xi, k, eta);
            if (!in_analyticity_domain(sp, mu)) continue;
            ok = clear(sp, mu);
        }
        if (ok) return mu;
    }
    fail(ErrorCode::kInternal, "no analyticity parameter certified");
}

double default_decay_rate(const TwoLayerMedium& medium) noexcept {
    return medium.delta() / (2.0 * std::max(medium.upper().normal(), medium.lower().normal()));
}

double symbol_decay_margin(Region region, const TwoLayerMedium& medium, double x_n, double y_n,
                           const SpectralPoint& sp, double c) {
    const cplx v = v_symbol(region, medium, x_n, y_n, sp);
    double xi_norm2 = 0.0;
    for (int j = 0; j < sp.tangential_dim; ++j) xi_norm2 += std::norm(sp.xi[j]);
    const double w = std::sqrt(xi_norm2) + std::sqrt(std::abs(sp.eta()));
    return std::log(std::abs(v)) + std::log(w) + c * std::abs(x_n - y_n) * w;
}

}  // namespace layerheat
