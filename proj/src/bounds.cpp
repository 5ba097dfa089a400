#include "layerheat/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "layerheat/quadrature.hpp"

namespace layerheat {

namespace {

constexpr double kMaxConstant = 1e12;

double norm2(const Point& a, const Point& b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

double grad_norm(const KernelValue& v, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += v.grad[i] * v.grad[i];
    return std::sqrt(s);
}

Point random_direction(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    Point e{};
    double len = 0.0;
    while (len < 1e-8) {
        len = 0.0;
        for (int i = 0; i < n; ++i) {
            e[i] = g(rng);
            len += e[i] * e[i];
        }
        len = std::sqrt(len);
    }
    for (int i = 0; i < n; ++i) e[i] /= len;
    return e;
}

struct Regression {
    double slope = 0.0;
    double residual = 0.0;
};

Regression regress(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    if (x.size() < 2) fail(ErrorCode::kInvalidArgument, "regression needs at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    Regression r;
    r.slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (my + r.slope * (x[i] - mx));
        ss += e * e;
    }
    r.residual = std::sqrt(ss / n);
    return r;
}

std::vector<double> slope_times(const SampleSpec& spec) {
    std::vector<double> ts;
    const double a = std::log(spec.t_min), b = std::log(spec.t_max);
    for (int i = 0; i < spec.slope_points; ++i) ts.push_back(std::exp(a + (b - a) * i / (spec.slope_points - 1)));
    return ts;
}

std::vector<GreenQuery> to_queries(const std::vector<SpaceTimePoint>& samples) {
    std::vector<GreenQuery> qs;
    qs.reserve(samples.size());
    for (const SpaceTimePoint& p : samples) qs.push_back({p.x, p.t, p.y, p.s});
    return qs;
}

double rho_for(const Point& x0, double t0, const Point& xi, double tau, int n) {
    return 0.25 * std::sqrt(norm2(x0, xi, n) + t0 - tau);
}

}  // namespace

std::string BoundFitReport::to_json() const {
    nlohmann::ordered_json j;
    j["constant"] = fitted_constant;
    j["slope"] = exponent_slope;
    j["samples"] = sample_count;
    j["worst_point"] = {{"x", worst_point.x}, {"t", worst_point.t}, {"y", worst_point.y}, {"s", worst_point.s}};
    j["residual"] = residual;
    return j.dump(2);
}

void SampleSpec::validate() const {
    if (count < 100) fail(ErrorCode::kInvalidArgument, "sample count must be >= 100");
    if (!(t_min > 0.0 && t_max > t_min)) fail(ErrorCode::kInvalidArgument, "need 0 < t_min < t_max");
    if (!(radius_factor >= 0.0) || !(source_spread >= 0.0)) fail(ErrorCode::kInvalidArgument, "negative sample range");
    if (slope_points < 2) fail(ErrorCode::kInvalidArgument, "slope regression needs two times");
}

std::vector<SpaceTimePoint> draw_samples(const SampleSpec& spec, int dim) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<SpaceTimePoint> out;
    out.reserve(static_cast<std::size_t>(spec.count));
    const double la = std::log(spec.t_min), lb = std::log(spec.t_max);
    for (int i = 0; i < spec.count; ++i) {
        SpaceTimePoint p;
        const double T = std::exp(la + (lb - la) * u(rng));
        for (int d = 0; d < dim; ++d) p.y[d] = spec.source_center[d] + spec.source_spread * (2.0 * u(rng) - 1.0);
        const Point e = random_direction(rng, dim);
        const double r = spec.radius_factor * std::sqrt(T) * u(rng);
        for (int d = 0; d < dim; ++d) p.x[d] = p.y[d] + r * e[d];
        p.s = 0.0;
        p.t = T;
        out.push_back(p);
    }
    return out;
}

double minimal_gaussian_constant(double value, double r2, double elapsed, double power) {
    if (!std::isfinite(value)) fail(ErrorCode::kNoFiniteConstant, "non-finite kernel value");
    if (value <= 0.0) return 0.0;
    const double tp = std::pow(elapsed, -power);
    auto rhs = [&](double c) { return c * tp * std::exp(-r2 / (c * elapsed)); };
    double hi = 1.0;
    while (rhs(hi) < value) {
        hi *= 2.0;
        if (hi > kMaxConstant) fail(ErrorCode::kNoFiniteConstant, "no constant up to 1e12 bounds the samples");
    }
    double lo = hi;
    while (rhs(lo) >= value && lo > 1e-300) lo *= 0.5;
    for (int it = 0; it < 200 && hi > lo * (1.0 + 1e-15); ++it) {
        const double mid = std::sqrt(lo * hi);
        (rhs(mid) >= value ? hi : lo) = mid;
    }
    return hi;
}

BoundFitReport fit_gaussian_bound(const std::vector<SpaceTimePoint>& samples, const std::vector<double>& values,
                                  double power, int n) {
    if (samples.size() != values.size()) fail(ErrorCode::kInvalidArgument, "one value per sample");
    BoundFitReport rep;
    rep.sample_count = static_cast<int>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const SpaceTimePoint& p = samples[i];
        const double c = minimal_gaussian_constant(values[i], norm2(p.x, p.y, n), p.t - p.s, power);
        if (c > rep.fitted_constant) {
            rep.fitted_constant = c;
            rep.worst_point = p;
        }
    }
    return rep;
}

BoundFitReport fit_aronson(const Green& kernel, const SampleSpec& spec) {
    const int n = kernel.dim();
    const std::vector<SpaceTimePoint> samples = draw_samples(spec, n);
    const std::vector<KernelValue> vals = kernel.batch(to_queries(samples), false);
    std::vector<double> v(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) v[i] = std::abs(vals[i].gamma);
    BoundFitReport rep = fit_gaussian_bound(samples, v, 0.5 * n, n);

    std::vector<GreenQuery> diag;
    const std::vector<double> ts = slope_times(spec);
    for (double t : ts) diag.push_back({spec.source_center, t, spec.source_center, 0.0});
    const std::vector<KernelValue> dv = kernel.batch(diag, false);
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        lx.push_back(std::log(ts[i]));
        ly.push_back(std::log(std::abs(dv[i].gamma)));
    }
    const Regression r = regress(lx, ly);
    rep.exponent_slope = r.slope;
    rep.residual = r.residual;
    return rep;
}

BoundFitReport fit_gradient_bound(const Green& kernel, const SampleSpec& spec) {
    const int n = kernel.dim();
    const std::vector<SpaceTimePoint> samples = draw_samples(spec, n);
    const std::vector<KernelValue> vals = kernel.batch(to_queries(samples), true);
    std::vector<double> v(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) v[i] = grad_norm(vals[i], n);
    BoundFitReport rep = fit_gaussian_bound(samples, v, 0.5 * (n + 1), n);

    // max_x |∇Γ(x, t; y, 0)| over lines through y along e_1 and e_n, on a
    // grid scaled with sqrt(t).
    constexpr int kRadii = 40;
    const std::vector<double> ts = slope_times(spec);
    std::vector<GreenQuery> qs;
    for (double t : ts) {
        for (int axis = 0; axis < n; axis += std::max(1, n - 1)) {
            for (int k = -kRadii; k <= kRadii; ++k) {
                Point x = spec.source_center;
                x[axis] += std::sqrt(t) * spec.radius_factor * k / kRadii;
                qs.push_back({x, t, spec.source_center, 0.0});
            }
        }
    }
    const std::vector<KernelValue> gv = kernel.batch(qs, true);
    const std::size_t per_t = qs.size() / ts.size();
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        double mx = 0.0;
        for (std::size_t j = 0; j < per_t; ++j) mx = std::max(mx, grad_norm(gv[i * per_t + j], n));
        lx.push_back(std::log(ts[i]));
        ly.push_back(std::log(mx));
    }
    const Regression r = regress(lx, ly);
    rep.exponent_slope = r.slope;
    rep.residual = r.residual;
    return rep;
}

ParabolicCylinder ParabolicCylinder::for_source(const Point& x0, double t0, const Point& xi, double tau, int dim) {
    if (!(tau < t0)) fail(ErrorCode::kInvalidArgument, "source time must precede t0");
    return {x0, t0, rho_for(x0, t0, xi, tau, dim)};
}

double q_rho_integral(const Green& kernel, const Point& x0, double t0, const Point& xi, double tau,
                      const QRhoConfig& cfg) {
    const int n = kernel.dim();
    if (n > 2) fail(ErrorCode::kUnsupportedDimension, "Q_rho integral implemented for n = 1, 2");
    if (cfg.space_order < 2 || cfg.time_order < 2 || cfg.max_levels < 1 || !(cfg.rel_tol > 0.0)) {
        fail(ErrorCode::kInvalidArgument, "bad Q_rho quadrature configuration");
    }
    const ParabolicCylinder cyl = ParabolicCylinder::for_source(x0, t0, xi, tau, n);
    const double rho = cyl.radius;
    const double t_lo = std::max(t0 - rho * rho, tau);

    auto level = [&](int m_space, int m_time) {
        const QuadratureRule tr = composite_gauss(t_lo, t0, {0.5 * (t_lo + t0)}, 1, m_time);
        std::vector<GreenQuery> qs;
        std::vector<double> ws;
        if (n == 1) {
            const QuadratureRule xr = composite_gauss(x0[0] - rho, x0[0] + rho, {0.0}, 1, 2 * m_space);
            for (std::size_t a = 0; a < tr.nodes.size(); ++a) {
                for (std::size_t b = 0; b < xr.nodes.size(); ++b) {
                    qs.push_back({Point{xr.nodes[b]}, tr.nodes[a], xi, tau});
                    ws.push_back(tr.weights[a] * xr.weights[b]);
                }
            }
        } else {
            // x_n = x0_n + ρ sin θ keeps the chord length ρ cos θ smooth.
            const double pi = std::numbers::pi;
            std::vector<double> breaks;
            if (std::abs(x0[1]) < rho) breaks.push_back(std::asin(-x0[1] / rho));
            const QuadratureRule thr = composite_gauss(-0.5 * pi, 0.5 * pi, breaks, 1, m_space);
            const QuadratureRule chord = gauss_legendre(2 * m_space);
            for (std::size_t a = 0; a < tr.nodes.size(); ++a) {
                for (std::size_t b = 0; b < thr.nodes.size(); ++b) {
                    const double half = rho * std::cos(thr.nodes[b]);
                    const double xn = x0[1] + rho * std::sin(thr.nodes[b]);
                    for (std::size_t c = 0; c < chord.nodes.size(); ++c) {
                        qs.push_back({Point{x0[0] + half * chord.nodes[c], xn}, tr.nodes[a], xi, tau});
                        ws.push_back(tr.weights[a] * thr.weights[b] * half * half * chord.weights[c]);
                    }
                }
            }
        }
        const std::vector<KernelValue> vals = kernel.batch(qs, false);
        double s = 0.0;
        for (std::size_t i = 0; i < vals.size(); ++i) s += ws[i] * vals[i].gamma * vals[i].gamma;
        return s;
    };

    double prev = level(cfg.space_order, cfg.time_order);
    double grow = 1.0;
    for (int l = 1; l <= cfg.max_levels; ++l) {
        grow *= 1.5;
        const double cur = level(static_cast<int>(std::lround(cfg.space_order * grow)),
                                 static_cast<int>(std::lround(cfg.time_order * grow)));
        if (std::abs(cur - prev) <= cfg.rel_tol * std::abs(cur) || cur < 1e-290) return cur;
        prev = cur;
    }
    fail(ErrorCode::kQuadratureNotConverged, "Q_rho integral did not settle under refinement");
}

double q_rho_bound(double C, const Point& x0, double t0, const Point& xi, double tau, int dim) {
    const double rho = rho_for(x0, t0, xi, tau, dim);
    const double T = t0 - tau;
    return C * std::pow(rho, dim) * std::pow(T, 1.0 - dim) * std::exp(-norm2(x0, xi, dim) / (C * T));
}

double q_rho_minimal_constant(double integral, const Point& x0, double t0, const Point& xi, double tau, int dim) {
    const double rho = rho_for(x0, t0, xi, tau, dim);
    return minimal_gaussian_constant(integral / std::pow(rho, dim), norm2(x0, xi, dim), t0 - tau, dim - 1.0);
}

QRhoCase classify_q_rho(const QRhoSample& s, int dim) {
    const double rho = rho_for(s.x0, s.t0, s.xi, s.tau, dim);
    return s.tau >= s.t0 - rho * rho ? QRhoCase::kNearInTime : QRhoCase::kFarInTime;
}

std::vector<QRhoSample> draw_q_rho_samples(QRhoCase which, int count, int dim, std::uint64_t seed, double t_min,
                                           double t_max, double ratio_max, double source_spread) {
    if (count < 1 || !(t_min > 0.0 && t_max > t_min)) fail(ErrorCode::kInvalidArgument, "bad Q_rho sample range");
    // τ ≥ t₀ - ρ² exactly when |x₀ - ξ|² ≥ 15 (t₀ - τ).
    constexpr double kSplit = 15.0;
    if (which == QRhoCase::kNearInTime && !(ratio_max > kSplit)) {
        fail(ErrorCode::kInvalidArgument, "ratio_max must exceed 15 for the near-in-time case");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double la = std::log(t_min), lb = std::log(t_max);
    std::vector<QRhoSample> out;
    while (static_cast<int>(out.size()) < count) {
        QRhoSample s;
        const double T = std::exp(la + (lb - la) * u(rng));
        const double ratio = which == QRhoCase::kNearInTime ? kSplit + (ratio_max - kSplit) * u(rng)
                                                            : std::min(kSplit, ratio_max) * u(rng);
        for (int d = 0; d < dim; ++d) s.x0[d] = source_spread * (2.0 * u(rng) - 1.0);
        const Point e = random_direction(rng, dim);
        const double dist = std::sqrt(ratio * T);
        for (int d = 0; d < dim; ++d) s.xi[d] = s.x0[d] + dist * e[d];
        s.t0 = 1.0;
        s.tau = 1.0 - T;
        if (classify_q_rho(s, dim) == which) out.push_back(s);
    }
    return out;
}

BoundFitReport fit_q_rho(const Green& kernel, const std::vector<QRhoSample>& samples, const QRhoConfig& cfg) {
    const int n = kernel.dim();
    BoundFitReport rep;
    rep.sample_count = static_cast<int>(samples.size());
    for (const QRhoSample& s : samples) {
        const double I = q_rho_integral(kernel, s.x0, s.t0, s.xi, s.tau, cfg);
        const double c = q_rho_minimal_constant(I, s.x0, s.t0, s.xi, s.tau, n);
        if (c > rep.fitted_constant) {
            rep.fitted_constant = c;
            rep.worst_point = {s.x0, s.t0, s.xi, s.tau};
        }
    }
    return rep;
}

namespace {

struct GridView {
    const Grid& g;
    int n;
    double h;
    int N;

    Point node(const std::array<int, 2>& idx) const {
        Point p{};
        for (int i = 0; i < n; ++i) p[i] = g.box.center[i] - g.box.half_width + idx[i] * h;
        return p;
    }
    std::size_t flat(const std::array<int, 2>& idx) const {
        return static_cast<std::size_t>(idx[0]) + (n == 2 ? static_cast<std::size_t>(N) * idx[1] : 0);
    }
    int lower_index(double x, int axis) const {
        return static_cast<int>(std::ceil((x - (g.box.center[axis] - g.box.half_width)) / h - 1e-9));
    }
    int upper_index(double x, int axis) const {
        return static_cast<int>(std::floor((x - (g.box.center[axis] - g.box.half_width)) / h + 1e-9));
    }
};

double value_at(const GridFunction& u, const Point& x, double t) {
    const std::size_t m = u.slices();
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const double a = u.time(k), b = u.time(k + 1);
        if (t >= a - 1e-12 && t <= b + 1e-12) {
            const double th = std::clamp((t - a) / (b - a), 0.0, 1.0);
            return (1.0 - th) * u.interpolate(k, x) + th * u.interpolate(k + 1, x);
        }
    }
    if (m >= 1 && std::abs(u.time(m - 1) - t) < 1e-12) return u.interpolate(m - 1, x);
    fail(ErrorCode::kInvalidArgument, "time outside the stored slices");
}

}  // namespace

InteriorSides interior_sides(const TwoLayerMedium& medium, const GridFunction& u, const Point& center, double time,
                             double rho, bool subtract_center_value) {
    const Grid& g = u.grid();
    const int n = g.dim;
    if (medium.dim() != n) fail(ErrorCode::kUnsupportedDimension, "medium and grid dimensions differ");
    if (!(rho > 0.0)) fail(ErrorCode::kInvalidArgument, "rho must be positive");
    const GridView gv{g, n, g.spacing(), g.nodes_per_dim};
    for (int i = 0; i < n; ++i) {
        if (std::abs(center[i] - g.box.center[i]) + 2.0 * rho > g.box.half_width + 1e-12) {
            fail(ErrorCode::kInvalidArgument, "2ρ cube leaves the grid");
        }
    }
    if (u.slices() < 2 || u.time(0) > time - 4.0 * rho * rho + 1e-12 || u.time(u.slices() - 1) < time - 1e-12) {
        fail(ErrorCode::kInvalidArgument, "stored slices do not cover (t - 4ρ², t)");
    }
    const double c0 = subtract_center_value ? value_at(u, center, time) : 0.0;
    const double h = gv.h;
    const bool layered = !medium.is_homogeneous();

    std::array<int, 2> lo{}, hi{}, lo2{}, hi2{};
    for (int i = 0; i < n; ++i) {
        lo[i] = gv.lower_index(center[i] - rho, i);
        hi[i] = gv.upper_index(center[i] + rho, i);
        lo2[i] = std::max(0, gv.lower_index(center[i] - 2.0 * rho - 0.5 * h, i));
        hi2[i] = std::min(gv.N - 1, gv.upper_index(center[i] + 2.0 * rho + 0.5 * h, i));
    }

    InteriorSides out;
    std::vector<double> ts, ss;
    for (std::size_t k = 0; k < u.slices(); ++k) {
        const double tk = u.time(k);
        const std::vector<double>& v = u.values(k);
        auto at = [&](std::array<int, 2> idx) { return v[gv.flat(idx)] - c0; };
        if (tk >= time - rho * rho - 1e-12 && tk <= time + 1e-12) {
            for (int j = lo[1]; j <= (n == 2 ? hi[1] : 0); ++j) {
                for (int i = lo[0]; i <= hi[0]; ++i) {
                    const std::array<int, 2> idx{i, j};
                    // Differences along each axis; the normal axis keeps both one-sided limits.
                    std::array<double, 2> central{}, minus{}, plus{};
                    for (int a = 0; a < n; ++a) {
                        std::array<int, 2> dn = idx, up = idx;
                        --dn[a];
                        ++up[a];
                        const bool has_dn = dn[a] >= 0, has_up = up[a] < gv.N;
                        const double f = at(idx);
                        minus[a] = has_dn ? (f - at(dn)) / h : (at(up) - f) / h;
                        plus[a] = has_up ? (at(up) - f) / h : minus[a];
                        central[a] = has_dn && has_up ? (at(up) - at(dn)) / (2.0 * h) : (has_up ? plus[a] : minus[a]);
                    }
                    const bool on_interface = layered && std::abs(gv.node(idx)[n - 1]) < 1e-9 * h;
                    auto mag = [&](double normal) {
                        double s = normal * normal;
                        for (int a = 0; a + 1 < n; ++a) s += central[a] * central[a];
                        return std::sqrt(s);
                    };
                    const double gm = on_interface ? std::max(mag(minus[n - 1]), mag(plus[n - 1])) : mag(central[n - 1]);
                    out.grad_sup = std::max(out.grad_sup, gm);
                }
            }
        }
        // ∫_{2ρΩ} (u - c0)² with node cells clipped to the cube.
        double s = 0.0;
        for (int j = lo2[1]; j <= (n == 2 ? hi2[1] : 0); ++j) {
            for (int i = lo2[0]; i <= hi2[0]; ++i) {
                const std::array<int, 2> idx{i, j};
                const Point p = gv.node(idx);
                double w = 1.0;
                for (int a = 0; a < n; ++a) {
                    const double l = std::max(p[a] - 0.5 * h, center[a] - 2.0 * rho);
                    const double r = std::min(p[a] + 0.5 * h, center[a] + 2.0 * rho);
                    w *= std::max(0.0, r - l);
                }
                const double f = at(idx);
                s += w * f * f;
            }
        }
        ts.push_back(tk);
        ss.push_back(s);
    }
    // Piecewise-linear time integral over (t - 4ρ², t).
    const double a = time - 4.0 * rho * rho, b = time;
    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const double l = std::max(ts[k], a), r = std::min(ts[k + 1], b);
        if (!(r > l)) continue;
        const double dt = ts[k + 1] - ts[k];
        auto lerp = [&](double t) { return ss[k] + (ss[k + 1] - ss[k]) * (t - ts[k]) / dt; };
        integral += 0.5 * (r - l) * (lerp(l) + lerp(r));
    }
    out.l2_norm = std::sqrt(integral);
    return out;
}

BoundFitReport interior_estimate_check(const TwoLayerMedium& medium, const std::vector<GridFunction>& solutions,
                                       const InteriorCheckSpec& spec) {
    if (solutions.empty() || spec.rhos.empty()) fail(ErrorCode::kInvalidArgument, "need solutions and radii");
    const int n = medium.dim();
    const double power = 0.5 * n + 2.0;
    BoundFitReport rep;
    std::vector<double> slopes;
    double ss = 0.0;
    int count = 0;
    for (std::size_t si = 0; si < solutions.size(); ++si) {
        std::vector<double> lx, ly;
        for (double rho : spec.rhos) {
            const InteriorSides sides =
                interior_sides(medium, solutions[si], spec.center, spec.time, rho, spec.subtract_center_value);
            ++count;
            if (sides.grad_sup == 0.0) continue;
            if (!(sides.l2_norm > 0.0)) fail(ErrorCode::kNoFiniteConstant, "nonzero gradient with vanishing L2 norm");
            const double ratio = sides.grad_sup / sides.l2_norm;
            const double c = ratio * std::pow(rho, power);
            if (c > rep.fitted_constant) {
                rep.fitted_constant = c;
                // x, t: the cylinder's centre; y[0]: ρ; s: solution index.
                rep.worst_point = {spec.center, spec.time, Point{rho}, static_cast<double>(si)};
            }
            lx.push_back(std::log(rho));
            ly.push_back(std::log(ratio));
        }
        if (lx.size() >= 2) {
            const Regression r = regress(lx, ly);
            slopes.push_back(r.slope);
            ss += r.residual * r.residual * static_cast<double>(lx.size());
        }
    }
    rep.sample_count = count;
    if (!slopes.empty()) {
        double m = 0.0;
        for (double s : slopes) m += s / static_cast<double>(slopes.size());
        rep.exponent_slope = m;
        rep.residual = std::sqrt(ss / count);
    }
    return rep;
}

double schur_bound(double L1, double L2, double p1, double p2, double q) {
    if (!(p1 >= 1.0 && p2 >= 1.0 && q >= 1.0)) fail(ErrorCode::kInvalidArgument, "exponents must be >= 1");
    if (std::abs(1.0 / p2 + 1.0 / q - 1.0 / p1 - 1.0) > 1e-12) {
        fail(ErrorCode::kExponentMismatch, "exponents must satisfy 1/p2 + 1/q = 1/p1 + 1");
    }
    if (!(L1 >= 0.0 && L2 >= 0.0)) fail(ErrorCode::kInvalidArgument, "integral bounds must be nonnegative");
    return std::pow(L1, 1.0 / p1) * std::pow(L2, 1.0 - 1.0 / p2);
}

double SampledKernel::column_integral(double q) const {
    double best = 0.0;
    for (std::size_t j = 0; j < w2.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < w1.size(); ++i) s += std::pow(std::abs((*this)(i, j)), q) * w1[i];
        best = std::max(best, s);
    }
    return best;
}

double SampledKernel::row_integral(double q) const {
    double best = 0.0;
    for (std::size_t i = 0; i < w1.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < w2.size(); ++j) s += std::pow(std::abs((*this)(i, j)), q) * w2[j];
        best = std::max(best, s);
    }
    return best;
}

std::vector<double> SampledKernel::apply(const std::vector<double>& f) const {
    if (f.size() != w2.size()) fail(ErrorCode::kInvalidArgument, "function size does not match X2");
    std::vector<double> out(w1.size(), 0.0);
    for (std::size_t i = 0; i < w1.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < w2.size(); ++j) s += (*this)(i, j) * f[j] * w2[j];
        out[i] = s;
    }
    return out;
}

double schur_bound(const SampledKernel& kernel, double p1, double p2, double q) {
    if (kernel.k.size() != kernel.w1.size() * kernel.w2.size()) fail(ErrorCode::kInvalidArgument, "kernel shape");
    return schur_bound(kernel.column_integral(q), kernel.row_integral(q), p1, p2, q);
}

double weighted_norm(const std::vector<double>& f, const std::vector<double>& w, double p) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::pow(std::abs(f[i]), p) * w[i];
    return std::pow(s, 1.0 / p);
}

SchurTestReport schur_test(const SampledKernel& kernel, double p1, double p2, double q, int trials,
                           std::uint64_t seed) {
    SchurTestReport rep;
    rep.bound = schur_bound(kernel, p1, p2, q);
    rep.trials = trials;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::uniform_int_distribution<std::size_t> pick(0, kernel.w2.size() - 1);
    for (int t = 0; t < trials; ++t) {
        std::vector<double> f(kernel.w2.size());
        switch (t % 3) {
            case 0:
                for (double& x : f) x = g(rng);
                break;
            case 1:
                for (double& x : f) x = std::abs(g(rng));
                break;
            default:
                f[pick(rng)] = 1.0;
                break;
        }
        const double nf = weighted_norm(f, kernel.w2, p2);
        if (!(nf > 0.0)) continue;
        rep.worst_ratio = std::max(rep.worst_ratio, weighted_norm(kernel.apply(f), kernel.w1, p1) / nf);
    }
    rep.holds = rep.worst_ratio <= rep.bound * (1.0 + 1e-10);
    return rep;
}

}  // namespace layerheat
