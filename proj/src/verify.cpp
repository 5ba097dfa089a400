#include "layerheat/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <json.hpp>

#include "layerheat/bounds.hpp"
#include "layerheat/images.hpp"
#include "layerheat/oracle.hpp"

namespace layerheat {

namespace {

using Json = nlohmann::ordered_json;

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

class Params {
public:
    explicit Params(const std::string& text) {
        try {
            j_ = Json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::kInvalidArgument, std::string("harness parameters: ") + e.what());
        }
        if (!j_.is_object()) fail(ErrorCode::kInvalidArgument, "harness parameters must be a JSON object");
    }

    template <class T>
    T get(const char* key, T fallback) const {
        if (!j_.contains(key)) return fallback;
        try {
            return j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            fail(ErrorCode::kInvalidArgument, std::string("harness parameter '") + key + "' has the wrong type");
        }
    }

    Point point(const char* key, Point fallback, int n) const {
        if (!j_.contains(key)) return fallback;
        const std::vector<double> v = get<std::vector<double>>(key, {});
        if (static_cast<int>(v.size()) != n) {
            fail(ErrorCode::kInvalidArgument, std::string("harness parameter '") + key + "' needs one entry per axis");
        }
        Point p{};
        std::copy(v.begin(), v.end(), p.begin());
        return p;
    }

private:
    Json j_;
};

struct Checks {
    std::vector<VerifyCheck> list;

    void at_most(std::string name, double value, double limit) {
        list.push_back({std::move(name), value, limit, value <= limit});
    }
    void at_least(std::string name, double value, double limit) {
        list.push_back({std::move(name), value, limit, value >= limit});
    }
    void within(std::string name, double value, double target, double tol) {
        list.push_back({std::move(name), value, tol, std::abs(value - target) <= tol});
    }
    void finite(std::string name, double value) {
        list.push_back({std::move(name), value, std::numeric_limits<double>::max(), std::isfinite(value)});
    }
};

Point axis_point(int n, double normal, double tangential = 0.0) {
    Point p{};
    for (int i = 0; i + 1 < n; ++i) p[i] = tangential;
    p[n - 1] = normal;
    return p;
}

Green kernel_green(EvaluatorPtr ev, double time_power) {
    Green g = whole_space_green(ev);
    if (time_power == 0.0) return g;
    const int n = ev->medium().dim();
    return Green(n, [g, time_power, n](std::span<const GreenQuery> qs, bool gradient) {
        std::vector<KernelValue> out = g.batch(qs, gradient);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double f = std::pow(qs[i].t - qs[i].s, time_power);
            out[i].gamma *= f;
            out[i].est_error *= f;
            for (int d = 0; d < n; ++d) out[i].grad[d] *= f;
        }
        return out;
    });
}

double rel_change(double a, double b) { return std::abs(b - a) / std::max(std::abs(a), 1e-300); }

SampleSpec sample_spec(const Params& p, const VerifyOptions& opts, int n) {
    SampleSpec spec;
    spec.count = p.get("samples", 1000);
    spec.seed = opts.seed;
    spec.t_min = p.get("t_min", spec.t_min);
    spec.t_max = p.get("t_max", spec.t_max);
    spec.radius_factor = p.get("radius_factor", spec.radius_factor);
    spec.source_center = p.point("source_center", spec.source_center, n);
    spec.source_spread = p.get("source_spread", spec.source_spread);
    spec.slope_points = p.get("slope_points", spec.slope_points);
    spec.validate();
    return spec;
}

Json report_json(const BoundFitReport& r) { return Json::parse(r.to_json()); }

VerifyReport gaussian_fit(bool gradient, const TwoLayerMedium& m, EvaluatorPtr ev, const Params& p,
                          const VerifyOptions& opts) {
    const int n = m.dim();
    const Green g = kernel_green(ev, opts.time_power);
    SampleSpec spec = sample_spec(p, opts, n);
    auto fit = [&](const SampleSpec& s) { return gradient ? fit_gradient_bound(g, s) : fit_aronson(g, s); };
    const BoundFitReport base = fit(spec);
    spec.count *= 2;
    const BoundFitReport fine = fit(spec);

    Checks c;
    c.finite("constant", base.fitted_constant);
    c.at_most("stability under doubled samples", rel_change(base.fitted_constant, fine.fitted_constant),
              p.get("stability", 0.05));
    const double expected = gradient ? -0.5 * (n + 1) : -0.5 * n;
    if (m.is_homogeneous()) {
        c.within("scaling slope", base.exponent_slope, expected, p.get("slope_tol", gradient ? 0.02 : 0.01));
    }
    Json d;
    d["fit"] = report_json(base);
    d["refined_fit"] = report_json(fine);
    d["expected_slope"] = expected;
    return {gradient ? "gradient" : "aronson", c.list, d.dump()};
}

VerifyReport qrho(const TwoLayerMedium& m, EvaluatorPtr ev, const Params& p, const VerifyOptions& opts) {
    const int n = m.dim();
    const Green g = kernel_green(ev, opts.time_power);
    QRhoConfig qc;
    if (n == 2) {
        qc.space_order = 4;
        qc.time_order = 4;
        qc.rel_tol = 5e-3;
        qc.max_levels = 4;
    }
    qc.space_order = p.get("space_order", qc.space_order);
    qc.time_order = p.get("time_order", qc.time_order);
    qc.rel_tol = p.get("rel_tol", qc.rel_tol);
    qc.max_levels = p.get("max_levels", qc.max_levels);
    const int samples = p.get("samples", 200);
    const int training = p.get("training", 200);
    const double margin = p.get("margin", 1.25);
    const double t_min = p.get("t_min", 0.05), t_max = p.get("t_max", 1.0);
    const double ratio_max = p.get("ratio_max", 40.0), spread = p.get("source_spread", 0.5);
    if (samples < 1 || training < 1 || !(margin >= 1.0)) fail(ErrorCode::kInvalidArgument, "bad Q_rho harness setup");

    Checks c;
    Json d;
    for (QRhoCase which : {QRhoCase::kNearInTime, QRhoCase::kFarInTime}) {
        const char* label = which == QRhoCase::kNearInTime ? "near_in_time" : "far_in_time";
        const BoundFitReport pre = fit_q_rho(
            g, draw_q_rho_samples(which, training, n, opts.seed + 1, t_min, t_max, ratio_max, spread), qc);
        const double C = margin * pre.fitted_constant;
        double worst = 0.0;
        const std::vector<QRhoSample> fresh =
            draw_q_rho_samples(which, samples, n, opts.seed, t_min, t_max, ratio_max, spread);
        BoundFitReport post;
        post.sample_count = samples;
        for (const QRhoSample& s : fresh) {
            const double I = q_rho_integral(g, s.x0, s.t0, s.xi, s.tau, qc);
            worst = std::max(worst, I / q_rho_bound(C, s.x0, s.t0, s.xi, s.tau, n));
            const double cs = q_rho_minimal_constant(I, s.x0, s.t0, s.xi, s.tau, n);
            if (cs > post.fitted_constant) {
                post.fitted_constant = cs;
                post.worst_point = {s.x0, s.t0, s.xi, s.tau};
            }
        }
        c.finite(std::string("pre-fit constant, ") + label, pre.fitted_constant);
        c.at_most(std::string("integral over bound, ") + label, worst, 1.0);
        d[label] = {{"prefit", report_json(pre)}, {"constant", C}, {"fresh_fit", report_json(post)},
                    {"worst_ratio", worst}};
    }
    d["margin"] = margin;
    return {"qrho", c.list, d.dump()};
}

VerifyReport interior(const TwoLayerMedium& m, const Params& p, const VerifyOptions& opts) {
    const int n = m.dim();
    if (n > 2) fail(ErrorCode::kUnsupportedDimension, "interior harness runs on the n <= 2 oracle");
    const std::vector<int> levels = p.get("levels", n == 1 ? std::vector<int>{401, 801} : std::vector<int>{81, 161});
    const std::vector<double> rhos =
        p.get("rhos", n == 1 ? std::vector<double>{0.04, 0.06, 0.09, 0.135} : std::vector<double>{0.1, 0.135, 0.18});
    const int solutions = p.get("solutions", 3);
    if (levels.size() < 2 || solutions < 1) fail(ErrorCode::kInvalidArgument, "interior harness needs two grids");

    std::vector<BoundFitReport> fits;
    for (int N : levels) {
        const double h = 2.0 / (N - 1);
        const Grid grid = Grid::make(Cube{1.0, Point{}}, n, N, 0.5 * h, 0.0, 1.0);
        SolveOptions so;
        so.scheme = TimeScheme::kCrankNicolson;
        so.store_every = 1;
        std::vector<GridFunction> sols;
        for (int k = 0; k < solutions; ++k) {
            sols.push_back(interior_solution_sampler(m, random_smooth_boundary(opts.seed + k, n), grid, so));
        }
        InteriorCheckSpec spec;
        spec.center = Point{};
        spec.time = 1.0;
        spec.rhos = rhos;
        fits.push_back(interior_estimate_check(m, sols, spec));
    }
    Checks c;
    c.finite("constant", fits.back().fitted_constant);
    c.at_most("stability under refinement", rel_change(fits[fits.size() - 2].fitted_constant, fits.back().fitted_constant),
              p.get("stability", 0.1));
    const double expected = -(0.5 * n + 2.0);
    if (m.is_homogeneous()) {
        c.within("rho scaling slope", fits.back().exponent_slope, expected, 0.1 * std::abs(expected));
    }
    Json d;
    d["expected_slope"] = expected;
    d["fits"] = Json::array();
    for (std::size_t i = 0; i < fits.size(); ++i) {
        Json f = report_json(fits[i]);
        f["nodes_per_dim"] = levels[i];
        d["fits"].push_back(f);
    }
    return {"interior", c.list, d.dump()};
}

SampledKernel uniform_kernel(int N, const std::function<double(double, double)>& k) {
    SampledKernel K;
    K.w1.assign(N, 1.0 / N);
    K.w2.assign(N, 1.0 / N);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) K.k.push_back(k((i + 0.5) / N, (j + 0.5) / N));
    }
    return K;
}

VerifyReport schur(const TwoLayerMedium& m, EvaluatorPtr ev, const Params& p, const VerifyOptions& opts) {
    const int n = m.dim();
    const int N = p.get("points", 120);
    const int trials = p.get("trials", 100);
    const double T = p.get("elapsed", 0.05);
    if (N < 8 || trials < 1 || !(T > 0.0)) fail(ErrorCode::kInvalidArgument, "bad Schur harness setup");

    std::vector<std::pair<std::string, SampledKernel>> kernels;
    kernels.emplace_back("constant", uniform_kernel(N, [](double, double) { return 1.0; }));
    kernels.emplace_back("step", uniform_kernel(N, [](double x, double y) { return x > y ? 1.0 : 0.0; }));
    // Γ(x, T; y, 0) for x, y on the normal line through the origin, in [-1, 1].
    {
        SampledKernel K;
        K.w1.assign(N, 2.0 / N);
        K.w2.assign(N, 2.0 / N);
        std::vector<GreenQuery> qs;
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) {
                qs.push_back({axis_point(n, -1.0 + 2.0 * (i + 0.5) / N), T, axis_point(n, -1.0 + 2.0 * (j + 0.5) / N),
                              0.0});
            }
        }
        for (const KernelValue& v : kernel_green(ev, opts.time_power).batch(qs, false)) K.k.push_back(v.gamma);
        kernels.emplace_back("kernel", std::move(K));
    }
    struct Triple {
        double q, p1, p2;
    };
    const std::vector<Triple> triples = {{1.0, 2.0, 2.0}, {1.5, 2.0, 1.2}};
    Checks c;
    Json d = Json::array();
    std::uint64_t seed = opts.seed;
    for (const auto& [name, K] : kernels) {
        for (const Triple& t : triples) {
            const SchurTestReport r = schur_test(K, t.p1, t.p2, t.q, trials, seed++);
            char label[96];
            std::snprintf(label, sizeof label, "%s q=%g p1=%g p2=%g", name.c_str(), t.q, t.p1, t.p2);
            c.at_most(label, r.worst_ratio, r.bound * (1.0 + 1e-10));
            d.push_back({{"kernel", name}, {"q", t.q}, {"p1", t.p1}, {"p2", t.p2}, {"bound", r.bound},
                         {"worst_ratio", r.worst_ratio}, {"trials", r.trials}});
        }
    }
    Json details;
    details["cases"] = d;
    return {"schur", c.list, details.dump()};
}

double normal_flux(const DiffusionTensor& a, const Point& grad, double normal_derivative, int n) {
    double f = a(n - 1, n - 1) * normal_derivative;
    for (int j = 0; j + 1 < n; ++j) f += a(n - 1, j) * grad[j];
    return f;
}

VerifyReport transmission(const TwoLayerMedium& m, EvaluatorPtr ev, const Params& p) {
    const int n = m.dim();
    const double eps = 1e-12;
    const Point y = p.point("source", axis_point(n, 0.3), n);
    if (y[n - 1] == 0.0) fail(ErrorCode::kOnInterface, "source must lie off the interface");
    const std::vector<double> times = p.get("times", std::vector<double>{0.1, 0.4, 1.0});
    const std::vector<double> tangential = n == 1 ? std::vector<double>{0.0} : std::vector<double>{-0.4, 0.0, 0.5};

    double cont = 0.0, flux = 0.0;
    for (double T : times) {
        for (double x0 : tangential) {
            const KernelValue up = ev->eval(KernelQuery::make(axis_point(n, eps, x0), T, y, 0.0), true);
            const KernelValue dn = ev->eval(KernelQuery::make(axis_point(n, -eps, x0), T, y, 0.0), true);
            cont = std::max(cont, std::abs(up.gamma - dn.gamma) / std::max(up.gamma, 1e-300));
            const double fu = normal_flux(m.upper(), up.grad, up.grad[n - 1], n);
            const double fl = normal_flux(m.lower(), dn.grad, dn.grad[n - 1], n);
            double scale = std::abs(fu);
            for (int i = 0; i < n; ++i) scale += std::abs(up.grad[i]);
            flux = std::max(flux, std::abs(fu - fl) / std::max(scale, 1e-300));
        }
    }
    // Flux jump built from one-sided differences along the normal.
    const double T = p.get("order_time", 0.5);
    const std::vector<double> steps = p.get("steps", std::vector<double>{0.02, 0.01, 0.005});
    const KernelValue up = ev->eval(KernelQuery::make(axis_point(n, eps), T, y, 0.0), true);
    const KernelValue dn = ev->eval(KernelQuery::make(axis_point(n, -eps), T, y, 0.0), true);
    std::vector<double> jumps;
    for (double h : steps) {
        const double gp = ev->eval(KernelQuery::make(axis_point(n, h), T, y, 0.0), false).gamma;
        const double gm = ev->eval(KernelQuery::make(axis_point(n, -h), T, y, 0.0), false).gamma;
        const double fu = normal_flux(m.upper(), up.grad, (gp - up.gamma) / h, n);
        const double fl = normal_flux(m.lower(), dn.grad, (dn.gamma - gm) / h, n);
        jumps.push_back(std::abs(fu - fl));
    }
    Checks c;
    c.at_most("continuity across the interface", cont, p.get("continuity_tol", 1e-6));
    c.at_most("conormal flux matching", flux, p.get("flux_tol", 1e-5));
    Json orders = Json::array();
    for (std::size_t i = 1; i < jumps.size(); ++i) {
        const double order = std::log(jumps[i - 1] / jumps[i]) / std::log(steps[i - 1] / steps[i]);
        orders.push_back(finite_or_null(order));
        c.at_least("one-sided flux jump order, step " + std::to_string(steps[i]), order, p.get("min_order", 0.9));
    }
    Json d;
    d["steps"] = steps;
    d["flux_jumps"] = jumps;
    d["orders"] = orders;
    return {"transmission", c.list, d.dump()};
}

VerifyReport mass(const TwoLayerMedium& m, EvaluatorPtr ev, const Params& p) {
    const int n = m.dim();
    const std::vector<double> times = p.get("times", std::vector<double>{0.01, 0.1, 1.0});
    const std::vector<double> heights = p.get("source_heights", std::vector<double>{0.3, -0.4});
    const double tol = p.get("tolerance", 1e-4);
    Checks c;
    Json rows = Json::array();
    for (double yn : heights) {
        for (double T : times) {
            const double mv = mass_integral(*ev, T, axis_point(n, yn, 0.1));
            char label[64];
            std::snprintf(label, sizeof label, "|mass - 1|, y_n=%g, t-s=%g", yn, T);
            c.at_most(label, std::abs(mv - 1.0), tol);
            rows.push_back({{"source_height", yn}, {"elapsed", T}, {"mass", mv}});
        }
    }
    Json d;
    d["masses"] = rows;
    return {"mass", c.list, d.dump()};
}

VerifyReport delta(const TwoLayerMedium& m, EvaluatorPtr ev, const Params& p) {
    const int n = m.dim();
    const Point y = p.point("source", axis_point(n, 0.5, 0.1), n);
    const double width2 = p.get("bump_width2", 0.5);
    const double t0 = p.get("first_time", 0.004);
    const int count = p.get("halvings", 5);
    if (count < 3 || !(t0 > 0.0) || !(width2 > 0.0)) fail(ErrorCode::kInvalidArgument, "bad delta harness setup");
    std::vector<double> ts;
    for (int k = 0; k < count; ++k) ts.push_back(std::ldexp(t0, -k));

    const TestFunction bump = [&](const Point& x) {
        double r2 = 0.0;
        for (int i = 0; i < n; ++i) r2 += (x[i] - y[i]) * (x[i] - y[i]);
        return std::exp(-r2 / width2);
    };
    const std::vector<double> v = delta_recovery(*ev, y, bump, ts);
    std::vector<double> err;
    for (double x : v) err.push_back(std::abs(x - 1.0));
    Checks c;
    Json orders = Json::array();
    for (std::size_t i = 1; i < err.size(); ++i) {
        const double order = std::log2(err[i - 1] / err[i]);
        orders.push_back(finite_or_null(order));
        c.at_least("error order in t-s, t-s=" + std::to_string(ts[i]), order, p.get("min_order", 0.9));
    }
    // φ supported on the far side of the interface: the values vanish with t - s.
    const TestFunction far_side = [&](const Point& x) {
        const double r = (x[n - 1] + std::copysign(0.5, y[n - 1])) / 0.3;
        return std::abs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0;
    };
    const std::vector<double> w = delta_recovery(*ev, y, far_side, ts);
    c.at_most("far-side test function at the last time", std::abs(w.back()), 1e-10);
    Json d;
    d["times"] = ts;
    d["values"] = v;
    d["errors"] = err;
    d["orders"] = orders;
    d["far_side_values"] = w;
    return {"delta", c.list, d.dump()};
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

VerifyReport adjoint(const TwoLayerMedium& m, EvaluatorPtr ev, const Params& p, const VerifyOptions& opts) {
    const int n = m.dim();
    const int samples = p.get("samples", 50);
    std::string geometry;
    const Cube cube{1.0, Point{}};
    std::optional<Green> g;
    try {
        CubeGreenOptions co;
        co.aronson_constant = p.get("aronson_constant", 4.0 * std::max(1.0, m.max_eigenvalue()));
        co.tail_tolerance = p.get("tail_tolerance", 1e-6);
        g = cube_green_function(ev, cube, p.get("depth", 3), co);
        geometry = "cube";
    } catch (const Error& e) {
        if (e.code() != ErrorCode::kUnsupportedGeometry) throw;
    }
    if (!g) {
        try {
            g = half_space_green(ev, HalfSpaceFace{0, -1.0, 1});
            geometry = n == 1 ? "half-line" : "half-space";
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kUnsupportedGeometry) throw;
            g = whole_space_green(ev);
            geometry = "whole space";
        }
    }
    const Green gs = adjoint_green(*g);
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u(-0.8, 0.8), ut(0.05, 0.6);
    int mismatched = 0;
    double grad_err = 0.0;
    const double h = 1e-4;
    for (int k = 0; k < samples; ++k) {
        Point x{}, y{};
        for (int i = 0; i < n; ++i) {
            x[i] = u(rng);
            y[i] = u(rng);
        }
        if (x[n - 1] == 0.0 || y[n - 1] == 0.0) continue;
        const double s = 1.0, t = s - ut(rng);
        const KernelValue a = gs(x, t, y, s, k % 5 == 0);
        const KernelValue b = (*g)(y, s, x, t, false);
        if (!same_bits(a.gamma, b.gamma)) ++mismatched;
        if (k % 5 == 0 && std::abs(x[n - 1]) > 2 * h) {
            for (int i = 0; i < n; ++i) {
                Point xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                const double fd = (gs(xp, t, y, s).gamma - gs(xm, t, y, s).gamma) / (2 * h);
                double scale = 0.0;
                for (int j = 0; j < n; ++j) scale += std::abs(a.grad[j]);
                grad_err = std::max(grad_err, std::abs(a.grad[i] - fd) / std::max(scale, 1e-300));
            }
        }
    }
    Checks c;
    c.at_most("values differing in any bit", mismatched, 0.0);
    c.at_most("adjoint gradient against differences", grad_err, p.get("gradient_tol", 5e-4));
    Json d;
    d["geometry"] = geometry;
    d["samples"] = samples;
    return {"adjoint", c.list, d.dump()};
}

}  // namespace

bool VerifyReport::passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

std::string VerifyReport::to_json() const {
    Json j;
    j["harness"] = harness;
    j["passed"] = passed();
    j["checks"] = Json::array();
    for (const VerifyCheck& c : checks) {
        j["checks"].push_back(
            {{"name", c.name}, {"value", finite_or_null(c.value)}, {"limit", finite_or_null(c.limit)}, {"passed", c.passed}});
    }
    j["details"] = Json::parse(details);
    return j.dump(2);
}

const std::vector<std::string>& harness_names() {
    static const std::vector<std::string> names = {"aronson",      "gradient", "qrho",  "interior", "schur",
                                                   "transmission", "mass",     "delta", "adjoint"};
    return names;
}

VerifyReport run_verify(std::string_view harness, const TwoLayerMedium& medium, const QuadratureConfig& quad,
                        const VerifyOptions& opts) {
    const Params p(opts.params_json);
    const EvaluatorPtr ev = std::make_shared<const KernelEvaluator>(medium, quad);
    if (harness == "aronson") return gaussian_fit(false, medium, ev, p, opts);
    if (harness == "gradient") return gaussian_fit(true, medium, ev, p, opts);
    if (harness == "qrho") return qrho(medium, ev, p, opts);
    if (harness == "interior") return interior(medium, p, opts);
    if (harness == "schur") return schur(medium, ev, p, opts);
    if (harness == "transmission") return transmission(medium, ev, p);
    if (harness == "mass") return mass(medium, ev, p);
    if (harness == "delta") return delta(medium, ev, p);
    if (harness == "adjoint") return adjoint(medium, ev, p, opts);
    fail(ErrorCode::kInvalidArgument, "unknown harness '" + std::string(harness) + "'");
}

void OracleComparisonSpec::validate(int dim) const {
    if (dim < 1 || dim > 2) fail(ErrorCode::kUnsupportedDimension, "oracle comparison needs n = 1 or 2");
    if (levels.size() < 3) fail(ErrorCode::kInvalidArgument, "need at least three grid levels");
    if (!std::is_sorted(levels.begin(), levels.end())) fail(ErrorCode::kInvalidArgument, "levels must increase");
    if (!(elapsed > 0.0 && half_width > 0.0 && max_dt > 0.0 && width_factor >= 2.0 && bulk_level > 0.0 &&
          bulk_level < 1.0 && exclusion_widths >= 0.0 && interface_band >= 0.0)) {
        fail(ErrorCode::kInvalidArgument, "bad oracle comparison parameters");
    }
    for (int i = 0; i < dim; ++i) {
        if (std::abs(source[i]) >= half_width) fail(ErrorCode::kInvalidArgument, "source outside the box");
    }
}

std::string OracleComparison::to_json() const {
    Json j;
    j["levels"] = Json::array();
    for (const OracleLevel& l : levels) {
        j["levels"].push_back({{"nodes_per_dim", l.nodes_per_dim},
                               {"spacing", l.spacing},
                               {"bulk_nodes", l.bulk_nodes},
                               {"linf_rel", l.linf},
                               {"l2_rel", l.l2},
                               {"interface_linf_rel", finite_or_null(l.interface_linf)},
                               {"linf_order", finite_or_null(l.linf_order)},
                               {"l2_order", finite_or_null(l.l2_order)},
                               {"interface_order", finite_or_null(l.interface_order)}});
    }
    return j.dump(2);
}

OracleComparison compare_oracle(const KernelEvaluator& ev, const OracleComparisonSpec& spec) {
    const TwoLayerMedium& m = ev.medium();
    const int n = m.dim();
    spec.validate(n);
    OracleComparison out;
    for (int N : spec.levels) {
        const double h = 2.0 * spec.half_width / (N - 1);
        const Grid grid = Grid::make(Cube{spec.half_width, Point{}}, n, N, std::min(spec.max_dt, h), 0.0, spec.elapsed);
        const double eps = spec.width_factor * h;
        SolveOptions so;
        so.scheme = TimeScheme::kCrankNicolson;
        const GridFunction u = approximate_kernel(m, spec.source, eps, grid, BoundaryCondition::none(), so);

        std::vector<KernelQuery> qs;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < grid.node_count(); ++i) {
            const Point x = grid.node(i);
            if (std::abs(x[n - 1]) < 1e-9 * h) continue;  // interface nodes: no pointwise kernel value
            qs.push_back({x, spec.elapsed, spec.source, 0.0});
            idx.push_back(i);
        }
        const std::vector<KernelValue> vals = ev.eval_batch(qs, false);
        double peak = 0.0;
        for (const KernelValue& v : vals) peak = std::max(peak, v.gamma);

        OracleLevel lv;
        lv.nodes_per_dim = N;
        lv.spacing = h;
        lv.interface_linf = std::nan("");
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < qs.size(); ++k) {
            const double r = vals[k].gamma;
            if (r < spec.bulk_level * peak) continue;
            double d2 = 0.0;
            for (int i = 0; i < n; ++i) d2 += (qs[k].x[i] - spec.source[i]) * (qs[k].x[i] - spec.source[i]);
            if (std::sqrt(d2) < spec.exclusion_widths * eps) continue;
            const double e = u.last()[idx[k]] - r;
            lv.linf = std::max(lv.linf, std::abs(e) / r);
            if (std::abs(qs[k].x[n - 1]) <= spec.interface_band) {
                lv.interface_linf = std::isnan(lv.interface_linf) ? std::abs(e) / r
                                                                  : std::max(lv.interface_linf, std::abs(e) / r);
            }
            num += e * e;
            den += r * r;
            ++lv.bulk_nodes;
        }
        if (lv.bulk_nodes == 0) fail(ErrorCode::kInvalidArgument, "no bulk nodes on the grid");
        lv.l2 = std::sqrt(num / den);
        lv.linf_order = lv.l2_order = lv.interface_order = std::nan("");
        if (!out.levels.empty()) {
            const OracleLevel& pv = out.levels.back();
            const double r = std::log(pv.spacing / h);
            lv.linf_order = std::log(pv.linf / lv.linf) / r;
            lv.l2_order = std::log(pv.l2 / lv.l2) / r;
            lv.interface_order = std::log(pv.interface_linf / lv.interface_linf) / r;
        }
        out.levels.push_back(lv);
    }
    return out;
}

}  // namespace layerheat
