#include "layerheat/layerheat.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "layerheat/images.hpp"
#include "layerheat/verify.hpp"

using namespace layerheat;

struct lh_medium {
    TwoLayerMedium m;
};

struct lh_evaluator {
    EvaluatorPtr ev;
};

struct lh_green {
    Green g;
};

namespace {

thread_local std::string g_last_error;

template <class F>
lh_status guarded(F&& f) {
    try {
        f();
        g_last_error.clear();
        return LH_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return static_cast<lh_status>(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return LH_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return LH_INTERNAL;
    }
}

void require(bool ok, const char* what) {
    if (!ok) fail(ErrorCode::kInvalidArgument, what);
}

Point load(const double* p, int n) {
    Point x{};
    for (int i = 0; i < n; ++i) x[i] = p[i];
    return x;
}

QuadratureConfig to_config(const lh_quadrature* c) {
    QuadratureConfig cfg;
    if (!c) return cfg;
    if (c->contour_kind != LH_CONTOUR_VERTICAL_BROMWICH && c->contour_kind != LH_CONTOUR_DEFORMED_HYPERBOLIC) {
        fail(ErrorCode::kInvalidArgument, "unknown contour kind");
    }
    cfg.contour_kind = static_cast<ContourKind>(c->contour_kind);
    cfg.sigma_abscissa = c->sigma_abscissa;
    cfg.contour_nodes = c->contour_nodes;
    cfg.xi_truncation_radius = c->xi_truncation_radius;
    cfg.xi_nodes_per_dim = c->xi_nodes_per_dim;
    cfg.target_rel_tol = c->target_rel_tol;
    if (c->mu > 0.0) cfg.mu = c->mu;
    cfg.max_refinements = c->max_refinements;
    return cfg;
}

void store(const KernelValue& v, lh_kernel_value* out) {
    out->gamma = v.gamma;
    for (int i = 0; i < 3; ++i) out->grad[i] = v.grad[i];
    out->est_error = v.est_error;
    out->grad_est_error = v.grad_est_error;
    out->imag_residual = v.imag_residual;
}

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::vector<GreenQuery> load_queries(int n, size_t count, const double* xs, const double* ts, const double* ys,
                                     const double* ss) {
    require(count == 0 || (xs && ts && ys && ss), "null query arrays");
    std::vector<GreenQuery> qs(count);
    for (size_t i = 0; i < count; ++i) qs[i] = {load(xs + i * n, n), ts[i], load(ys + i * n, n), ss[i]};
    return qs;
}

}  // namespace

extern "C" {

const char* lh_status_name(lh_status status) { return to_string(static_cast<ErrorCode>(status)).data(); }

const char* lh_last_error(void) { return g_last_error.c_str(); }

void lh_quadrature_defaults(lh_quadrature* cfg) {
    if (!cfg) return;
    const QuadratureConfig d;
    cfg->contour_kind = static_cast<int>(d.contour_kind);
    cfg->sigma_abscissa = d.sigma_abscissa;
    cfg->contour_nodes = d.contour_nodes;
    cfg->xi_truncation_radius = d.xi_truncation_radius;
    cfg->xi_nodes_per_dim = d.xi_nodes_per_dim;
    cfg->target_rel_tol = d.target_rel_tol;
    cfg->mu = 0.0;
    cfg->max_refinements = d.max_refinements;
}

lh_status lh_medium_create(int dim, const double* upper, const double* lower, lh_medium** out) {
    return guarded([&] {
        require(out && upper, "null argument");
        require(dim >= 1 && dim <= kMaxDim, "dimension must be 1, 2 or 3");
        const std::size_t k = static_cast<std::size_t>(dim) * dim;
        const DiffusionTensor a = DiffusionTensor::validate(std::span(upper, k), dim);
        const DiffusionTensor b = lower ? DiffusionTensor::validate(std::span(lower, k), dim) : a;
        *out = new lh_medium{TwoLayerMedium(a, b)};
    });
}

void lh_medium_destroy(lh_medium* medium) { delete medium; }

int lh_medium_dim(const lh_medium* medium) { return medium ? medium->m.dim() : 0; }

lh_status lh_evaluator_create(const lh_medium* medium, const lh_quadrature* cfg, lh_evaluator** out) {
    return guarded([&] {
        require(medium && out, "null argument");
        *out = new lh_evaluator{std::make_shared<const KernelEvaluator>(medium->m, to_config(cfg))};
    });
}

void lh_evaluator_destroy(lh_evaluator* ev) { delete ev; }

double lh_evaluator_mu(const lh_evaluator* ev) { return ev ? ev->ev->mu() : 0.0; }

lh_status lh_eval(const lh_evaluator* ev, const double* x, double t, const double* y, double s, int gradient,
                  lh_kernel_value* out) {
    return guarded([&] {
        require(ev && x && y && out, "null argument");
        const int n = ev->ev->medium().dim();
        store(ev->ev->eval(KernelQuery::make(load(x, n), t, load(y, n), s), gradient != 0), out);
    });
}

lh_status lh_eval_batch(const lh_evaluator* ev, size_t count, const double* xs, const double* ts, const double* ys,
                        const double* ss, int gradient, lh_kernel_value* out) {
    return guarded([&] {
        require(ev && (count == 0 || out), "null argument");
        const int n = ev->ev->medium().dim();
        std::vector<KernelQuery> qs;
        qs.reserve(count);
        for (const GreenQuery& q : load_queries(n, count, xs, ts, ys, ss)) {
            qs.push_back(KernelQuery::make(q.x, q.t, q.y, q.s));
        }
        const std::vector<KernelValue> vals = ev->ev->eval_batch(qs, gradient != 0);
        for (size_t i = 0; i < count; ++i) store(vals[i], out + i);
    });
}

lh_status lh_green_whole_space(const lh_evaluator* ev, lh_green** out) {
    return guarded([&] {
        require(ev && out, "null argument");
        *out = new lh_green{whole_space_green(ev->ev)};
    });
}

lh_status lh_green_half_space(const lh_evaluator* ev, int axis, double offset, int orientation, lh_green** out) {
    return guarded([&] {
        require(ev && out, "null argument");
        *out = new lh_green{half_space_green(ev->ev, HalfSpaceFace{axis, offset, orientation})};
    });
}

lh_status lh_green_cube(const lh_evaluator* ev, const double* center, double half_width, int depth,
                        double aronson_constant, double tail_tolerance, lh_green** out) {
    return guarded([&] {
        require(ev && center && out, "null argument");
        const int n = ev->ev->medium().dim();
        CubeGreenOptions opts;
        opts.aronson_constant = aronson_constant;
        opts.tail_tolerance = tail_tolerance;
        *out = new lh_green{cube_green_function(ev->ev, Cube::make(half_width, load(center, n)), depth, opts)};
    });
}

lh_status lh_green_adjoint(const lh_green* g, lh_green** out) {
    return guarded([&] {
        require(g && out, "null argument");
        *out = new lh_green{adjoint_green(g->g)};
    });
}

void lh_green_destroy(lh_green* g) { delete g; }

lh_status lh_green_eval_batch(const lh_green* g, size_t count, const double* xs, const double* ts, const double* ys,
                              const double* ss, int gradient, lh_kernel_value* out) {
    return guarded([&] {
        require(g && (count == 0 || out), "null argument");
        const std::vector<GreenQuery> qs = load_queries(g->g.dim(), count, xs, ts, ys, ss);
        const std::vector<KernelValue> vals = g->g.batch(qs, gradient != 0);
        for (size_t i = 0; i < count; ++i) store(vals[i], out + i);
    });
}

lh_status lh_cube_tail_bound(int dim, const double* center, double half_width, const double* x, const double* y,
                             double elapsed, int depth, double aronson_constant, double* out) {
    return guarded([&] {
        require(center && x && y && out, "null argument");
        require(dim >= 1 && dim <= kMaxDim, "dimension must be 1, 2 or 3");
        *out = cube_tail_bound(Cube::make(half_width, load(center, dim)), dim, load(x, dim), load(y, dim), elapsed,
                               depth, aronson_constant);
    });
}

lh_status lh_verify(const lh_medium* medium, const lh_quadrature* cfg, const char* harness, const char* params_json,
                    uint64_t seed, double time_power, char** report_json, int* passed) {
    return guarded([&] {
        require(medium && harness && report_json && passed, "null argument");
        VerifyOptions opts;
        opts.seed = seed;
        opts.params_json = params_json ? params_json : "{}";
        opts.time_power = time_power;
        const VerifyReport r = run_verify(harness, medium->m, to_config(cfg), opts);
        *report_json = copy_string(r.to_json());
        *passed = r.passed() ? 1 : 0;
    });
}

lh_status lh_compare_oracle(const lh_evaluator* ev, const char* spec_json, char** report_json) {
    return guarded([&] {
        require(ev && report_json, "null argument");
        const int n = ev->ev->medium().dim();
        OracleComparisonSpec spec;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(spec_json ? spec_json : "{}");
            if (!j.is_object()) fail(ErrorCode::kConfig, "oracle spec must be a JSON object");
            if (j.contains("source")) {
                const std::vector<double> y = j.at("source").get<std::vector<double>>();
                require(static_cast<int>(y.size()) == n, "source needs one entry per axis");
                spec.source = load(y.data(), n);
            }
            spec.elapsed = j.value("elapsed", spec.elapsed);
            spec.half_width = j.value("half_width", spec.half_width);
            spec.levels = j.value("levels", spec.levels);
            spec.max_dt = j.value("max_dt", spec.max_dt);
            spec.width_factor = j.value("width_factor", spec.width_factor);
            spec.bulk_level = j.value("bulk_level", spec.bulk_level);
            spec.exclusion_widths = j.value("exclusion_widths", spec.exclusion_widths);
            spec.interface_band = j.value("interface_band", spec.interface_band);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::kConfig, std::string("oracle spec: ") + e.what());
        }
        *report_json = copy_string(compare_oracle(*ev->ev, spec).to_json());
    });
}

void lh_string_free(char* s) { std::free(s); }

}  // extern "C"
