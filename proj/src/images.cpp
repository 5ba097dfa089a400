#include "layerheat/images.hpp"

#include <algorithm>
#include <cmath>

#include "layerheat/quadrature.hpp"

namespace layerheat {

namespace {

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

KernelValue combine(std::span<const KernelValue> vals, std::span<const int> signs, int n) {
    KernelValue out;
    out.region = vals.front().region;
    std::vector<double> buf(vals.size());
    auto reduce = [&](auto&& get) {
        for (std::size_t i = 0; i < vals.size(); ++i) buf[i] = signs[i] * get(vals[i]);
        return pairwise_sum(buf);
    };
    out.gamma = reduce([](const KernelValue& v) { return v.gamma; });
    for (int d = 0; d < n; ++d) out.grad[d] = reduce([d](const KernelValue& v) { return v.grad[d]; });
    for (std::size_t i = 0; i < vals.size(); ++i) {
        out.est_error += vals[i].est_error;
        out.grad_est_error += vals[i].grad_est_error;
        out.imag_residual += vals[i].imag_residual;
    }
    return out;
}

bool is_diagonal(const DiffusionTensor& t) {
    for (int i = 0; i < t.dim(); ++i) {
        for (int j = 0; j < t.dim(); ++j) {
            if (i != j && t(i, j) != 0.0) return false;
        }
    }
    return true;
}

enum class HalfSpaceKind { kMirror, kConormal };

HalfSpaceKind half_space_kind(const TwoLayerMedium& m, const HalfSpaceFace& face) {
    const int n = m.dim();
    if (face.axis < 0 || face.axis >= n) fail(ErrorCode::kInvalidArgument, "face axis out of range");
    if (face.orientation != 1 && face.orientation != -1) fail(ErrorCode::kInvalidArgument, "orientation must be ±1");
    if (m.is_homogeneous()) return HalfSpaceKind::kConormal;
    if (face.axis != n - 1 && reflect_tensor(m.upper(), face.axis) == m.upper() &&
        reflect_tensor(m.lower(), face.axis) == m.lower()) {
        return HalfSpaceKind::kMirror;
    }
    fail(ErrorCode::kUnsupportedGeometry,
         face.axis == n - 1 ? "face parallel to the interface with distinct layers"
                            : "layer tensors are not invariant under reflection across the face");
}

Point half_space_image(const TwoLayerMedium& m, const HalfSpaceFace& face, HalfSpaceKind kind, const Point& y) {
    Point img = y;
    const int k = face.axis;
    if (kind == HalfSpaceKind::kMirror) {
        img[k] = 2.0 * face.offset - y[k];
        return img;
    }
    const DiffusionTensor& a = m.upper();
    const double step = 2.0 * (y[k] - face.offset) / a(k, k);
    for (int i = 0; i < m.dim(); ++i) img[i] = y[i] - step * a(i, k);
    img[k] = 2.0 * face.offset - y[k];
    return img;
}

void check_cube_support(const TwoLayerMedium& m, const Cube& cube) {
    if (!m.is_homogeneous() || !is_diagonal(m.upper())) {
        fail(ErrorCode::kUnsupportedGeometry, "cube Green function needs a homogeneous diagonal medium");
    }
    if (cube.center[m.dim() - 1] != 0.0) {
        fail(ErrorCode::kUnsupportedGeometry, "cube must be centred on the interface plane");
    }
}

struct AxisImage {
    double position;
    int sign;
    int parity;
};

std::vector<AxisImage> axis_images(double lo, double width, double y, int depth) {
    std::vector<AxisImage> out;
    for (int mm = -depth; mm <= depth; ++mm) {
        out.push_back({y + 2.0 * mm * width, 1, 0});
        out.push_back({2.0 * lo - y + 2.0 * mm * width, -1, 1});
    }
    return out;
}

void check_inside(const Cube& cube, int n, const Point& x, const Point& y) {
    for (int i = 0; i < n; ++i) {
        if (!(std::abs(y[i] - cube.center[i]) < cube.half_width)) {
            fail(ErrorCode::kInvalidArgument, "source must lie strictly inside the cube");
        }
        if (!(std::abs(x[i] - cube.center[i]) <= cube.half_width)) {
            fail(ErrorCode::kInvalidArgument, "target must lie in the closed cube");
        }
    }
}

}  // namespace

DiffusionTensor reflect_tensor(const DiffusionTensor& t, int axis) {
    const int n = t.dim();
    if (axis < 0 || axis >= n) fail(ErrorCode::kInvalidArgument, "reflection axis out of range");
    std::vector<double> v(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const bool flip = (i == axis) != (j == axis);
            v[i * n + j] = flip ? -t(i, j) : t(i, j);
        }
    }
    return DiffusionTensor::validate(v, n);
}

ImageExpansion image_expansion(const TwoLayerMedium& medium, const Cube& cube, const Point& y, int depth) {
    if (depth < 1) fail(ErrorCode::kInvalidArgument, "image depth must be >= 1");
    check_cube_support(medium, cube);
    const int n = medium.dim();
    std::vector<std::vector<AxisImage>> axes;
    for (int i = 0; i < n; ++i) {
        axes.push_back(axis_images(cube.center[i] - cube.half_width, 2.0 * cube.half_width, y[i], depth));
    }
    ImageExpansion ex;
    ex.truncation_depth = depth;
    std::array<std::size_t, kMaxDim> idx{};
    while (true) {
        ImageTerm term;
        for (int i = 0; i < n; ++i) {
            const AxisImage& a = axes[i][idx[i]];
            term.source[i] = a.position;
            term.sign *= a.sign;
            term.parity[i] = a.parity;
        }
        ex.terms.push_back(term);
        int d = n - 1;
        for (; d >= 0; --d) {
            if (++idx[d] < axes[d].size()) break;
            idx[d] = 0;
        }
        if (d < 0) break;
    }
    return ex;
}

KernelValue Green::operator()(const Point& x, double t, const Point& y, double s, bool gradient) const {
    const GreenQuery q{x, t, y, s};
    return fn_(std::span(&q, 1), gradient).front();
}

Green whole_space_green(EvaluatorPtr ev) {
    const int n = ev->medium().dim();
    return Green(n, [ev](std::span<const GreenQuery> qs, bool gradient) {
        std::vector<KernelQuery> kq;
        kq.reserve(qs.size());
        for (const GreenQuery& q : qs) kq.push_back(KernelQuery::make(q.x, q.t, q.y, q.s));
        return ev->eval_batch(kq, gradient);
    });
}

namespace {

std::vector<KernelValue> half_space_batch(const KernelEvaluator& ev, const HalfSpaceFace& face,
                                          std::span<const KernelQuery> qs, bool gradient) {
    const TwoLayerMedium& m = ev.medium();
    const HalfSpaceKind kind = half_space_kind(m, face);
    std::vector<KernelQuery> all;
    all.reserve(2 * qs.size());
    for (const KernelQuery& q : qs) {
        if (!face.contains(q.y)) fail(ErrorCode::kInvalidArgument, "source must lie strictly inside the half-space");
        if (face.orientation * (q.x[face.axis] - face.offset) < 0.0) {
            fail(ErrorCode::kInvalidArgument, "target must lie in the closed half-space");
        }
        all.push_back(q);
        all.push_back(KernelQuery{q.x, q.t, half_space_image(m, face, kind, q.y), q.s});
    }
    const std::vector<KernelValue> vals = ev.eval_batch(all, gradient);
    const std::array<int, 2> signs{1, -1};
    std::vector<KernelValue> out;
    out.reserve(qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) out.push_back(combine(std::span(vals).subspan(2 * i, 2), signs, m.dim()));
    return out;
}

}  // namespace

KernelValue half_space_green(const KernelEvaluator& ev, const HalfSpaceFace& face, const KernelQuery& q) {
    return half_space_batch(ev, face, std::span(&q, 1), true).front();
}

Green half_space_green(EvaluatorPtr ev, const HalfSpaceFace& face) {
    half_space_kind(ev->medium(), face);
    return Green(ev->medium().dim(), [ev, face](std::span<const GreenQuery> qs, bool gradient) {
        std::vector<KernelQuery> kq;
        kq.reserve(qs.size());
        for (const GreenQuery& q : qs) kq.push_back(KernelQuery::make(q.x, q.t, q.y, q.s));
        return half_space_batch(*ev, face, kq, gradient);
    });
}

double cube_tail_bound(const Cube& cube, int dim, const Point& x, const Point& y, double elapsed, int depth,
                       double aronson_constant) {
    const double C = aronson_constant;
    if (!(C > 0.0)) fail(ErrorCode::kInvalidArgument, "Aronson constant must be positive");
    const double ct = C * elapsed;
    const double width = 2.0 * cube.half_width;
    std::array<double, kMaxDim> in{}, out{};
    for (int i = 0; i < dim; ++i) {
        const double lo = cube.center[i] - cube.half_width;
        const int far = depth + 2 + static_cast<int>(std::ceil(std::sqrt(ct * 750.0) / (2.0 * width)));
        for (int mm = -far; mm <= far; ++mm) {
            const double d1 = x[i] - (y[i] + 2.0 * mm * width);
            const double d2 = x[i] - (2.0 * lo - y[i] + 2.0 * mm * width);
            const double v = std::exp(-d1 * d1 / ct) + std::exp(-d2 * d2 / ct);
            (std::abs(mm) <= depth ? in[i] : out[i]) += v;
        }
    }
    // Π(in + out) - Π in, expanded so that small tails do not cancel.
    double tail = 0.0;
    for (int i = 0; i < dim; ++i) {
        double term = out[i];
        for (int j = 0; j < dim; ++j) {
            if (j < i) term *= in[j];
            if (j > i) term *= in[j] + out[j];
        }
        tail += term;
    }
    return 2.0 * C * std::pow(elapsed, -0.5 * dim) * tail;
}

CubeGreenValue cube_green(const KernelEvaluator& ev, const Cube& cube, const KernelQuery& q, int depth,
                          const CubeGreenOptions& opts) {
    const TwoLayerMedium& m = ev.medium();
    const int n = m.dim();
    const ImageExpansion ex = image_expansion(m, cube, q.y, depth);
    check_inside(cube, n, q.x, q.y);
    CubeGreenValue out;
    out.tail_bound = cube_tail_bound(cube, n, q.x, q.y, q.elapsed(), depth, opts.aronson_constant);
    if (out.tail_bound > opts.tail_tolerance) {
        fail(ErrorCode::kTruncationInsufficient, "image tail bound " + std::to_string(out.tail_bound) +
                                                     " exceeds tolerance at depth " + std::to_string(depth));
    }
    std::vector<KernelQuery> qs;
    std::vector<int> signs;
    for (const ImageTerm& t : ex.terms) {
        qs.push_back({q.x, q.t, t.source, q.s});
        signs.push_back(t.sign);
    }
    const std::vector<KernelValue> vals = ev.eval_batch(qs, true);
    out.value = combine(vals, signs, n);
    out.terms = static_cast<int>(ex.terms.size());
    return out;
}

Green cube_green_function(EvaluatorPtr ev, const Cube& cube, int depth, const CubeGreenOptions& opts) {
    check_cube_support(ev->medium(), cube);
    return Green(ev->medium().dim(), [ev, cube, depth, opts](std::span<const GreenQuery> qs, bool) {
        std::vector<KernelValue> out;
        out.reserve(qs.size());
        for (const GreenQuery& q : qs) {
            out.push_back(cube_green(*ev, cube, KernelQuery::make(q.x, q.t, q.y, q.s), depth, opts).value);
        }
        return out;
    });
}

Green adjoint_green(const Green& g) {
    return Green(
        g.dim(),
        [g](std::span<const GreenQuery> qs, bool gradient) {
            std::vector<GreenQuery> swapped;
            swapped.reserve(qs.size());
            for (const GreenQuery& q : qs) swapped.push_back({q.y, q.s, q.x, q.t});
            std::vector<KernelValue> vals = g.batch(swapped, false);
            if (gradient) {
                std::vector<GreenQuery> gq;
                gq.reserve(qs.size());
                for (const GreenQuery& q : qs) gq.push_back({q.x, q.s, q.y, q.t});
                const std::vector<KernelValue> gv = g.batch(gq, true);
                for (std::size_t i = 0; i < vals.size(); ++i) {
                    vals[i].grad = gv[i].grad;
                    vals[i].grad_est_error = gv[i].grad_est_error;
                }
            }
            return vals;
        },
        !g.backward());
}

double volume_potential(const Green& gstar, const VectorField& F, const Cube& cube, double t0, const Point& x,
                        double t, const VolumeQuadrature& quad) {
    if (!gstar.backward()) fail(ErrorCode::kInvalidArgument, "volume potential needs the adjoint kernel");
    if (!(t > t0)) fail(ErrorCode::kInvalidArgument, "volume potential needs t > t0");
    const int n = gstar.dim();
    // s = t - (t - t0) v² absorbs the (t - s)^{-1/2} singularity.
    const QuadratureRule vr = composite_gauss(0.0, 1.0, {}, 1, quad.time_nodes);
    std::vector<double> terms;
    for (std::size_t iv = 0; iv < vr.nodes.size(); ++iv) {
        const double v = vr.nodes[iv];
        const double s = t - (t - t0) * v * v;
        const double ws = vr.weights[iv] * 2.0 * (t - t0) * v;
        const double spread = std::sqrt(t - s);
        std::vector<QuadratureRule> axes;
        for (int i = 0; i < n; ++i) {
            const double lo = cube.center[i] - cube.half_width, hi = cube.center[i] + cube.half_width;
            std::vector<double> breaks{x[i]};
            for (double k : {1.0, 3.0, 6.0}) {
                breaks.push_back(x[i] - k * spread);
                breaks.push_back(x[i] + k * spread);
            }
            if (i == n - 1) breaks.push_back(0.0);
            axes.push_back(composite_gauss(lo, hi, breaks, 2, quad.order));
        }
        std::vector<GreenQuery> qs;
        std::vector<double> wy;
        std::array<std::size_t, kMaxDim> idx{};
        while (true) {
            Point y{};
            double w = ws;
            for (int i = 0; i < n; ++i) {
                y[i] = axes[i].nodes[idx[i]];
                w *= axes[i].weights[idx[i]];
            }
            qs.push_back({y, s, x, t});
            wy.push_back(w);
            int d = 0;
            for (; d < n; ++d) {
                if (++idx[d] < axes[d].nodes.size()) break;
                idx[d] = 0;
            }
            if (d == n) break;
        }
        const std::vector<KernelValue> vals = gstar.batch(qs, true);
        for (std::size_t i = 0; i < qs.size(); ++i) {
            const Point f = F(qs[i].x, s);
            double dot = 0.0;
            for (int d = 0; d < n; ++d) dot += f[d] * vals[i].grad[d];
            terms.push_back(-wy[i] * dot);
        }
    }
    return pairwise_sum(terms);
}

}  // namespace layerheat
