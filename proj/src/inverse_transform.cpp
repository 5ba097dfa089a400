#include "layerheat/inverse_transform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <tuple>

#include "layerheat/quadrature.hpp"

namespace layerheat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
// Kernel values this small have no meaningful relative accuracy in double.
constexpr double kUnderflow = 1e-280;
constexpr cplx kI(0.0, 1.0);

// Largest target exponent for discretisation and truncation errors (e^-37 ≈ 1e-16).
constexpr double kDigits = 37.0;
// Minimum value of z·(t - s) at the hyperbola vertex.
constexpr double kVertexExponent = 8.0;
constexpr int kMaxContourNodes = 1 << 18;

double target_digits(double tol) { return std::clamp(1.25 * std::log(1.0 / tol) + 11.0, 20.0, kDigits); }

double tail_ratio_for(double digits) { return std::exp(-digits - 2.0); }

// The ξ' sum cancels down to values far below its largest column, so its
// truncation has to reach the rounding floor whatever the tolerance.
double xi_digits(double digits) { return std::max(digits, 34.0); }

struct TermPlan {
    SymbolTerm term;
    double saddle_c = 0.0;
    std::array<double, 2> shift{};
    std::array<double, 2> dlin{};
};

struct TermSums {
    cplx r0, r1, r0c, r1c;
    double abs0 = 0.0, abs1 = 0.0;
    double tail0 = 0.0, tail1 = 0.0;
};

struct LaplaceContext {
    double ann, bnn, elapsed, mu, alpha;
    double digits;  // discretisation and truncation errors aim at e^-digits
    const QuadratureConfig* cfg;
};

struct NodeValue {
    cplx f0, f1;
    cplx tau;
    cplx weight;
};

NodeValue node_value(const LaplaceContext& cx, const TermPlan& tp, cplx tau, cplx weight, double ma, double mb) {
    const cplx ta = std::sqrt(cx.ann * (tau + ma));
    const cplx tb = std::sqrt(cx.bnn * (tau + mb));
    const SymbolTerm& t = tp.term;
    const cplx amp = term_amplitude(t.amplitude, ta, tb);
    const cplx f0 = weight * amp * std::exp(tau * cx.elapsed - t.decay_a * ta - t.decay_b * tb);
    const cplx f1 = f0 * (t.dtheta_a * ta + t.dtheta_b * tb);
    return {f0, f1, tau, weight};
}

struct HyperbolaShape {
    double zeta, alpha, h, shift;
    int min_half_nodes;
};

HyperbolaShape hyperbola_shape(const LaplaceContext& cx, const TermPlan& tp, double ma, double mb, double xi2,
                               int refinement) {
    const double T = cx.elapsed;
    const double c = tp.saddle_c;
    const double g = std::max(0.0, std::min(ma, mb) - cx.mu * xi2);
    const double saddle = c * c / (4.0 * T * T) - g;
    const double vertex = std::max(kVertexExponent / T, saddle);
    HyperbolaShape s;
    s.alpha = cx.alpha;
    s.zeta = vertex / (1.0 - std::sin(s.alpha));
    s.shift = cx.mu * xi2;
    const double d = 0.5 * s.alpha;
    const double zr = s.zeta * (1.0 - std::sin(s.alpha - d));
    const double excess = std::max(0.0, zr * T - c * std::sqrt(zr + g) + c * c / (4.0 * T));
    // The even-index subset (step 2h) is designed to reach e^-digits.
    s.h = 2.0 * kPi * d / (excess + cx.digits) / 2.0 / std::ldexp(1.0, refinement);
    s.min_half_nodes = cx.cfg->contour_nodes;
    return s;
}

void accumulate(TermSums& s, const NodeValue& v, bool coarse, bool fold) {
    // With conjugate symmetry the mirrored node contributes the conjugate,
    // so the pair sums to twice the real part.
    const double factor = fold ? 2.0 : 1.0;
    const cplx f0 = fold ? cplx(v.f0.real()) : v.f0;
    const cplx f1 = fold ? cplx(v.f1.real()) : v.f1;
    s.r0 += factor * f0;
    s.r1 += factor * f1;
    if (coarse) {
        s.r0c += 2.0 * factor * f0;
        s.r1c += 2.0 * factor * f1;
    }
    s.abs0 += factor * std::abs(v.f0);
    s.abs1 += factor * std::abs(v.f1);
}

// March outward along the hyperbola until the integrand is negligible.
template <class Visit>
void march_hyperbola(const LaplaceContext& cx, const TermPlan& tp, double ma, double mb, double xi2, int refinement,
                     bool both_sides, Visit&& visit) {
    const HyperbolaShape s = hyperbola_shape(cx, tp, ma, mb, xi2, refinement);
    const double tail_ratio = tail_ratio_for(cx.digits);
    double max0 = 0.0, max1 = 0.0;
    int quiet = 0;
    for (int j = 0;; ++j) {
        if (j > kMaxContourNodes) {
            fail(ErrorCode::kQuadratureNotConverged, "Laplace contour did not reach negligible tail");
        }
        bool small = true;
        for (int side : {1, -1}) {
            if (side == -1 && (j == 0 || !both_sides)) continue;
            const double u = side * j * s.h;
            const cplx w = cplx(-s.alpha, u);
            const cplx z = s.zeta * (1.0 + std::sin(w));
            const cplx dz = s.zeta * kI * std::cos(w);
            const cplx weight = s.h * dz / (2.0 * kPi * kI);
            const NodeValue v = node_value(cx, tp, z - s.shift, weight, ma, mb);
            visit(j, side, v);
            const double a0 = std::abs(v.f0), a1 = std::abs(v.f1);
            max0 = std::max(max0, a0);
            max1 = std::max(max1, a1);
            if (!(a0 <= tail_ratio * max0 && a1 <= tail_ratio * max1)) small = false;
            if (!std::isfinite(a0) || !std::isfinite(a1)) {
                fail(ErrorCode::kQuadratureNotConverged, "non-finite Laplace integrand");
            }
        }
        quiet = small ? quiet + 1 : 0;
        if (j >= s.min_half_nodes && j % 2 == 0 && quiet >= 3) break;
    }
}

TermSums laplace_hyperbolic(const LaplaceContext& cx, const TermPlan& tp, double ma, double mb, double xi2,
                            int refinement, bool symmetric) {
    TermSums s;
    march_hyperbola(cx, tp, ma, mb, xi2, refinement, !symmetric, [&](int j, int, const NodeValue& v) {
        accumulate(s, v, j % 2 == 0, symmetric && j > 0);
    });
    return s;
}

TermSums laplace_vertical(const LaplaceContext& cx, const TermPlan& tp, double ma, double mb, int refinement,
                          bool symmetric) {
    const double sigma = cx.cfg->sigma_abscissa;
    const double T = cx.elapsed;
    // Time-domain aliases sit at T + 2πk/h and carry e^{-2πkσ/h}.
    const double h = kPi * sigma / kDigits / std::ldexp(1.0, refinement);
    const double c = tp.saddle_c;
    const double omega = c > 0.0 ? 2.0 * std::pow(40.0 / c, 2) : 1e4 / T;
    const int n = std::clamp(static_cast<int>(std::ceil(omega / h)), cx.cfg->contour_nodes,
                             kMaxContourNodes) & ~1;
    TermSums s;
    NodeValue last{};
    for (int j = 0; j <= n; ++j) {
        for (int side : {1, -1}) {
            if (side == -1 && j == 0) continue;
            if (side == -1 && symmetric) continue;
            const cplx tau(sigma, side * j * h);
            const NodeValue v = node_value(cx, tp, tau, h / (2.0 * kPi), ma, mb);
            accumulate(s, v, j % 2 == 0, symmetric && j > 0);
            last = v;
        }
    }
    // Integration by parts: the neglected oscillatory tail is about |g(Ω)|/T.
    s.tail0 = 2.0 * std::abs(last.f0) / h / T;
    s.tail1 = 2.0 * std::abs(last.f1) / h / T;
    return s;
}

double schur_form(const DiffusionTensor& t, const std::array<double, 2>& xi, int k) {
    double lin = 0.0, quad = 0.0;
    for (int i = 0; i < k; ++i) {
        lin += t(i, k) * xi[i];
        for (int j = 0; j < k; ++j) quad += t(i, j) * xi[i] * xi[j];
    }
    return quad - lin * lin / t.normal();
}

struct GroupResult {
    cplx gamma, gamma_c;
    std::array<cplx, kMaxDim> grad{}, grad_c{};
    double floor0 = 0.0, floor1 = 0.0, tail0 = 0.0, tail1 = 0.0;
};

class GroupSolver {
public:
    GroupSolver(const TwoLayerMedium& m, const QuadratureConfig& cfg, double mu, double xn, double yn, double T)
        : m_(m), cfg_(cfg), k_(m.dim() - 1), xn_(xn), yn_(yn), T_(T) {
        region_ = classify_region(xn, yn);
        const SymbolTerms st = symbol_terms(region_, m, xn, yn);
        const double ann = m.upper().normal(), bnn = m.lower().normal();
        for (int i = 0; i < st.count; ++i) {
            TermPlan p;
            p.term = st.term[i];
            p.saddle_c = std::max(0.0, p.term.decay_a) * std::sqrt(ann) + std::max(0.0, p.term.decay_b) * std::sqrt(bnn);
            for (int j = 0; j < k_; ++j) {
                p.shift[j] = p.term.phase_a * m.upper()(j, k_) + p.term.phase_b * m.lower()(j, k_);
                p.dlin[j] = p.term.dphase_a * m.upper()(j, k_) + p.term.dphase_b * m.lower()(j, k_);
            }
            plans_.push_back(p);
        }
        cx_ = {ann, bnn, T, mu, std::min(std::atan(0.9 * mu), 1.0), target_digits(cfg.target_rel_tol), &cfg_};
    }

    Region region() const noexcept { return region_; }

    std::vector<GroupResult> solve(const std::vector<std::array<double, 2>>& offsets, int refinement) const {
        std::vector<GroupResult> out(offsets.size());
        if (k_ == 0) {
            GroupResult g;
            for (const TermPlan& p : plans_) {
                const TermSums s = column(p, {0.0, 0.0}, refinement);
                g.gamma += s.r0;
                g.gamma_c += s.r0c;
                g.grad[0] += s.r1;
                g.grad_c[0] += s.r1c;
                g.floor0 += s.abs0;
                g.floor1 += s.abs1;
                g.tail0 += s.tail0;
                g.tail1 += s.tail1;
            }
            std::fill(out.begin(), out.end(), g);
            return out;
        }

        double xmax = 0.0;
        for (const auto& x : offsets) {
            for (const TermPlan& p : plans_) {
                for (int j = 0; j < k_; ++j) xmax = std::max(xmax, std::abs(x[j] + p.shift[j]));
            }
        }
        const double width = std::sqrt(4.0 * m_.max_eigenvalue() * T_ * xi_digits(cx_.digits));
        double h = kPi / (xmax + width);
        const double fixed_radius = cfg_.xi_truncation_radius;
        if (fixed_radius > 0.0) h = std::min(h, fixed_radius / cfg_.xi_nodes_per_dim);
        h /= std::ldexp(1.0, refinement);
        const double scale = std::pow(h / (2.0 * kPi), k_);
        const bool sym = cfg_.use_symmetry && k_ == 1;

        double max_col = 0.0;
        int quiet = 0;
        auto add_node = [&](const std::array<double, 2>& xi, double mult, bool coarse) {
            double col_size = 0.0;
            for (const TermPlan& p : plans_) {
                const TermSums s = column(p, xi, refinement);
                col_size = std::max(col_size, std::abs(s.r0) + std::abs(s.r1) / (1.0 + std::abs(xi[0]) + std::abs(xi[1])));
                for (std::size_t q = 0; q < offsets.size(); ++q) {
                    double phase = 0.0, dl = 0.0;
                    for (int j = 0; j < k_; ++j) {
                        phase += xi[j] * (offsets[q][j] + p.shift[j]);
                        dl += xi[j] * p.dlin[j];
                    }
                    GroupResult& g = out[q];
                    const double w = mult * scale;
                    const double wc = coarse ? std::ldexp(w, k_) : 0.0;
                    if (sym) {
                        // R is even in ξ': pair ±ξ.
                        const double cs = std::cos(phase), sn = std::sin(phase);
                        const double r0 = s.r0.real(), r1 = s.r1.real();
                        const double r0c = s.r0c.real(), r1c = s.r1c.real();
                        const double gv = cs * r0, gvc = cs * r0c;
                        const double gt = -xi[0] * sn * r0, gtc = -xi[0] * sn * r0c;
                        const double gn = cs * r1 - dl * sn * r0, gnc = cs * r1c - dl * sn * r0c;
                        g.gamma += w * gv;
                        g.gamma_c += wc * gvc;
                        g.grad[0] += w * gt;
                        g.grad_c[0] += wc * gtc;
                        g.grad[k_] += w * gn;
                        g.grad_c[k_] += wc * gnc;
                    } else {
                        const cplx e = std::exp(kI * phase);
                        g.gamma += w * e * s.r0;
                        g.gamma_c += wc * e * s.r0c;
                        for (int j = 0; j < k_; ++j) {
                            g.grad[j] += w * kI * xi[j] * e * s.r0;
                            g.grad_c[j] += wc * kI * xi[j] * e * s.r0c;
                        }
                        g.grad[k_] += w * e * (s.r1 + kI * dl * s.r0);
                        g.grad_c[k_] += wc * e * (s.r1c + kI * dl * s.r0c);
                    }
                    g.floor0 += w * s.abs0;
                    g.floor1 += w * (s.abs1 + s.abs0 * (std::abs(xi[0]) + std::abs(xi[1])));
                    g.tail0 += w * s.tail0;
                    g.tail1 += w * s.tail1;
                }
            }
            return col_size;
        };

        const int min_nodes = cfg_.xi_nodes_per_dim;
        const int fixed_nodes = fixed_radius > 0.0 ? static_cast<int>(std::ceil(fixed_radius / h)) : -1;
        for (int shell = 0;; ++shell) {
            double shell_size = 0.0;
            const bool coarse_shell = shell % 2 == 0;
            if (k_ == 1) {
                if (sym) {
                    shell_size = add_node({shell * h, 0.0}, shell == 0 ? 1.0 : 2.0, coarse_shell);
                } else {
                    shell_size = add_node({shell * h, 0.0}, 1.0, coarse_shell);
                    if (shell > 0) shell_size = std::max(shell_size, add_node({-shell * h, 0.0}, 1.0, coarse_shell));
                }
            } else {
                for (int i = -shell; i <= shell; ++i) {
                    for (int j = -shell; j <= shell; ++j) {
                        if (std::max(std::abs(i), std::abs(j)) != shell) continue;
                        const bool coarse = i % 2 == 0 && j % 2 == 0;
                        shell_size = std::max(shell_size, add_node({i * h, j * h}, 1.0, coarse));
                    }
                }
            }
            max_col = std::max(max_col, shell_size);
            if (fixed_nodes >= 0) {
                if (shell >= fixed_nodes && shell % 2 == 0) {
                    for (auto& g : out) {
                        g.tail0 += shell_size * scale;
                    }
                    break;
                }
                continue;
            }
            quiet = shell_size <= tail_ratio_for(xi_digits(cx_.digits)) * max_col ? quiet + 1 : 0;
            if (shell >= min_nodes && shell % 2 == 0 && quiet >= 3) break;
            if (shell > 200000) fail(ErrorCode::kQuadratureNotConverged, "ξ' integrand did not decay");
        }
        return out;
    }

    std::vector<ContourNode> contour_nodes(double xi2, int refinement) const {
        std::array<double, 2> xi{std::sqrt(xi2), 0.0};
        const double ma = k_ > 0 ? schur_form(m_.upper(), xi, k_) : 0.0;
        const double mb = k_ > 0 ? schur_form(m_.lower(), xi, k_) : 0.0;
        std::vector<ContourNode> nodes;
        if (cfg_.contour_kind == ContourKind::kVerticalBromwich) {
            const double sigma = cfg_.sigma_abscissa;
            const double h = kPi * sigma / kDigits / std::ldexp(1.0, refinement);
            for (int j = -cfg_.contour_nodes; j <= cfg_.contour_nodes; ++j) {
                nodes.push_back({cplx(sigma, j * h), h / (2.0 * kPi)});
            }
            return nodes;
        }
        march_hyperbola(cx_, plans_.front(), ma, mb, xi2, refinement, true,
                        [&](int, int, const NodeValue& v) { nodes.push_back({v.tau, v.weight}); });
        return nodes;
    }

private:
    TermSums column(const TermPlan& p, const std::array<double, 2>& xi, int refinement) const {
        const double ma = k_ > 0 ? schur_form(m_.upper(), xi, k_) : 0.0;
        const double mb = k_ > 0 ? schur_form(m_.lower(), xi, k_) : 0.0;
        const double xi2 = xi[0] * xi[0] + xi[1] * xi[1];
        const bool sym = cfg_.use_symmetry;
        if (cfg_.contour_kind == ContourKind::kVerticalBromwich) {
            return laplace_vertical(cx_, p, ma, mb, refinement, sym);
        }
        return laplace_hyperbolic(cx_, p, ma, mb, xi2, refinement, sym);
    }

    const TwoLayerMedium& m_;
    const QuadratureConfig& cfg_;
    int k_;
    double xn_, yn_, T_;
    Region region_;
    std::vector<TermPlan> plans_;
    LaplaceContext cx_{};
};

double abs_vec(const std::array<cplx, kMaxDim>& v, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::norm(v[i]);
    return std::sqrt(s);
}

std::vector<KernelValue> finish_group(const GroupSolver& gs, const std::vector<std::array<double, 2>>& offsets,
                                      const QuadratureConfig& cfg, int n, bool gradient) {
    for (int r = 0;; ++r) {
        const std::vector<GroupResult> res = gs.solve(offsets, r);
        std::vector<KernelValue> out(res.size());
        bool ok = true;
        for (std::size_t q = 0; q < res.size(); ++q) {
            const GroupResult& g = res[q];
            KernelValue& kv = out[q];
            kv.region = gs.region();
            kv.gamma = g.gamma.real();
            kv.imag_residual = std::abs(g.gamma.imag());
            const double floor0 = 16.0 * kEps * g.floor0;
            kv.est_error = std::abs(g.gamma - g.gamma_c) + floor0 + g.tail0;
            std::array<cplx, kMaxDim> diff{};
            for (int i = 0; i < n; ++i) {
                kv.grad[i] = g.grad[i].real();
                diff[i] = g.grad[i] - g.grad_c[i];
            }
            const double floor1 = 16.0 * kEps * g.floor1;
            kv.grad_est_error = abs_vec(diff, n) + floor1 + g.tail1;
            const double tol = cfg.target_rel_tol;
            if (kv.est_error > tol * std::abs(kv.gamma) + 4.0 * floor0 + kUnderflow) ok = false;
            if (gradient && kv.grad_est_error > tol * abs_vec(g.grad, n) + 4.0 * floor1 + kUnderflow) ok = false;
        }
        if (ok) return out;
        if (r >= cfg.max_refinements) {
            fail(ErrorCode::kQuadratureNotConverged,
                 "error estimate above target after " + std::to_string(r) + " refinements");
        }
    }
}

}  // namespace

void QuadratureConfig::validate() const {
    if (contour_nodes < 8 || xi_nodes_per_dim < 8) fail(ErrorCode::kInvalidArgument, "node counts must be >= 8");
    if (!(target_rel_tol > 0.0 && target_rel_tol < 1.0)) {
        fail(ErrorCode::kInvalidArgument, "target_rel_tol must lie in (0, 1)");
    }
    if (!(sigma_abscissa > 0.0)) fail(ErrorCode::kInvalidArgument, "sigma_abscissa must be positive");
    if (!(xi_truncation_radius >= 0.0)) fail(ErrorCode::kInvalidArgument, "xi_truncation_radius must be >= 0");
    if (mu && !(*mu > 0.0)) fail(ErrorCode::kInvalidArgument, "mu must be positive");
    if (max_refinements < 0) fail(ErrorCode::kInvalidArgument, "max_refinements must be >= 0");
}

KernelEvaluator::KernelEvaluator(TwoLayerMedium medium, QuadratureConfig cfg)
    : medium_(std::move(medium)), cfg_(std::move(cfg)) {
    cfg_.validate();
    mu_ = cfg_.mu ? *cfg_.mu : certify_mu(medium_);
    cfg_.mu = mu_;
}

KernelValue KernelEvaluator::eval(const KernelQuery& q, bool gradient) const {
    return eval_batch(std::span(&q, 1), gradient).front();
}

std::vector<KernelValue> KernelEvaluator::eval_batch(std::span<const KernelQuery> qs, bool gradient) const {
    const int n = medium_.dim();
    const int k = n - 1;
    using Key = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>;
    std::map<Key, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const KernelQuery& q = qs[i];
        if (!(q.t > q.s)) fail(ErrorCode::kInvalidArgument, "kernel query requires t > s");
        for (int d = 0; d < n; ++d) {
            if (!std::isfinite(q.x[d]) || !std::isfinite(q.y[d])) fail(ErrorCode::kInvalidArgument, "non-finite point");
        }
        groups[{std::bit_cast<std::uint64_t>(q.x[k]), std::bit_cast<std::uint64_t>(q.y[k]),
                std::bit_cast<std::uint64_t>(q.t - q.s)}]
            .push_back(i);
    }
    std::vector<KernelValue> out(qs.size());
    for (const auto& [key, idx] : groups) {
        const KernelQuery& q0 = qs[idx.front()];
        const GroupSolver gs(medium_, cfg_, mu_, q0.x[k], q0.y[k], q0.t - q0.s);
        std::vector<std::array<double, 2>> offsets;
        for (std::size_t i : idx) {
            std::array<double, 2> o{};
            for (int j = 0; j < k; ++j) o[j] = qs[i].x[j] - qs[i].y[j];
            offsets.push_back(o);
        }
        const std::vector<KernelValue> vals = finish_group(gs, offsets, cfg_, n, gradient);
        for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]] = vals[j];
    }
    return out;
}

Contour KernelEvaluator::contour(const KernelQuery& q, double xi_norm2, int refinement) const {
    const int k = medium_.dim() - 1;
    const GroupSolver gs(medium_, cfg_, mu_, q.x[k], q.y[k], q.elapsed());
    Contour c;
    c.xi_norm2 = xi_norm2;
    c.nodes = gs.contour_nodes(xi_norm2, refinement);
    return c;
}

KernelValue eval_kernel(const TwoLayerMedium& medium, const KernelQuery& q, const QuadratureConfig& cfg) {
    return KernelEvaluator(medium, cfg).eval(q, false);
}

Point eval_gradient(const TwoLayerMedium& medium, const KernelQuery& q, const QuadratureConfig& cfg) {
    return KernelEvaluator(medium, cfg).eval(q, true).grad;
}

Contour choose_contour(const TwoLayerMedium& medium, const KernelQuery& q, const QuadratureConfig& cfg,
                       double xi_norm2) {
    const KernelEvaluator ev(medium, cfg);
    Contour c = ev.contour(q, xi_norm2);
    const int k = medium.dim() - 1;
    std::array<cplx, kMaxDim - 1> xi{};
    if (k > 0) xi[0] = std::sqrt(xi_norm2);
    for (const ContourNode& node : c.nodes) {
        if (!in_analyticity_domain(SpectralPoint::from_tau(xi, k, node.tau), ev.mu())) {
            fail(ErrorCode::kContourLeavesDomain, "contour node outside the analyticity domain");
        }
    }
    return c;
}

namespace {

struct BoxRule {
    std::vector<Point> points;
    std::vector<double> weights;
};

BoxRule gaussian_box(const KernelEvaluator& ev, double elapsed, const Point& y) {
    const TwoLayerMedium& m = ev.medium();
    const int n = m.dim();
    const double half = std::sqrt(4.0 * m.max_eigenvalue() * elapsed * 40.0);
    const int panels = 6;
    const int order = 16;
    std::vector<QuadratureRule> axes;
    for (int d = 0; d < n; ++d) {
        std::vector<double> breaks{y[d]};
        if (d == n - 1) breaks.push_back(0.0);
        axes.push_back(composite_gauss(y[d] - half, y[d] + half, breaks, panels, order));
    }
    BoxRule r;
    std::array<std::size_t, kMaxDim> idx{};
    while (true) {
        Point p{};
        double w = 1.0;
        for (int d = 0; d < n; ++d) {
            p[d] = axes[d].nodes[idx[d]];
            w *= axes[d].weights[idx[d]];
        }
        r.points.push_back(p);
        r.weights.push_back(w);
        int d = 0;
        for (; d < n; ++d) {
            if (++idx[d] < axes[d].nodes.size()) break;
            idx[d] = 0;
        }
        if (d == n) break;
    }
    return r;
}

}  // namespace

double mass_integral(const KernelEvaluator& ev, double elapsed, const Point& y) {
    const std::vector<double> one{elapsed};
    return delta_recovery(ev, y, [](const Point&) { return 1.0; }, one).front();
}

double mass_integral(const TwoLayerMedium& medium, double elapsed, const Point& y, const QuadratureConfig& cfg) {
    return mass_integral(KernelEvaluator(medium, cfg), elapsed, y);
}

std::vector<double> delta_recovery(const KernelEvaluator& ev, const Point& y, const TestFunction& phi,
                                   std::span<const double> elapsed) {
    std::vector<double> out;
    for (double T : elapsed) {
        if (!(T > 0.0)) fail(ErrorCode::kInvalidArgument, "elapsed time must be positive");
        const BoxRule box = gaussian_box(ev, T, y);
        std::vector<KernelQuery> qs;
        qs.reserve(box.points.size());
        for (const Point& p : box.points) qs.push_back({p, T, y, 0.0});
        const std::vector<KernelValue> vals = ev.eval_batch(qs, false);
        double sum = 0.0;
        for (std::size_t i = 0; i < vals.size(); ++i) sum += box.weights[i] * vals[i].gamma * phi(box.points[i]);
        out.push_back(sum);
    }
    return out;
}

}  // namespace layerheat
