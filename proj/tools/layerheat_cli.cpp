// layerheat_cli: batch front end over the C interface.
//
//   layerheat_cli eval|green|verify|compare-oracle --config run.json [--output path] [--seed n]
//
// Exit codes: 0 success, 1 other failure, 2 configuration error,
// 3 quadrature did not converge, 4 unsupported geometry, 5 failed assertion.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "layerheat/layerheat.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfigError = 2, kNotConverged = 3, kUnsupported = 4, kAssertion = 5 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LibraryError : std::runtime_error {
    LibraryError(lh_status s, const std::string& what) : std::runtime_error(what), status(s) {}
    lh_status status;
};

void check(lh_status s) {
    if (s != LH_OK) throw LibraryError(s, lh_last_error());
}

int exit_code(lh_status s) {
    switch (s) {
        case LH_INVALID_ARGUMENT:
        case LH_NOT_SYMMETRIC:
        case LH_NOT_ELLIPTIC:
        case LH_UNSUPPORTED_DIMENSION:
        case LH_ON_INTERFACE:
        case LH_EXPONENT_MISMATCH:
        case LH_INTERFACE_NOT_ON_GRID:
        case LH_CONFIG:
            return kConfigError;
        case LH_QUADRATURE_NOT_CONVERGED:
            return kNotConverged;
        case LH_UNSUPPORTED_GEOMETRY:
            return kUnsupported;
        default:
            return kFailure;
    }
}

template <class T, void (*Destroy)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() {
        if (p) Destroy(p);
    }
};

using Medium = Handle<lh_medium, lh_medium_destroy>;
using Evaluator = Handle<lh_evaluator, lh_evaluator_destroy>;
using GreenHandle = Handle<lh_green, lh_green_destroy>;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_atomically(const fs::path& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

// Field access with dotted-path diagnostics.
class Config {
public:
    Config(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

    Config at(const char* key) const {
        if (!has(key)) throw ConfigError(field(key) + ": missing");
        return {j_.at(key), field(key)};
    }

    template <class T>
    T get(const char* key) const {
        const Config c = at(key);
        try {
            return c.j_.get<T>();
        } catch (const json::exception&) {
            throw ConfigError(c.path_ + ": wrong type");
        }
    }

    template <class T>
    T get(const char* key, T fallback) const {
        return has(key) ? get<T>(key) : fallback;
    }

    std::vector<double> numbers(const char* key, std::size_t count) const {
        std::vector<double> v;
        const Config c = at(key);
        if (c.j_.is_array() && !c.j_.empty() && c.j_.front().is_array()) {
            for (const json& row : c.j_) {
                if (!row.is_array()) throw ConfigError(c.path_ + ": mixed rows");
                for (const json& x : row) {
                    if (!x.is_number()) throw ConfigError(c.path_ + ": expected numbers");
                    v.push_back(x.get<double>());
                }
            }
        } else {
            v = get<std::vector<double>>(key);
        }
        if (v.size() != count) {
            throw ConfigError(c.path_ + ": expected " + std::to_string(count) + " numbers, got " +
                              std::to_string(v.size()));
        }
        return v;
    }

    const json& raw() const { return j_; }
    const std::string& path() const { return path_; }

private:
    std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& j_;
    std::string path_;
};

json parse_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
        throw ConfigError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
}

struct Setup {
    Medium medium;
    Evaluator evaluator;
    lh_quadrature quad{};
    int dim = 0;
    std::uint64_t seed = 0;
    fs::path output;
};

void load_setup(const Config& root, Setup& s) {
    const Config m = root.at("medium");
    s.dim = m.get<int>("dim");
    if (s.dim < 1 || s.dim > 3) throw ConfigError("medium.dim: must be 1, 2 or 3");
    const std::size_t k = static_cast<std::size_t>(s.dim) * s.dim;
    const std::vector<double> upper = m.numbers("upper", k);
    std::optional<std::vector<double>> lower;
    if (m.has("lower")) lower = m.numbers("lower", k);

    lh_quadrature_defaults(&s.quad);
    if (root.has("quadrature")) {
        const Config q = root.at("quadrature");
        const std::string kind = q.get<std::string>("contour_kind", "deformed_hyperbolic");
        if (kind == "deformed_hyperbolic") {
            s.quad.contour_kind = LH_CONTOUR_DEFORMED_HYPERBOLIC;
        } else if (kind == "vertical_bromwich") {
            s.quad.contour_kind = LH_CONTOUR_VERTICAL_BROMWICH;
        } else {
            throw ConfigError("quadrature.contour_kind: unknown kind '" + kind + "'");
        }
        s.quad.sigma_abscissa = q.get("sigma_abscissa", s.quad.sigma_abscissa);
        s.quad.contour_nodes = q.get("contour_nodes", s.quad.contour_nodes);
        s.quad.xi_truncation_radius = q.get("xi_truncation_radius", s.quad.xi_truncation_radius);
        s.quad.xi_nodes_per_dim = q.get("xi_nodes_per_dim", s.quad.xi_nodes_per_dim);
        s.quad.target_rel_tol = q.get("target_rel_tol", s.quad.target_rel_tol);
        s.quad.mu = q.get("mu", s.quad.mu);
        s.quad.max_refinements = q.get("max_refinements", s.quad.max_refinements);
    }
    s.seed = root.get<std::uint64_t>("seed", 20240611);
    if (root.has("output")) s.output = root.get<std::string>("output");

    check(lh_medium_create(s.dim, upper.data(), lower ? lower->data() : nullptr, &s.medium.p));
    check(lh_evaluator_create(s.medium.p, &s.quad, &s.evaluator.p));
}

struct QueryGrid {
    std::vector<double> xs, ts, ys, ss;
    std::size_t count() const { return ts.size(); }
};

QueryGrid load_queries(const Config& root, int n) {
    const Config q = root.at("queries");
    const Config src = q.at("source");
    const std::vector<double> y = src.numbers("y", n);
    const double s = src.get<double>("s", 0.0);
    const std::vector<double> times = q.get<std::vector<double>>("times");
    const Config grid = q.at("grid");
    const std::vector<double> lo = grid.numbers("lower", n), hi = grid.numbers("upper", n);
    std::vector<int> pts = grid.get<std::vector<int>>("points");
    if (static_cast<int>(pts.size()) != n) throw ConfigError("queries.grid.points: one count per axis");
    for (int i = 0; i < n; ++i) {
        if (pts[i] < 1) throw ConfigError("queries.grid.points: counts must be positive");
    }
    QueryGrid g;
    for (double t : times) {
        std::vector<int> idx(n, 0);
        while (true) {
            for (int i = 0; i < n; ++i) {
                const double x = pts[i] == 1 ? lo[i] : lo[i] + (hi[i] - lo[i]) * idx[i] / (pts[i] - 1);
                g.xs.push_back(x);
            }
            g.ys.insert(g.ys.end(), y.begin(), y.end());
            g.ts.push_back(t);
            g.ss.push_back(s);
            int d = 0;
            for (; d < n; ++d) {
                if (++idx[d] < pts[d]) break;
                idx[d] = 0;
            }
            if (d == n) break;
        }
    }
    return g;
}

std::string kernel_csv(const QueryGrid& g, const std::vector<lh_kernel_value>& vals, int n) {
    std::string out;
    for (int i = 1; i <= n; ++i) out += "x" + std::to_string(i) + ",";
    out += "t,";
    for (int i = 1; i <= n; ++i) out += "y" + std::to_string(i) + ",";
    out += "s,gamma,";
    for (int i = 1; i <= n; ++i) out += "grad" + std::to_string(i) + ",";
    out += "est_error\n";
    for (std::size_t k = 0; k < g.count(); ++k) {
        for (int i = 0; i < n; ++i) out += fmt(g.xs[k * n + i]) + ",";
        out += fmt(g.ts[k]) + ",";
        for (int i = 0; i < n; ++i) out += fmt(g.ys[k * n + i]) + ",";
        out += fmt(g.ss[k]) + "," + fmt(vals[k].gamma) + ",";
        for (int i = 0; i < n; ++i) out += fmt(vals[k].grad[i]) + ",";
        out += fmt(vals[k].est_error) + "\n";
    }
    return out;
}

bool wants_gradient(const Config& root) { return root.at("queries").get<bool>("gradient", true); }

int cmd_eval(const Config& root, Setup& s) {
    const QueryGrid g = load_queries(root, s.dim);
    std::vector<lh_kernel_value> vals(g.count());
    check(lh_eval_batch(s.evaluator.p, g.count(), g.xs.data(), g.ts.data(), g.ys.data(), g.ss.data(),
                        wants_gradient(root) ? 1 : 0, vals.data()));
    write_atomically(s.output, kernel_csv(g, vals, s.dim));
    return kOk;
}

int cmd_green(const Config& root, Setup& s) {
    const Config gc = root.at("green");
    const std::string domain = gc.get<std::string>("domain");
    const int n = s.dim;
    GreenHandle green;
    std::vector<double> center(n, 0.0);
    double half_width = 1.0, C = 0.0;
    int depth = 0, axis = 0, orientation = 1;
    double offset = 0.0;
    if (domain == "cube") {
        if (gc.has("center")) center = gc.numbers("center", n);
        half_width = gc.get<double>("half_width", 1.0);
        depth = gc.get<int>("depth", 3);
        C = gc.get<double>("aronson_constant");
        check(lh_green_cube(s.evaluator.p, center.data(), half_width, depth, C, gc.get<double>("tail_tolerance", 1e-9),
                            &green.p));
    } else if (domain == "half_space") {
        axis = gc.get<int>("axis", 0);
        offset = gc.get<double>("offset", 0.0);
        orientation = gc.get<int>("orientation", 1);
        check(lh_green_half_space(s.evaluator.p, axis, offset, orientation, &green.p));
    } else {
        throw ConfigError("green.domain: expected 'cube' or 'half_space'");
    }

    const QueryGrid g = load_queries(root, n);
    std::vector<lh_kernel_value> vals(g.count());
    check(lh_green_eval_batch(green.p, g.count(), g.xs.data(), g.ts.data(), g.ys.data(), g.ss.data(),
                              wants_gradient(root) ? 1 : 0, vals.data()));

    // Boundary points for every query time and the query source.
    const int per_edge = gc.get<int>("boundary_points", 9);
    if (per_edge < 1) throw ConfigError("green.boundary_points: must be positive");
    QueryGrid b;
    auto add = [&](const std::vector<double>& x, std::size_t src) {
        b.xs.insert(b.xs.end(), x.begin(), x.end());
        b.ys.insert(b.ys.end(), g.ys.begin() + static_cast<long>(src * n), g.ys.begin() + static_cast<long>(src * n + n));
        b.ts.push_back(g.ts[src]);
        b.ss.push_back(g.ss[src]);
    };
    std::vector<std::size_t> time_starts;
    for (std::size_t k = 0; k < g.count(); ++k) {
        if (k == 0 || g.ts[k] != g.ts[k - 1]) time_starts.push_back(k);
    }
    for (std::size_t src : time_starts) {
        for (int i = 0; i < per_edge; ++i) {
            const double u = per_edge == 1 ? 0.5 : static_cast<double>(i) / (per_edge - 1);
            if (domain == "cube") {
                for (int face = 0; face < n; ++face) {
                    for (int side : {-1, 1}) {
                        std::vector<double> x(center);
                        x[face] += side * half_width;
                        if (n > 1) {
                            const int other = (face + 1) % n;
                            x[other] += (2.0 * u - 1.0) * half_width;
                        }
                        add(x, src);
                    }
                }
            } else {
                std::vector<double> x(g.ys.begin() + static_cast<long>(src * n),
                                      g.ys.begin() + static_cast<long>(src * n + n));
                x[axis] = offset;
                if (n > 1) x[(axis + 1) % n] += 4.0 * (2.0 * u - 1.0);
                add(x, src);
            }
            if (n == 1) break;
        }
    }
    std::vector<lh_kernel_value> bv(b.count());
    check(lh_green_eval_batch(green.p, b.count(), b.xs.data(), b.ts.data(), b.ys.data(), b.ss.data(), 0, bv.data()));
    double sup = 0.0, allowance = INFINITY;
    bool ok = true;
    for (std::size_t k = 0; k < b.count(); ++k) {
        double tail = 0.0;
        if (domain == "cube") {
            check(lh_cube_tail_bound(n, center.data(), half_width, &b.xs[k * n], &b.ys[k * n], b.ts[k] - b.ss[k], depth,
                                     C, &tail));
        }
        const double allow = tail + 10.0 * bv[k].est_error;
        sup = std::max(sup, std::abs(bv[k].gamma));
        allowance = std::min(allowance, allow);
        if (std::abs(bv[k].gamma) > allow) ok = false;
    }
    write_atomically(s.output, kernel_csv(g, vals, n));
    std::printf("boundary_check points=%zu sup_abs=%s min_allowance=%s pass=%s\n", b.count(), fmt(sup).c_str(),
                fmt(allowance).c_str(), ok ? "true" : "false");
    return ok ? kOk : kAssertion;
}

int cmd_verify(const Config& root, Setup& s, const std::string& harness_override) {
    const Config v = root.at("verify");
    const std::string harness = harness_override.empty() ? v.get<std::string>("harness") : harness_override;
    const std::string params = v.has("params") ? v.at("params").raw().dump() : "{}";
    const double time_power = v.has("perturb") ? v.at("perturb").get<double>("time_power", 0.0) : 0.0;
    char* report = nullptr;
    int passed = 0;
    check(lh_verify(s.medium.p, &s.quad, harness.c_str(), params.c_str(), s.seed, time_power, &report, &passed));
    const std::string text = std::string(report) + "\n";
    lh_string_free(report);
    write_atomically(s.output, text);
    std::fprintf(stderr, "verify %s: %s\n", harness.c_str(), passed ? "pass" : "FAIL");
    return passed ? kOk : kAssertion;
}

int cmd_compare_oracle(const Config& root, Setup& s) {
    if (s.dim > 2) throw ConfigError("medium.dim: oracle comparison needs n = 1 or 2");
    const Config c = root.at("compare_oracle");
    json spec = c.raw();
    const double max_linf = spec.value("max_linf", INFINITY);
    const double min_interface_order = spec.value("min_interface_order", 0.9);
    spec.erase("max_linf");
    spec.erase("min_interface_order");
    char* report = nullptr;
    check(lh_compare_oracle(s.evaluator.p, spec.dump().c_str(), &report));
    json r = json::parse(report);
    lh_string_free(report);
    const double finest = r["levels"].back()["linf_rel"].get<double>();
    bool ok = finest <= max_linf;
    for (std::size_t i = 1; i < r["levels"].size(); ++i) {
        if (!(r["levels"][i]["linf_rel"].get<double>() < r["levels"][i - 1]["linf_rel"].get<double>())) ok = false;
        const json& order = r["levels"][i]["interface_order"];
        if (order.is_number() && order.get<double>() < min_interface_order) ok = false;
    }
    r["max_linf"] = std::isfinite(max_linf) ? json(max_linf) : json(nullptr);
    r["min_interface_order"] = min_interface_order;
    r["passed"] = ok;
    write_atomically(s.output, r.dump(2) + "\n");
    return ok ? kOk : kAssertion;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-layer heat kernel evaluation, Green functions, oracles and verification"};
    app.require_subcommand(1);
    std::string config_path, output, harness;
    std::optional<std::uint64_t> seed;
    std::vector<CLI::App*> subs;
    for (const char* name : {"eval", "green", "verify", "compare-oracle"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("-c,--config", config_path, "JSON run configuration")->required();
        sub->add_option("-o,--output", output, "output path (overrides the config)");
        sub->add_option("--seed", seed, "random seed (overrides the config)");
        if (std::string(name) == "verify") sub->add_option("--harness", harness, "harness name (overrides the config)");
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        const json j = parse_file(config_path);
        const Config root(j, "");
        Setup s;
        load_setup(root, s);
        if (!output.empty()) s.output = output;
        if (seed) s.seed = *seed;
        if (subs[0]->parsed()) return cmd_eval(root, s);
        if (subs[1]->parsed()) return cmd_green(root, s);
        if (subs[2]->parsed()) return cmd_verify(root, s, harness);
        return cmd_compare_oracle(root, s);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const LibraryError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return exit_code(e.status);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kFailure;
    }
}
