#include "layerheat/oracle.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace layerheat {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

struct Operator {
    SpMat stiffness;
    Vec mass;
};

std::size_t flat(const Grid& g, int i0, int i1) { return static_cast<std::size_t>(i0) + g.nodes_per_dim * i1; }

void check_interface(const TwoLayerMedium& m, const Grid& g) {
    if (m.is_homogeneous()) return;
    const int k = g.dim - 1;
    const double lo = g.box.center[k] - g.box.half_width, hi = g.box.center[k] + g.box.half_width;
    if (!(lo < 0.0 && 0.0 < hi)) return;
    const double pos = -lo / g.spacing();
    if (std::abs(pos - std::round(pos)) > 1e-9 * std::max(1.0, pos)) {
        fail(ErrorCode::kInterfaceNotOnGrid, "no grid plane lies on x_n = 0");
    }
}

Operator assemble(const TwoLayerMedium& m, const Grid& g) {
    const int N = g.nodes_per_dim;
    const double h = g.spacing();
    std::vector<Eigen::Triplet<double>> trip;
    Vec mass = Vec::Zero(static_cast<Eigen::Index>(g.node_count()));
    auto add = [&](std::size_t p, std::size_t q, double v) {
        trip.emplace_back(static_cast<int>(p), static_cast<int>(q), v);
    };
    auto edge = [&](std::size_t p, std::size_t q, double w) {
        add(p, p, w);
        add(q, q, w);
        add(p, q, -w);
        add(q, p, -w);
    };
    const int last = g.dim - 1;
    if (g.dim == 1) {
        for (int i = 0; i + 1 < N; ++i) {
            Point mid{};
            mid[0] = g.node(i)[0] + 0.5 * h;
            const DiffusionTensor& a = piecewise_tensor(m, mid);
            edge(i, i + 1, a(0, 0) / h);
            mass[i] += 0.5 * h;
            mass[i + 1] += 0.5 * h;
        }
    } else {
        for (int j = 0; j + 1 < N; ++j) {
            for (int i = 0; i + 1 < N; ++i) {
                const std::size_t c[4] = {flat(g, i, j), flat(g, i + 1, j), flat(g, i, j + 1), flat(g, i + 1, j + 1)};
                Point mid = g.node(c[0]);
                mid[0] += 0.5 * h;
                mid[last] += 0.5 * h;
                const DiffusionTensor& a = piecewise_tensor(m, mid);
                edge(c[0], c[1], 0.5 * a(0, 0));
                edge(c[2], c[3], 0.5 * a(0, 0));
                edge(c[0], c[2], 0.5 * a(1, 1));
                edge(c[1], c[3], 0.5 * a(1, 1));
                // h² a12 (d1 d2ᵀ + d2 d1ᵀ) with cell-centre differences d = ±1/(2h).
                const double d1[4] = {-1, 1, -1, 1}, d2[4] = {-1, -1, 1, 1};
                const double s = 0.25 * a(0, 1);
                if (s != 0.0) {
                    for (int p = 0; p < 4; ++p) {
                        for (int q = 0; q < 4; ++q) add(c[p], c[q], s * (d1[p] * d2[q] + d2[p] * d1[q]));
                    }
                }
                for (std::size_t k : c) mass[static_cast<Eigen::Index>(k)] += 0.25 * h * h;
            }
        }
    }
    SpMat K(mass.size(), mass.size());
    K.setFromTriplets(trip.begin(), trip.end());
    return {std::move(K), std::move(mass)};
}

}  // namespace

Grid Grid::make(const Cube& box, int dim, int nodes_per_dim, double dt, double t0, double t1) {
    if (dim != 1 && dim != 2) fail(ErrorCode::kUnsupportedDimension, "finite-difference oracle supports n = 1, 2");
    if (nodes_per_dim < 16) fail(ErrorCode::kInvalidArgument, "nodes_per_dim must be >= 16");
    Grid g{box, dim, nodes_per_dim, dt, t0, t1};
    if (!(t1 > t0)) fail(ErrorCode::kInvalidArgument, "time span must satisfy t1 > t0");
    if (!(dt > 0.0) || dt > g.spacing()) fail(ErrorCode::kInvalidArgument, "time step must satisfy 0 < dt <= h");
    return g;
}

std::size_t Grid::node_count() const noexcept {
    std::size_t c = 1;
    for (int i = 0; i < dim; ++i) c *= static_cast<std::size_t>(nodes_per_dim);
    return c;
}

Point Grid::node(std::size_t index) const noexcept {
    Point p{};
    const double h = spacing();
    for (int i = 0; i < dim; ++i) {
        const auto k = index % static_cast<std::size_t>(nodes_per_dim);
        index /= static_cast<std::size_t>(nodes_per_dim);
        p[i] = box.center[i] - box.half_width + static_cast<double>(k) * h;
    }
    return p;
}

bool Grid::on_boundary(std::size_t index) const noexcept {
    for (int i = 0; i < dim; ++i) {
        const auto k = index % static_cast<std::size_t>(nodes_per_dim);
        index /= static_cast<std::size_t>(nodes_per_dim);
        if (k == 0 || k + 1 == static_cast<std::size_t>(nodes_per_dim)) return true;
    }
    return false;
}

int Grid::steps() const noexcept { return std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt - 1e-9))); }

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(const Point&)>& f) {
    GridFunction out(grid);
    std::vector<double> v(grid.node_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(i));
    out.push(grid.t0, std::move(v));
    return out;
}

void GridFunction::push(double t, std::vector<double> v) {
    if (v.size() != grid_.node_count()) fail(ErrorCode::kInvalidArgument, "slice size does not match the grid");
    for (double x : v) {
        if (!std::isfinite(x)) fail(ErrorCode::kSolveFailed, "non-finite value in grid function");
    }
    times_.push_back(t);
    values_.push_back(std::move(v));
}

double GridFunction::interpolate(std::size_t k, const Point& x) const {
    const std::vector<double>& v = values(k);
    const int N = grid_.nodes_per_dim;
    const double h = grid_.spacing();
    std::array<int, 2> base{};
    std::array<double, 2> frac{};
    for (int i = 0; i < grid_.dim; ++i) {
        const double r = (x[i] - (grid_.box.center[i] - grid_.box.half_width)) / h;
        if (r < -1e-9 || r > N - 1 + 1e-9) fail(ErrorCode::kInvalidArgument, "interpolation point outside the grid");
        base[i] = std::clamp(static_cast<int>(std::floor(r)), 0, N - 2);
        frac[i] = std::clamp(r - base[i], 0.0, 1.0);
    }
    if (grid_.dim == 1) return (1.0 - frac[0]) * v[base[0]] + frac[0] * v[base[0] + 1];
    double s = 0.0;
    for (int dj = 0; dj < 2; ++dj) {
        for (int di = 0; di < 2; ++di) {
            const double w = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]);
            s += w * v[flat(grid_, base[0] + di, base[1] + dj)];
        }
    }
    return s;
}

void GridFunction::write_csv(const std::filesystem::path& path) const {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) fail(ErrorCode::kIo, "cannot open " + tmp.string());
        out << (grid_.dim == 1 ? "x1,t,value\n" : "x1,x2,t,value\n");
        char buf[128];
        for (std::size_t k = 0; k < slices(); ++k) {
            for (std::size_t i = 0; i < grid_.node_count(); ++i) {
                const Point p = grid_.node(i);
                if (grid_.dim == 1) {
                    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p[0], times_[k], values_[k][i]);
                } else {
                    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", p[0], p[1], times_[k], values_[k][i]);
                }
                out << buf;
            }
        }
        if (!out) fail(ErrorCode::kIo, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

GridFunction fdm_solve(const TwoLayerMedium& medium, const Grid& grid, const GridFunction& initial,
                       const BoundaryCondition& bc, const SolveOptions& opts) {
    if (medium.dim() != grid.dim) fail(ErrorCode::kUnsupportedDimension, "medium and grid dimensions differ");
    if (initial.slices() == 0) fail(ErrorCode::kInvalidArgument, "initial data has no slices");
    check_interface(medium, grid);
    const Operator op = assemble(medium, grid);
    const auto total = static_cast<Eigen::Index>(grid.node_count());
    const bool dirichlet = bc.kind == BoundaryKind::kDirichlet;

    std::vector<Eigen::Index> unknown(grid.node_count(), -1);
    Eigen::Index nu = 0;
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        if (!(dirichlet && grid.on_boundary(i))) unknown[i] = nu++;
    }
    Eigen::SparseMatrix<double> P(nu, total);  // restriction to the unknowns
    {
        std::vector<Eigen::Triplet<double>> t;
        for (std::size_t i = 0; i < grid.node_count(); ++i) {
            if (unknown[i] >= 0) t.emplace_back(static_cast<int>(unknown[i]), static_cast<int>(i), 1.0);
        }
        P.setFromTriplets(t.begin(), t.end());
    }

    const double dt = grid.step_size();
    const double theta = opts.scheme == TimeScheme::kCrankNicolson ? 0.5 : 1.0;
    const Vec mass_u = P * op.mass;
    SpMat lhs = P * op.stiffness * SpMat(P.transpose());
    lhs *= theta * dt;
    for (Eigen::Index i = 0; i < nu; ++i) lhs.coeffRef(i, i) += mass_u[i];
    Eigen::SimplicialLDLT<SpMat> solver(lhs);
    if (solver.info() != Eigen::Success) fail(ErrorCode::kSolveFailed, "factorization failed");

    auto boundary_values = [&](double t) {
        Vec b = Vec::Zero(total);
        if (dirichlet && bc.data) {
            for (std::size_t i = 0; i < grid.node_count(); ++i) {
                if (unknown[i] < 0) b[static_cast<Eigen::Index>(i)] = bc.data(grid.node(i), t);
            }
        }
        return b;
    };
    auto forcing = [&](double t) {
        Vec f = Vec::Zero(total);
        if (opts.forcing) {
            for (std::size_t i = 0; i < grid.node_count(); ++i) f[static_cast<Eigen::Index>(i)] = opts.forcing(grid.node(i), t);
        }
        return f;
    };

    Vec u = Eigen::Map<const Vec>(initial.values(0).data(), total);
    if (dirichlet) {
        const Vec b = boundary_values(grid.t0);
        for (std::size_t i = 0; i < grid.node_count(); ++i) {
            if (unknown[i] < 0) u[static_cast<Eigen::Index>(i)] = b[static_cast<Eigen::Index>(i)];
        }
    }
    GridFunction out(grid);
    out.push(grid.t0, std::vector<double>(u.data(), u.data() + total));

    const int steps = grid.steps();
    const int startup = opts.scheme == TimeScheme::kCrankNicolson ? std::min(opts.startup_steps, steps) : 0;
    // One backward-Euler step of size dt/2 shares the Crank–Nicolson matrix.
    auto advance = [&](double t_new, double h, double explicit_part, const Vec& f_mid) {
        const Vec b_new = boundary_values(t_new);
        Vec rhs_full = op.mass.cwiseProduct(u) - explicit_part * (op.stiffness * u) - theta * dt * (op.stiffness * b_new);
        if (opts.forcing) rhs_full += h * op.mass.cwiseProduct(f_mid);
        const Vec x = solver.solve(P * rhs_full);
        if (solver.info() != Eigen::Success) fail(ErrorCode::kSolveFailed, "back substitution failed");
        u = b_new + SpMat(P.transpose()) * x;
    };
    Vec f_old = forcing(grid.t0);
    for (int k = 1; k <= steps; ++k) {
        const double t = grid.t0 + k * dt;
        const Vec f_new = forcing(t);
        if (k <= startup) {
            advance(t - 0.5 * dt, 0.5 * dt, 0.0, forcing(t - 0.5 * dt));
            advance(t, 0.5 * dt, 0.0, f_new);
        } else {
            advance(t, dt, (1.0 - theta) * dt, theta * f_new + (1.0 - theta) * f_old);
        }
        f_old = f_new;
        if (k == steps || (opts.store_every > 0 && k % opts.store_every == 0)) {
            out.push(t, std::vector<double>(u.data(), u.data() + total));
        }
    }
    return out;
}

double discrete_mass(const Grid& grid, const std::vector<double>& u, BoundaryKind kind) {
    const double h = grid.spacing();
    double s = 0.0;
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        double w = 1.0;
        std::size_t idx = i;
        for (int d = 0; d < grid.dim; ++d) {
            const auto k = idx % static_cast<std::size_t>(grid.nodes_per_dim);
            idx /= static_cast<std::size_t>(grid.nodes_per_dim);
            const bool edge = k == 0 || k + 1 == static_cast<std::size_t>(grid.nodes_per_dim);
            w *= edge ? 0.5 * h : h;
        }
        if (kind == BoundaryKind::kDirichlet && grid.on_boundary(i)) continue;
        s += w * u[i];
    }
    return s;
}

GridFunction approximate_kernel(const TwoLayerMedium& medium, const Point& y, double eps, const Grid& grid,
                                const BoundaryCondition& bc, const SolveOptions& opts) {
    if (!(eps >= 2.0 * grid.spacing() * (1.0 - 1e-12))) {
        fail(ErrorCode::kInvalidArgument, "mollification width must be at least two grid spacings");
    }
    GridFunction init = GridFunction::sample(grid, [&](const Point& x) {
        double r2 = 0.0;
        for (int i = 0; i < grid.dim; ++i) r2 += (x[i] - y[i]) * (x[i] - y[i]);
        return std::exp(-r2 / (2.0 * eps * eps));
    });
    std::vector<double> v = init.values(0);
    const double m = discrete_mass(grid, v, bc.kind);
    for (double& x : v) x /= m;
    GridFunction normalized(grid);
    normalized.push(grid.t0, std::move(v));
    return fdm_solve(medium, grid, normalized, bc, opts);
}

GridFunction interior_solution_sampler(const TwoLayerMedium& medium, const BoundaryData& boundary, const Grid& grid,
                                       const SolveOptions& opts) {
    if (!boundary) fail(ErrorCode::kInvalidArgument, "boundary data generator is empty");
    const GridFunction zero = GridFunction::sample(grid, [](const Point&) { return 0.0; });
    return fdm_solve(medium, grid, zero, {BoundaryKind::kDirichlet, boundary}, opts);
}

BoundaryData random_smooth_boundary(std::uint64_t seed, int dim, int modes) {
    if (modes < 1) fail(ErrorCode::kInvalidArgument, "need at least one mode");
    struct Mode {
        double amp, omega, phase;
        Point k;
    };
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Mode> ms;
    for (int i = 0; i < modes; ++i) {
        Mode m{(2.0 * u(rng) - 1.0) / modes, 2.0 * u(rng), 2.0 * M_PI * u(rng), {}};
        for (int d = 0; d < dim; ++d) m.k[d] = 3.0 * (2.0 * u(rng) - 1.0);
        ms.push_back(m);
    }
    return [ms, dim](const Point& x, double t) {
        double s = 0.0;
        for (const Mode& m : ms) {
            double arg = m.omega * t + m.phase;
            for (int d = 0; d < dim; ++d) arg += m.k[d] * x[d];
            s += m.amp * std::sin(arg);
        }
        return s;
    };
}

}  // namespace layerheat
