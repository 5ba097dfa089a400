#pragma once

// Finite-difference reference solver for ∂t u = ∇·(Ā∇u) on boxes, n ∈ {1, 2}.
//
// Nodes sit on a uniform vertex grid and the interface must be one of the
// grid planes, so every cell lies in a single layer. The scheme is the
// gradient of the discrete energy
//   ½ Σ_edges ā_kk (Δ_k u)² + Σ_cells a_12 h² (∂1u ∂2u)_cell,
// with ā_kk the arithmetic mean over the cells sharing the edge and the
// mixed term on the 4-point cell stencil. Row sums vanish, so with the
// natural (no-flux) boundary the lumped mass is conserved exactly.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "layerheat/medium.hpp"

namespace layerheat {

struct Grid {
    Cube box;
    int dim = 1;
    int nodes_per_dim = 17;
    double dt = 0.01;
    double t0 = 0.0;
    double t1 = 1.0;

    /// Checks nodes_per_dim >= 16, 0 < dt <= h, t1 > t0.
    static Grid make(const Cube& box, int dim, int nodes_per_dim, double dt, double t0, double t1);

    double spacing() const noexcept { return 2.0 * box.half_width / (nodes_per_dim - 1); }
    std::size_t node_count() const noexcept;
    Point node(std::size_t index) const noexcept;
    bool on_boundary(std::size_t index) const noexcept;
    /// Number of time steps; dt is shrunk slightly so they tile [t0, t1].
    int steps() const noexcept;
    double step_size() const noexcept { return (t1 - t0) / steps(); }
};

class GridFunction {
public:
    explicit GridFunction(Grid grid) : grid_(std::move(grid)) {}

    static GridFunction sample(const Grid& grid, const std::function<double(const Point&)>& f);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t slices() const noexcept { return times_.size(); }
    double time(std::size_t k) const { return times_.at(k); }
    const std::vector<double>& values(std::size_t k) const { return values_.at(k); }
    const std::vector<double>& last() const { return values_.back(); }
    void push(double t, std::vector<double> v);

    /// Multilinear interpolation in slice k; x must lie in the closed box.
    double interpolate(std::size_t k, const Point& x) const;

    /// Columns x1[,x2],t,value; written to a temporary and renamed.
    void write_csv(const std::filesystem::path& path) const;

private:
    Grid grid_;
    std::vector<double> times_;
    std::vector<std::vector<double>> values_;
};

using BoundaryData = std::function<double(const Point& x, double t)>;

enum class BoundaryKind { kDirichlet, kNone };

struct BoundaryCondition {
    BoundaryKind kind = BoundaryKind::kDirichlet;
    BoundaryData data;  // empty: homogeneous Dirichlet

    static BoundaryCondition dirichlet0() { return {}; }
    static BoundaryCondition none() { return {BoundaryKind::kNone, {}}; }
};

enum class TimeScheme { kImplicitEuler, kCrankNicolson };

struct SolveOptions {
    TimeScheme scheme = TimeScheme::kImplicitEuler;
    int store_every = 0;  // 0 keeps only the first and last slices
    /// Crank–Nicolson only: the first steps are taken as two backward-Euler
    /// half steps each, which damps the rough modes of sharp initial data.
    int startup_steps = 2;
    /// Optional source term f(x, t) added to the right-hand side.
    std::function<double(const Point&, double)> forcing;
};

/// Evolves the first slice of `initial` over the grid's time span.
GridFunction fdm_solve(const TwoLayerMedium& medium, const Grid& grid, const GridFunction& initial,
                       const BoundaryCondition& bc, const SolveOptions& opts = {});

/// Lumped mass Σ M_i u_i of a slice.
double discrete_mass(const Grid& grid, const std::vector<double>& u, BoundaryKind kind);

/// Normalized discrete Gaussian of width eps at y evolved from grid.t0.
GridFunction approximate_kernel(const TwoLayerMedium& medium, const Point& y, double eps, const Grid& grid,
                                const BoundaryCondition& bc = BoundaryCondition::none(),
                                const SolveOptions& opts = {});

/// Solution of the homogeneous equation with zero initial data and the given
/// Dirichlet boundary values.
GridFunction interior_solution_sampler(const TwoLayerMedium& medium, const BoundaryData& boundary, const Grid& grid,
                                       const SolveOptions& opts = {});

/// Smooth bounded boundary data: a few random sine modes in space and time.
BoundaryData random_smooth_boundary(std::uint64_t seed, int dim, int modes = 4);

}  // namespace layerheat
