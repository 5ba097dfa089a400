#pragma once

// Dirichlet Green functions built from the whole-space kernel by reflection.
//
// Supported configurations (anything else raises UnsupportedGeometry):
//  * half-space, face perpendicular to the interface: both tensors must be
//    invariant under reflect_tensor for that axis, and the image is the plain
//    mirror point;
//  * half-space, any face, homogeneous medium: conormal image
//    y* = y - 2 (y_k - offset) / a_kk · A e_k;
//  * cube: homogeneous diagonal medium, cube centred on the interface plane,
//    lattice of mirror images truncated at a given depth.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "layerheat/inverse_transform.hpp"

namespace layerheat {

/// Negates the off-diagonal entries in row and column `axis` (0-based).
DiffusionTensor reflect_tensor(const DiffusionTensor& t, int axis);

/// The half-space {x_axis > offset} (orientation +1) or {x_axis < offset} (-1).
struct HalfSpaceFace {
    int axis = 0;
    double offset = 0.0;
    int orientation = 1;

    bool contains(const Point& x) const noexcept { return orientation * (x[axis] - offset) > 0.0; }
};

struct ImageTerm {
    Point source{};
    int sign = 1;
    std::array<int, kMaxDim> parity{};  // reflections applied per axis, mod 2
};

struct ImageExpansion {
    std::vector<ImageTerm> terms;
    int truncation_depth = 0;
};

/// Lattice images of y for the cube, |m_i| <= depth per axis, in
/// lexicographic order of (m, parity).
ImageExpansion image_expansion(const TwoLayerMedium& medium, const Cube& cube, const Point& y, int depth);

struct GreenQuery {
    Point x{};
    double t = 0.0;
    Point y{};
    double s = 0.0;
};

/// A space-time kernel (x, t; y, s) -> value and ∇_x.
class Green {
public:
    using BatchFn = std::function<std::vector<KernelValue>(std::span<const GreenQuery>, bool gradient)>;

    Green(int dim, BatchFn fn, bool backward = false) : dim_(dim), fn_(std::move(fn)), backward_(backward) {}

    KernelValue operator()(const Point& x, double t, const Point& y, double s, bool gradient = false) const;
    std::vector<KernelValue> batch(std::span<const GreenQuery> qs, bool gradient = false) const {
        return fn_(qs, gradient);
    }

    int dim() const noexcept { return dim_; }
    /// True for kernels of the backward operator ∂t + ∇·Ā∇ (defined for t < s).
    bool backward() const noexcept { return backward_; }

private:
    int dim_;
    BatchFn fn_;
    bool backward_;
};

using EvaluatorPtr = std::shared_ptr<const KernelEvaluator>;

Green whole_space_green(EvaluatorPtr ev);

/// Throws UnsupportedGeometry for configurations outside the list above.
Green half_space_green(EvaluatorPtr ev, const HalfSpaceFace& face);
KernelValue half_space_green(const KernelEvaluator& ev, const HalfSpaceFace& face, const KernelQuery& q);

struct CubeGreenOptions {
    double aronson_constant = 0.0;  // C of the fitted Gaussian bound; must be positive
    double tail_tolerance = 1e-9;   // TruncationInsufficient above this
};

struct CubeGreenValue {
    KernelValue value;
    double tail_bound = 0.0;
    int terms = 0;
};

CubeGreenValue cube_green(const KernelEvaluator& ev, const Cube& cube, const KernelQuery& q, int depth,
                          const CubeGreenOptions& opts);

/// Twice the fitted Gaussian bound summed over the lattice images left out
/// at this depth.
double cube_tail_bound(const Cube& cube, int dim, const Point& x, const Point& y, double elapsed, int depth,
                       double aronson_constant);

Green cube_green_function(EvaluatorPtr ev, const Cube& cube, int depth, const CubeGreenOptions& opts);

/// G*(x, t; y, s) = G(y, s; x, t). The gradient with respect to x is
/// ∇_1 G(x, s; y, t), which equals ∇_2 G(y, s; x, t) for symmetric coefficients.
Green adjoint_green(const Green& g);

using VectorField = std::function<Point(const Point& y, double s)>;

struct VolumeQuadrature {
    int time_nodes = 24;
    int order = 8;
};

/// w(x, t) = -∫_{t0}^{t} ∫_{cube} F(y, s) · ∇_y G*(y, s; x, t) dy ds.
double volume_potential(const Green& gstar, const VectorField& F, const Cube& cube, double t0, const Point& x,
                        double t, const VolumeQuadrature& quad = {});

}  // namespace layerheat
