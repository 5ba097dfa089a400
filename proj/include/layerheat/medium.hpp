#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "layerheat/error.hpp"

namespace layerheat {

inline constexpr int kMaxDim = 3;

/// Point in R^n, n <= 3. Components past the active dimension are zero.
using Point = std::array<double, kMaxDim>;

/// Symmetric positive-definite diffusivity matrix with its ellipticity
/// constant (smallest eigenvalue) cached at validation time.
class DiffusionTensor {
public:
    /// Validates a row-major n x n matrix. Symmetry is checked exactly.
    static DiffusionTensor validate(std::span<const double> row_major, int n);

    int dim() const noexcept { return dim_; }
    double operator()(int i, int j) const noexcept { return entries_[i][j]; }
    double delta() const noexcept { return delta_; }
    double max_eigenvalue() const noexcept { return lambda_max_; }
    double determinant() const noexcept;

    /// Normal-normal entry a_nn (last diagonal entry).
    double normal() const noexcept { return entries_[dim_ - 1][dim_ - 1]; }

    /// Smallest eigenvalue of the tangential Schur complement
    /// Ã - a a^T / a_nn; governs decay of the partial Fourier transform.
    double schur_delta() const noexcept { return schur_delta_; }

    double quadratic_form(const Point& xi) const noexcept;

    friend bool operator==(const DiffusionTensor& a, const DiffusionTensor& b) noexcept {
        return a.dim_ == b.dim_ && a.entries_ == b.entries_;
    }

private:
    DiffusionTensor() = default;

    int dim_ = 0;
    std::array<std::array<double, kMaxDim>, kMaxDim> entries_{};
    double delta_ = 0.0;
    double lambda_max_ = 0.0;
    double schur_delta_ = 0.0;
};

/// Coefficient field equal to `upper` for x_n > 0 and `lower` for x_n < 0.
class TwoLayerMedium {
public:
    TwoLayerMedium(DiffusionTensor upper, DiffusionTensor lower);

    /// Same tensor on both sides.
    static TwoLayerMedium homogeneous(const DiffusionTensor& t) { return {t, t}; }

    const DiffusionTensor& upper() const noexcept { return upper_; }
    const DiffusionTensor& lower() const noexcept { return lower_; }
    int dim() const noexcept { return upper_.dim(); }
    bool is_homogeneous() const noexcept { return upper_ == lower_; }

    double delta() const noexcept;
    double max_eigenvalue() const noexcept;

private:
    DiffusionTensor upper_;
    DiffusionTensor lower_;
};

/// Tensor in force at `point`. The interface x_n == 0 has no value (OnInterface).
const DiffusionTensor& piecewise_tensor(const TwoLayerMedium& medium, const Point& point);

/// Axis-aligned cube {|x_i - c_i| < half_width}.
struct Cube {
    double half_width = 1.0;
    Point center{};

    static Cube make(double half_width, const Point& center);
    bool contains(const Point& x, int dim) const noexcept;
};

/// Source (y, s) and target (x, t) with t > s.
struct KernelQuery {
    Point x{};
    double t = 0.0;
    Point y{};
    double s = 0.0;

    static KernelQuery make(const Point& x, double t, const Point& y, double s);
    double elapsed() const noexcept { return t - s; }
};

}  // namespace layerheat
