#include "layerheat/medium.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace layerheat {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::kOk: return "Ok";
        case ErrorCode::kInvalidArgument: return "InvalidArgument";
        case ErrorCode::kNotSymmetric: return "NotSymmetric";
        case ErrorCode::kNotElliptic: return "NotElliptic";
        case ErrorCode::kUnsupportedDimension: return "UnsupportedDimension";
        case ErrorCode::kOnInterface: return "OnInterface";
        case ErrorCode::kBranchAmbiguity: return "BranchAmbiguity";
        case ErrorCode::kDegenerateDenominator: return "DegenerateDenominator";
        case ErrorCode::kRegionMismatch: return "RegionMismatch";
        case ErrorCode::kQuadratureNotConverged: return "QuadratureNotConverged";
        case ErrorCode::kContourLeavesDomain: return "ContourLeavesDomain";
        case ErrorCode::kUnsupportedGeometry: return "UnsupportedGeometry";
        case ErrorCode::kTruncationInsufficient: return "TruncationInsufficient";
        case ErrorCode::kInterfaceNotOnGrid: return "InterfaceNotOnGrid";
        case ErrorCode::kSolveFailed: return "SolveFailed";
        case ErrorCode::kNoFiniteConstant: return "NoFiniteConstant";
        case ErrorCode::kExponentMismatch: return "ExponentMismatch";
        case ErrorCode::kConfig: return "Config";
        case ErrorCode::kIo: return "Io";
        case ErrorCode::kInternal: return "Internal";
    }
    return "Unknown";
}

DiffusionTensor DiffusionTensor::validate(std::span<const double> row_major, int n) {
    if (n < 1 || n > kMaxDim) {
        fail(ErrorCode::kUnsupportedDimension, "dimension " + std::to_string(n) + " not in {1,2,3}");
    }
    if (row_major.size() != static_cast<std::size_t>(n * n)) {
        fail(ErrorCode::kInvalidArgument, "expected " + std::to_string(n * n) + " entries, got " +
                                              std::to_string(row_major.size()));
    }
    DiffusionTensor t;
    t.dim_ = n;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = row_major[static_cast<std::size_t>(i * n + j)];
            if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "non-finite tensor entry");
            t.entries_[i][j] = v;
            m(i, j) = v;
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (t.entries_[i][j] != t.entries_[j][i]) {
                fail(ErrorCode::kNotSymmetric, "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                                   ") differs from its transpose");
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    t.delta_ = eig.eigenvalues().minCoeff();
    t.lambda_max_ = eig.eigenvalues().maxCoeff();
    if (!(t.delta_ > 0.0)) {
        fail(ErrorCode::kNotElliptic, "smallest eigenvalue " + std::to_string(t.delta_) + " <= 0");
    }

    if (n > 1) {
        const int k = n - 1;
        Eigen::MatrixXd schur(k, k);
        const double ann = t.entries_[k][k];
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                schur(i, j) = t.entries_[i][j] - t.entries_[i][k] * t.entries_[j][k] / ann;
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> se(schur, Eigen::EigenvaluesOnly);
        t.schur_delta_ = se.eigenvalues().minCoeff();
    } else {
        t.schur_delta_ = t.delta_;
    }
    return t;
}

double DiffusionTensor::determinant() const noexcept {
    const auto& e = entries_;
    switch (dim_) {
        case 1: return e[0][0];
        case 2: return e[0][0] * e[1][1] - e[0][1] * e[1][0];
        default:
            return e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1]) -
                   e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0]) +
                   e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
    }
}

double DiffusionTensor::quadratic_form(const Point& xi) const noexcept {
    double q = 0.0;
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) q += entries_[i][j] * xi[i] * xi[j];
    }
    return q;
}

TwoLayerMedium::TwoLayerMedium(DiffusionTensor upper, DiffusionTensor lower)
    : upper_(std::move(upper)), lower_(std::move(lower)) {
    if (upper_.dim() != lower_.dim()) {
        fail(ErrorCode::kInvalidArgument, "upper and lower tensors differ in dimension");
    }
}

double TwoLayerMedium::delta() const noexcept { return std::min(upper_.delta(), lower_.delta()); }

double TwoLayerMedium::max_eigenvalue() const noexcept {
    return std::max(upper_.max_eigenvalue(), lower_.max_eigenvalue());
}

const DiffusionTensor& piecewise_tensor(const TwoLayerMedium& medium, const Point& point) {
    const double xn = point[medium.dim() - 1];
    if (xn > 0.0) return medium.upper();
    if (xn < 0.0) return medium.lower();
    fail(ErrorCode::kOnInterface, "point lies on x_n = 0; use a one-sided limit");
}

Cube Cube::make(double half_width, const Point& center) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        fail(ErrorCode::kInvalidArgument, "cube half-width must be positive");
    }
    return Cube{half_width, center};
}

bool Cube::contains(const Point& x, int dim) const noexcept {
    for (int i = 0; i < dim; ++i) {
        if (!(std::abs(x[i] - center[i]) < half_width)) return false;
    }
    return true;
}

KernelQuery KernelQuery::make(const Point& x, double t, const Point& y, double s) {
    if (!(t > s)) fail(ErrorCode::kInvalidArgument, "kernel query requires t > s");
    return KernelQuery{x, t, y, s};
}

}  // namespace layerheat
