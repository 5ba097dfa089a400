#pragma once

#include <utility>
#include <vector>

namespace layerheat {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss–Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// Composite Gauss–Legendre on [lo, hi] with panel edges at `breaks`
/// (breaks outside the interval are ignored) and `panels` equal panels
/// between consecutive breaks.
QuadratureRule composite_gauss(double lo, double hi, std::vector<double> breaks, int panels, int order);

}  // namespace layerheat
