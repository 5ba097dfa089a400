#include "layerheat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "layerheat/error.hpp"

namespace layerheat {

QuadratureRule gauss_legendre(int n) {
    if (n < 1) fail(ErrorCode::kInvalidArgument, "Gauss–Legendre order must be positive");
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

QuadratureRule composite_gauss(double lo, double hi, std::vector<double> breaks, int panels, int order) {
    if (!(hi > lo) || panels < 1) fail(ErrorCode::kInvalidArgument, "bad composite quadrature interval");
    std::vector<double> edges{lo};
    std::sort(breaks.begin(), breaks.end());
    for (double b : breaks) {
        if (b > lo && b < hi) edges.push_back(b);
    }
    edges.push_back(hi);
    const QuadratureRule base = gauss_legendre(order);
    QuadratureRule r;
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        const double step = (edges[s + 1] - edges[s]) / panels;
        for (int p = 0; p < panels; ++p) {
            const double a = edges[s] + p * step;
            for (int i = 0; i < order; ++i) {
                r.nodes.push_back(a + 0.5 * step * (base.nodes[i] + 1.0));
                r.weights.push_back(0.5 * step * base.weights[i]);
            }
        }
    }
    return r;
}

}  // namespace layerheat
