/** @file gauss.hpp
    @brief Gauss-Legendre quadrature rules on [0,1].
*/
#pragma once

#include <cmath>
#include <vector>

#include "c1shell/errors.hpp"

namespace c1shell {

struct QuadratureRule {
    std::vector<double> points;  // in [0,1]
    std::vector<double> weights; // sum to 1
};

/// Gauss-Legendre rule with n points, mapped to [0,1].
/// Nodes are found by Newton iteration on the Legendre polynomial, which is
/// exact to machine precision for the small n used here.
inline QuadratureRule gaussLegendre(int n)
{
    C1SHELL_REQUIRE(n >= 1 && n <= 64, ParameterError, "gaussLegendre: order out of range");
    QuadratureRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev initial guess on [-1,1]
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre recurrence
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.points[i] = 0.5 * (1.0 - x); // cos decreasing: first root is largest
        rule.points[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = 0.5 * w;
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

} // namespace c1shell
