#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

// Gauss-Hermite quadrature (physicists' weight e^{-x^2}). Nodes are the
// roots of H_n found by Newton iteration on the orthonormal recurrence,
// which is stable for the ~128-node rules used here.

namespace robdiff {

struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussHermiteRule gauss_hermite_rule(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite_rule: n must be >= 1");
    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    const double pi_m4 = 0.751125544464942;  // pi^{-1/4}
    const int m = (n + 1) / 2;
    double z = 0.0, z1;
    for (int i = 0; i < m; ++i) {
        // initial guesses (largest root first), then Newton
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(n, 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[1];
        } else {
            z = 2.0 * z - rule.nodes[i - 2];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pi_m4;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * (1.0 + std::abs(z))) break;
        }
        rule.nodes[i] = z;
        rule.nodes[n - 1 - i] = -z;
        rule.weights[i] = 2.0 / (pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;  // enforce the exact central root
    return rule;
}

// E[f(Z)] for Z ~ N(0,1) by an n-node rule.
template <typename F>
double gauss_hermite_expect(int n, F&& f) {
    const GaussHermiteRule rule = gauss_hermite_rule(n);
    const double inv_sqrt_pi = 0.5641895835477563;
    const double sqrt2 = 1.4142135623730951;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rule.weights[i] * f(sqrt2 * rule.nodes[i]);
    return inv_sqrt_pi * sum;
}

}  // namespace robdiff
