#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

// Nelder-Mead simplex minimizer specialized to two dimensions (all parameter
// searches here are over (mu, log sigma)). Candidate points are clamped into
// the feasible box before evaluation, which keeps the simplex inside the
// constraints without penalty terms.

namespace robdiff {

using Vec2 = std::array<double, 2>;

struct NelderMeadOptions {
    int max_iters = 2000;
    double f_tol = 1e-10;  // absolute f-spread of the simplex
    double x_tol = 1e-12;  // simplex diameter
};

struct NelderMeadResult {
    Vec2 x{0.0, 0.0};
    double fx = 0.0;
    int iters = 0;
    bool converged = false;
};

inline NelderMeadResult nelder_mead_2d(const std::function<double(const Vec2&)>& f, Vec2 x0,
                                       Vec2 step, Vec2 lo, Vec2 hi,
                                       const NelderMeadOptions& opts = {}) {
    auto clamp = [&](Vec2 p) {
        for (int k = 0; k < 2; ++k) p[k] = std::clamp(p[k], lo[k], hi[k]);
        return p;
    };

    std::array<Vec2, 3> x;
    std::array<double, 3> fx;
    x[0] = clamp(x0);
    x[1] = clamp({x0[0] + step[0], x0[1]});
    x[2] = clamp({x0[0], x0[1] + step[1]});
    // if clamping collapsed a vertex, step inward instead
    for (int k = 1; k < 3; ++k) {
        if (x[k] == x[0]) {
            Vec2 p = x[0];
            p[k - 1] -= step[k - 1];
            x[k] = clamp(p);
        }
    }
    for (int k = 0; k < 3; ++k) fx[k] = f(x[k]);

    auto order = [&]() {
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
                if (fx[b] < fx[a]) {
                    std::swap(fx[a], fx[b]);
                    std::swap(x[a], x[b]);
                }
    };

    NelderMeadResult result;
    int it = 0;
    for (; it < opts.max_iters; ++it) {
        order();
        const double diam = std::max(
            std::hypot(x[1][0] - x[0][0], x[1][1] - x[0][1]),
            std::hypot(x[2][0] - x[0][0], x[2][1] - x[0][1]));
        if (std::abs(fx[2] - fx[0]) <= opts.f_tol * (1.0 + std::abs(fx[0])) ||
            diam <= opts.x_tol) {
            result.converged = true;
            break;
        }

        const Vec2 centroid{(x[0][0] + x[1][0]) / 2.0, (x[0][1] + x[1][1]) / 2.0};
        auto along = [&](double t) {  // centroid + t (centroid - worst)
            return clamp({centroid[0] + t * (centroid[0] - x[2][0]),
                          centroid[1] + t * (centroid[1] - x[2][1])});
        };

        const Vec2 xr = along(1.0);
        const double fr = f(xr);
        if (fr < fx[0]) {
            const Vec2 xe = along(2.0);
            const double fe = f(xe);
            if (fe < fr) {
                x[2] = xe;
                fx[2] = fe;
            } else {
                x[2] = xr;
                fx[2] = fr;
            }
        } else if (fr < fx[1]) {
            x[2] = xr;
            fx[2] = fr;
        } else {
            const bool outside = fr < fx[2];
            const Vec2 xc = along(outside ? 0.5 : -0.5);
            const double fc = f(xc);
            if (fc < (outside ? fr : fx[2])) {
                x[2] = xc;
                fx[2] = fc;
            } else {
                for (int k = 1; k < 3; ++k) {  // shrink toward best
                    x[k] = clamp({x[0][0] + 0.5 * (x[k][0] - x[0][0]),
                                  x[0][1] + 0.5 * (x[k][1] - x[0][1])});
                    fx[k] = f(x[k]);
                }
            }
        }
    }
    order();
    result.x = x[0];
    result.fx = fx[0];
    result.iters = it;
    return result;
}

}  // namespace robdiff
