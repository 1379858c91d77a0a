#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "robdiff/divergence.hpp"
#include "robdiff/gauss_hermite.hpp"
#include "robdiff/model.hpp"
#include "robdiff/simulate.hpp"

// Conditional influence function of the divergence-based M-estimators,
//
//   IF(x_curr, x_prev) = -D^{-1} psi(x_curr, x_prev; theta0),
//   D = E[ d/dtheta psi ],
//
// evaluated on a grid of x_curr at a fixed x_prev. D is estimated either
// under the model's conditional Gaussian at x_prev (matches the fixed-x_prev
// curves) or as a time average over a long stationary path.

namespace robdiff {

struct Matrix2 {
    // row-major 2x2
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    double det() const { return a11 * a22 - a12 * a21; }

    // ratio of singular values
    double condition() const {
        const double t = a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22;
        const double d = det();
        const double disc = std::sqrt(std::max(0.0, t * t - 4.0 * d * d));
        const double smax2 = 0.5 * (t + disc);
        const double smin2 = 0.5 * (t - disc);
        if (smin2 <= 0.0) return std::numeric_limits<double>::infinity();
        return std::sqrt(smax2 / smin2);
    }

    // solves A y = rhs
    void solve(double rhs1, double rhs2, double& y1, double& y2) const {
        const double d = det();
        y1 = (a22 * rhs1 - a12 * rhs2) / d;
        y2 = (a11 * rhs2 - a21 * rhs1) / d;
    }
};

struct DMethod {
    enum class Kind { ConditionalQuadrature, StationarySimulation };
    Kind kind = Kind::ConditionalQuadrature;
    int nodes = 128;           // quadrature nodes
    long path_length = 200000; // stationary-simulation increments
    std::uint64_t seed = 0;
};

struct InfluenceRequest {
    DiffusionModel model{};
    Params theta0{};
    DivergenceSpec spec{};
    double h = 0.0;
    double x_prev = 0.0;
    std::vector<double> grid;
    DMethod d_method{};
};

struct InfluencePoint {
    double x = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
};

struct InfluenceResult {
    Matrix2 d_matrix{};
    double condition = 0.0;
    std::vector<InfluencePoint> curves;
};

namespace detail {

// d/dtheta psi by central differences (relative step 1e-6), as a 2x2 block
// [d psi_mu / d mu, d psi_mu / d sigma; d psi_sigma / d mu, d psi_sigma / d sigma].
inline Matrix2 psi_jacobian(const DiffusionModel& model, const Params& theta,
                            const DivergenceSpec& spec, double x_prev, double x_curr, double h) {
    const double dm = 1e-6 * std::max(1.0, std::abs(theta.mu));
    const double ds = 1e-6 * std::max(1.0, std::abs(theta.sigma));
    const EstimatingFunctionValue mp =
        estimating_function(spec, model, {theta.mu + dm, theta.sigma}, x_prev, x_curr, h);
    const EstimatingFunctionValue mm =
        estimating_function(spec, model, {theta.mu - dm, theta.sigma}, x_prev, x_curr, h);
    const EstimatingFunctionValue sp =
        estimating_function(spec, model, {theta.mu, theta.sigma + ds}, x_prev, x_curr, h);
    const EstimatingFunctionValue sm =
        estimating_function(spec, model, {theta.mu, theta.sigma - ds}, x_prev, x_curr, h);
    Matrix2 j;
    j.a11 = (mp.mu - mm.mu) / (2.0 * dm);
    j.a12 = (sp.mu - sm.mu) / (2.0 * ds);
    j.a21 = (mp.sigma - mm.sigma) / (2.0 * dm);
    j.a22 = (sp.sigma - sm.sigma) / (2.0 * ds);
    return j;
}

}  // namespace detail

inline Matrix2 d_matrix(const DiffusionModel& model, const Params& theta0,
                        const DivergenceSpec& spec, double h, double x_prev,
                        const DMethod& method = {}) {
    if (!(h > 0.0)) throw std::invalid_argument("d_matrix: h must be > 0");

    Matrix2 d;
    if (method.kind == DMethod::Kind::ConditionalQuadrature) {
        if (method.nodes < 32) throw std::invalid_argument("d_matrix: need at least 32 nodes");
        const double mean = x_prev + h * model.drift(x_prev, theta0.mu);
        const double sd = model.diffusion(x_prev, theta0.sigma) * std::sqrt(h);
        const GaussHermiteRule rule = gauss_hermite_rule(method.nodes);
        const double inv_sqrt_pi = 0.5641895835477563;
        const double sqrt2 = 1.4142135623730951;
        for (int i = 0; i < method.nodes; ++i) {
            const double x = mean + sd * sqrt2 * rule.nodes[i];
            const Matrix2 j = detail::psi_jacobian(model, theta0, spec, x_prev, x, h);
            const double w = inv_sqrt_pi * rule.weights[i];
            d.a11 += w * j.a11;
            d.a12 += w * j.a12;
            d.a21 += w * j.a21;
            d.a22 += w * j.a22;
        }
    } else {
        SimulationOptions opts;  // stationary warm-up via burn-in
        const SamplePath path =
            simulate_path(model, theta0, method.path_length, h, opts, method.seed);
        for (long i = 1; i <= path.n; ++i) {
            const Matrix2 j = detail::psi_jacobian(model, theta0, spec, path.values[i - 1],
                                                   path.values[i], path.h);
            d.a11 += j.a11;
            d.a12 += j.a12;
            d.a21 += j.a21;
            d.a22 += j.a22;
        }
        const double inv_n = 1.0 / static_cast<double>(path.n);
        d.a11 *= inv_n;
        d.a12 *= inv_n;
        d.a21 *= inv_n;
        d.a22 *= inv_n;
    }

    if (!(d.condition() < 1e12))
        throw std::runtime_error("d_matrix: sensitivity matrix is singular or ill-conditioned");
    return d;
}

inline InfluenceResult influence_curve(const InfluenceRequest& request) {
    if (request.grid.empty()) throw std::invalid_argument("influence_curve: empty grid");
    for (double x : request.grid)
        if (!std::isfinite(x)) throw std::invalid_argument("influence_curve: non-finite grid");

    InfluenceResult result;
    result.d_matrix = d_matrix(request.model, request.theta0, request.spec, request.h,
                               request.x_prev, request.d_method);
    result.condition = result.d_matrix.condition();
    result.curves.reserve(request.grid.size());
    for (double x : request.grid) {
        const EstimatingFunctionValue p = estimating_function(
            request.spec, request.model, request.theta0, request.x_prev, x, request.h);
        InfluencePoint pt;
        pt.x = x;
        result.d_matrix.solve(-p.mu, -p.sigma, pt.mu, pt.sigma);
        result.curves.push_back(pt);
    }
    return result;
}

}  // namespace robdiff
