#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "robdiff/model.hpp"
#include "robdiff/simulate.hpp"

// Per-transition objective terms for robust estimation of a discretely
// observed diffusion, their analytic gradients (estimating functions), and
// the Gaussian-weighted moment identities used as closed-form oracles.
//
// Both families approximate the one-step transition by the Gaussian density
// with mean x_prev + h b(x_prev, mu) and variance a(x_prev, sigma)^2 h and
// then apply a robust divergence with tuning parameter lambda >= 0:
//
//   density-power (lambda = alpha > 0):
//     q = (2 pi a^2 h)^{-a/2} [ -(1/a) e^{-a z^2 / 2} + (1+a)^{-3/2} ]
//   gamma (lambda = gamma > 0):
//     q = -((1+g) / (2 pi a^2 h))^{g/(2(1+g))} e^{-g z^2 / 2}
//   lambda = 0 (both): the quasi-likelihood term
//     q = (1/2) log(2 pi a^2) + z^2 / 2
//
// with residual r = x_curr - x_prev - h b(x_prev, mu) and z = r / (a sqrt(h)).
// Large residuals are downweighted through exp(-lambda z^2 / 2); for
// lambda = 0 the quadratic term is unbounded.

namespace robdiff {

enum class Family { DensityPower, Gamma };

inline std::string to_string(Family f) {
    return f == Family::DensityPower ? "dpower" : "gamma";
}

struct DivergenceSpec {
    Family family = Family::Gamma;
    double lambda = 0.0;  // alpha for DensityPower, gamma for Gamma; 0 = quasi-likelihood
};

// Squared standardized residuals are clamped before exponentiation; the
// weight underflows to exactly 0, which is the intended redescending limit.
inline constexpr double kZSquaredClamp = 1e8;

// Per-transition intermediates, exposed for diagnostics and tests.
struct TermContext {
    double r = 0.0;        // x_curr - x_prev - h b(x_prev, mu)
    double a_prev = 0.0;   // a(x_prev, sigma)
    double z = 0.0;        // r / (a_prev sqrt(h))
    double w_power = 0.0;  // density-power weight at this lambda
    double w_gamma = 0.0;  // gamma weight at this lambda
};

namespace detail {

inline void check_transition_inputs(double a_prev, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("divergence: h must be > 0");
    if (!(a_prev > 0.0))
        throw std::domain_error("divergence: diffusion coefficient must be > 0 at x_prev");
}

}  // namespace detail

inline TermContext term_context(const DiffusionModel& model, const Params& theta, double x_prev,
                                double x_curr, double h, double lambda) {
    detail::check_transition_inputs(model.diffusion(x_prev, theta.sigma), h);
    TermContext ctx;
    ctx.a_prev = model.diffusion(x_prev, theta.sigma);
    ctx.r = x_curr - x_prev - h * model.drift(x_prev, theta.mu);
    ctx.z = ctx.r / (ctx.a_prev * std::sqrt(h));
    const double z2 = std::min(ctx.z * ctx.z, kZSquaredClamp);
    const double log_norm = std::log(2.0 * M_PI) + 2.0 * std::log(ctx.a_prev) + std::log(h);
    ctx.w_power = std::exp(-0.5 * lambda * log_norm - 0.5 * lambda * z2);
    ctx.w_gamma = std::exp(lambda / (2.0 * (1.0 + lambda)) * (std::log1p(lambda) - log_norm) -
                           0.5 * lambda * z2);
    return ctx;
}

inline double term_value(const DivergenceSpec& spec, const DiffusionModel& model,
                         const Params& theta, double x_prev, double x_curr, double h) {
    if (!(spec.lambda >= 0.0)) throw std::invalid_argument("divergence: lambda must be >= 0");
    const double a = model.diffusion(x_prev, theta.sigma);
    detail::check_transition_inputs(a, h);

    const double r = x_curr - x_prev - h * model.drift(x_prev, theta.mu);
    const double z2_raw = (r / a) * (r / a) / h;
    const double lambda = spec.lambda;

    double q;
    if (lambda == 0.0) {
        q = 0.5 * std::log(2.0 * M_PI * a * a) + 0.5 * z2_raw;
    } else {
        const double z2 = std::min(z2_raw, kZSquaredClamp);
        const double log_norm = std::log(2.0 * M_PI) + 2.0 * std::log(a) + std::log(h);
        if (spec.family == Family::DensityPower) {
            const double scale = std::exp(-0.5 * lambda * log_norm);
            const double e = std::exp(-0.5 * lambda * z2);
            q = scale * (-e / lambda + std::pow(1.0 + lambda, -1.5));
        } else {
            q = -std::exp(lambda / (2.0 * (1.0 + lambda)) * (std::log1p(lambda) - log_norm) -
                          0.5 * lambda * z2);
        }
    }
    if (!std::isfinite(q))
        throw std::runtime_error("divergence: non-finite objective term (extreme residual)");
    return q;
}

struct EstimatingFunctionValue {
    double mu = 0.0;     // d/dmu of the objective term
    double sigma = 0.0;  // d/dsigma of the objective term
};

// Analytic gradient of term_value. For lambda = 0 this is the quasi-score;
// for lambda > 0 the residual enters only through redescending weights, so
// the mu component vanishes for extreme observations while the sigma
// component tends to 0 (gamma family) or a nonzero constant (density-power).
inline EstimatingFunctionValue estimating_function(const DivergenceSpec& spec,
                                                   const DiffusionModel& model,
                                                   const Params& theta, double x_prev,
                                                   double x_curr, double h) {
    if (!(spec.lambda >= 0.0)) throw std::invalid_argument("divergence: lambda must be >= 0");
    const double a = model.diffusion(x_prev, theta.sigma);
    detail::check_transition_inputs(a, h);

    const double r = x_curr - x_prev - h * model.drift(x_prev, theta.mu);
    const double b_mu = model.drift_dmu(x_prev, theta.mu);
    const double a_sigma = model.diffusion_dsigma(x_prev, theta.sigma);
    const double z2_raw = (r / a) * (r / a) / h;
    const double lambda = spec.lambda;

    EstimatingFunctionValue out;
    if (lambda == 0.0) {
        out.mu = -r * b_mu / (a * a);
        out.sigma = (a_sigma / a) * (1.0 - z2_raw);
    } else {
        const double z2 = std::min(z2_raw, kZSquaredClamp);
        const double log_norm = std::log(2.0 * M_PI) + 2.0 * std::log(a) + std::log(h);
        if (spec.family == Family::DensityPower) {
            const double scale = std::exp(-0.5 * lambda * log_norm);
            const double w = scale * std::exp(-0.5 * lambda * z2);
            out.mu = -w * r * b_mu / (a * a);
            out.sigma =
                (a_sigma / a) * (w * (1.0 - z2) - lambda * std::pow(1.0 + lambda, -1.5) * scale);
        } else {
            const double w = std::exp(
                lambda / (2.0 * (1.0 + lambda)) * (std::log1p(lambda) - log_norm) -
                0.5 * lambda * z2);
            out.mu = -lambda * w * r * b_mu / (a * a);
            out.sigma = lambda * (a_sigma / a) * w * (1.0 / (1.0 + lambda) - z2);
        }
    }
    if (!std::isfinite(out.mu) || !std::isfinite(out.sigma))
        throw std::runtime_error("divergence: non-finite estimating function value");
    return out;
}

// Sum of term_value over the n transitions of a path, compensated so the
// result is summation-order independent to ~1e-12.
inline double objective(const DivergenceSpec& spec, const DiffusionModel& model,
                        const Params& theta, const SamplePath& path) {
    if (path.n < 2) throw std::invalid_argument("objective: path must have n >= 2");
    if (path.values.size() != static_cast<std::size_t>(path.n) + 1)
        throw std::invalid_argument("objective: malformed path");

    double sum = 0.0;
    double carry = 0.0;  // Kahan compensation
    for (long i = 1; i <= path.n; ++i) {
        double term;
        try {
            term = term_value(spec, model, theta, path.values[i - 1], path.values[i], path.h);
        } catch (const std::exception& e) {
            throw std::runtime_error("objective: transition " + std::to_string(i) + ": " +
                                     e.what());
        }
        const double y = term - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

// Sum of estimating_function over the path (gradient of `objective`).
inline EstimatingFunctionValue objective_gradient(const DivergenceSpec& spec,
                                                  const DiffusionModel& model, const Params& theta,
                                                  const SamplePath& path) {
    EstimatingFunctionValue g;
    double carry_mu = 0.0, carry_sigma = 0.0;
    for (long i = 1; i <= path.n; ++i) {
        const EstimatingFunctionValue v =
            estimating_function(spec, model, theta, path.values[i - 1], path.values[i], path.h);
        double y = v.mu - carry_mu;
        double t = g.mu + y;
        carry_mu = (t - g.mu) - y;
        g.mu = t;
        y = v.sigma - carry_sigma;
        t = g.sigma + y;
        carry_sigma = (t - g.sigma) - y;
        g.sigma = t;
    }
    return g;
}

// E[Z^k e^{-c Z^2}] for Z ~ N(0,1): closed forms from the Gaussian moment
// identities, k in {0,...,4}.
inline double weighted_gaussian_moment(int k, double c) {
    if (!(c >= 0.0)) throw std::invalid_argument("weighted_gaussian_moment: c must be >= 0");
    switch (k) {
        case 0: return std::pow(1.0 + 2.0 * c, -0.5);
        case 1: return 0.0;
        case 2: return std::pow(1.0 + 2.0 * c, -1.5);
        case 3: return 0.0;
        case 4: return 3.0 * std::pow(1.0 + 2.0 * c, -2.5);
        default:
            throw std::invalid_argument("weighted_gaussian_moment: unsupported k = " +
                                        std::to_string(k));
    }
}

}  // namespace robdiff
