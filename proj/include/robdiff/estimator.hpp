#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "robdiff/divergence.hpp"
#include "robdiff/model.hpp"
#include "robdiff/nelder_mead.hpp"
#include "robdiff/simulate.hpp"

// Minimization of the divergence objective over the parameter box.
//
// The lambda = 0 problem is solved first (closed form for the linear-drift
// constant-sigma model, otherwise a moment-matched start), refined by
// Nelder-Mead on (mu, log sigma) plus a Newton polish on the analytic
// estimating-function sums. For lambda > 0 the objective is reshaped
// gradually: the tuning parameter is raised from 0 to its target in steps of
// at most warm_start_step, re-solving from the previous solution.

namespace robdiff {

struct FitOptions {
    ParamBounds bounds{};
    double obj_tol = 1e-10;
    double grad_tol = 1e-7;
    int max_iters = 2000;
    double warm_start_step = 0.1;  // lambda increment of the continuation chain
    int multistart = 3;            // number of starts for the lambda = 0 stage

    struct Trace {
        struct Stage {
            double lambda;
            double f_start;     // objective at the stage's warm start
            double f_simplex;   // after Nelder-Mead
            double f_polished;  // after Newton polish
        };
        std::vector<Stage> stages;
    };
    Trace* trace = nullptr;  // optional continuation log, owned by the caller
};

struct FitResult {
    Params theta_hat{};
    double objective_value = 0.0;
    int iterations = 0;
    bool converged = false;
    double grad_norm = 0.0;   // max-norm of the estimating-function sum at theta_hat
    bool at_boundary = false;
};

// Exact stationary point of the lambda = 0 objective when b(x, mu) = -mu x
// and a(x, sigma) = sigma.
inline Params quasi_mle_linear_drift(const SamplePath& path, const DiffusionModel& model) {
    if (model.id != ModelId::ModelA)
        throw std::invalid_argument("quasi_mle_linear_drift: requires ModelA");
    if (path.n < 1 || path.values.size() != static_cast<std::size_t>(path.n) + 1)
        throw std::invalid_argument("quasi_mle_linear_drift: malformed path");

    double sum_x_dx = 0.0, sum_xx = 0.0;
    for (long i = 1; i <= path.n; ++i) {
        const double xp = path.values[i - 1];
        sum_x_dx += xp * (path.values[i] - xp);
        sum_xx += xp * xp;
    }
    if (sum_xx == 0.0)
        throw std::domain_error("quasi_mle_linear_drift: all regressors are zero");

    Params theta;
    theta.mu = -sum_x_dx / (path.h * sum_xx);
    double rss = 0.0;
    for (long i = 1; i <= path.n; ++i) {
        const double r = path.values[i] - path.values[i - 1] +
                         theta.mu * path.h * path.values[i - 1];
        rss += r * r;
    }
    theta.sigma = std::sqrt(rss / (path.n * path.h));
    return theta;
}

namespace detail {

inline double quadratic_variation(const SamplePath& path) {
    double qv = 0.0;
    for (long i = 1; i <= path.n; ++i) {
        const double d = path.values[i] - path.values[i - 1];
        qv += d * d;
    }
    return qv;
}

// sigma matching the realized quadratic variation at a fixed mu, by bisection
// of sum r_i^2 = h sum a(x_{i-1}, sigma)^2 over the sigma bounds.
inline double match_quadratic_variation(const SamplePath& path, const DiffusionModel& model,
                                        double mu, double lo, double hi) {
    auto excess = [&](double sigma) {
        double lhs = 0.0, rhs = 0.0;
        for (long i = 1; i <= path.n; ++i) {
            const double xp = path.values[i - 1];
            const double r = path.values[i] - xp - path.h * model.drift(xp, mu);
            lhs += r * r;
            const double a = model.diffusion(xp, sigma);
            rhs += a * a;
        }
        return path.h * rhs - lhs;
    };
    if (excess(lo) >= 0.0) return lo;
    if (excess(hi) <= 0.0) return hi;
    double a = lo, b = hi;
    for (int it = 0; it < 200 && (b - a) > 1e-12 * (1.0 + b); ++it) {
        const double mid = 0.5 * (a + b);
        (excess(mid) < 0.0 ? a : b) = mid;
    }
    return 0.5 * (a + b);
}

struct StageResult {
    Params theta{};
    double f = 0.0;
    double grad_norm = 0.0;
    int iters = 0;
    bool simplex_converged = false;
};

// Nelder-Mead on (mu, log sigma) followed by a damped Newton polish on the
// analytic gradient, all clamped into the bounds box.
inline StageResult solve_stage(const SamplePath& path, const DiffusionModel& model,
                               const DivergenceSpec& spec, const FitOptions& opts, Params start,
                               double lambda, FitOptions::Trace* trace) {
    const DivergenceSpec stage_spec{spec.family, lambda};
    const ParamBounds& box = opts.bounds;

    auto safe_objective = [&](const Params& theta) {
        try {
            return objective(stage_spec, model, theta, path);
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    const Vec2 lo{box.mu_lo, std::log(box.sigma_lo)};
    const Vec2 hi{box.mu_hi, std::log(box.sigma_hi)};
    auto to_theta = [](const Vec2& u) { return Params{u[0], std::exp(u[1])}; };

    start = box.clamp(start);
    const Vec2 u0{start.mu, std::log(start.sigma)};
    const double f_start = safe_objective(start);

    NelderMeadOptions nm_opts;
    nm_opts.max_iters = opts.max_iters;
    nm_opts.f_tol = opts.obj_tol;
    const Vec2 step{0.1 * std::max(1.0, std::abs(start.mu)), 0.1};
    const NelderMeadResult nm = nelder_mead_2d(
        [&](const Vec2& u) { return safe_objective(to_theta(u)); }, u0, step, lo, hi, nm_opts);

    StageResult out;
    out.theta = box.clamp(to_theta(nm.x));
    out.f = nm.fx;
    out.iters = nm.iters;
    out.simplex_converged = nm.converged;
    const double f_simplex = nm.fx;

    // Newton polish in (mu, sigma) with finite-difference Jacobian of the
    // estimating-function sums; each accepted step must not increase f.
    const double grad_target = opts.grad_tol * static_cast<double>(path.n);
    auto grad = [&](const Params& theta) {
        return objective_gradient(stage_spec, model, theta, path);
    };
    Params theta = out.theta;
    double f = out.f;
    for (int it = 0; it < 60; ++it) {
        EstimatingFunctionValue g;
        try {
            g = grad(theta);
        } catch (const std::exception&) {
            break;
        }
        out.grad_norm = std::max(std::abs(g.mu), std::abs(g.sigma));
        if (out.grad_norm <= grad_target) break;

        const double dm = 1e-5 * (1.0 + std::abs(theta.mu));
        const double ds = 1e-5 * (1.0 + std::abs(theta.sigma));
        EstimatingFunctionValue gmp, gmm, gsp, gsm;
        try {
            gmp = grad({theta.mu + dm, theta.sigma});
            gmm = grad({theta.mu - dm, theta.sigma});
            gsp = grad({theta.mu, theta.sigma + ds});
            gsm = grad({theta.mu, theta.sigma - ds});
        } catch (const std::exception&) {
            break;
        }
        const double h11 = (gmp.mu - gmm.mu) / (2.0 * dm);
        const double h12 = (gsp.mu - gsm.mu) / (2.0 * ds);
        const double h21 = (gmp.sigma - gmm.sigma) / (2.0 * dm);
        const double h22 = (gsp.sigma - gsm.sigma) / (2.0 * ds);
        const double det = h11 * h22 - 0.25 * (h12 + h21) * (h12 + h21);

        double step_mu, step_sigma;
        if (std::isfinite(det) && std::abs(det) > 1e-300) {
            const double h12s = 0.5 * (h12 + h21);
            step_mu = -(h22 * g.mu - h12s * g.sigma) / det;
            step_sigma = -(h11 * g.sigma - h12s * g.mu) / det;
        } else {
            step_mu = step_sigma = 0.0;
        }
        const double descent = step_mu * g.mu + step_sigma * g.sigma;
        if (!(descent < 0.0) || !std::isfinite(step_mu) || !std::isfinite(step_sigma)) {
            const double scale = std::max(std::abs(g.mu), std::abs(g.sigma));
            step_mu = -0.1 * g.mu / scale;
            step_sigma = -0.1 * g.sigma / scale;
        }

        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
            const Params cand =
                box.clamp({theta.mu + t * step_mu, theta.sigma + t * step_sigma});
            const double fc = safe_objective(cand);
            if (fc <= f) {
                if (cand.mu == theta.mu && cand.sigma == theta.sigma) break;
                accepted = fc < f;
                theta = cand;
                f = fc;
                break;
            }
        }
        ++out.iters;
        if (!accepted) break;
    }
    out.theta = theta;
    out.f = f;
    try {
        const EstimatingFunctionValue g = grad(theta);
        out.grad_norm = std::max(std::abs(g.mu), std::abs(g.sigma));
    } catch (const std::exception&) {
        out.grad_norm = std::numeric_limits<double>::infinity();
    }

    if (trace) trace->stages.push_back({lambda, f_start, f_simplex, out.f});
    return out;
}

}  // namespace detail

inline FitResult fit(const SamplePath& path, const DiffusionModel& model,
                     const DivergenceSpec& spec, const FitOptions& opts = {}) {
    if (path.n < 3) throw std::invalid_argument("fit: path must have n >= 3");
    if (path.values.size() != static_cast<std::size_t>(path.n) + 1)
        throw std::invalid_argument("fit: malformed path");
    if (!(spec.lambda >= 0.0)) throw std::invalid_argument("fit: lambda must be >= 0");
    if (!(opts.warm_start_step > 0.0 && opts.warm_start_step <= 1.0))
        throw std::invalid_argument("fit: warm_start_step must lie in (0, 1]");
    if (detail::quadratic_variation(path) == 0.0)
        throw std::domain_error("fit: path has zero quadratic variation");

    const ParamBounds& box = opts.bounds;

    // lambda = 0 starting point
    Params init;
    if (model.id == ModelId::ModelA) {
        try {
            init = box.clamp(quasi_mle_linear_drift(path, model));
        } catch (const std::domain_error&) {
            init = {0.5 * (box.mu_lo + box.mu_hi), 0.5 * (box.sigma_lo + box.sigma_hi)};
        }
    } else {
        init.mu = 0.5 * (box.mu_lo + box.mu_hi);
        init.sigma =
            detail::match_quadratic_variation(path, model, init.mu, box.sigma_lo, box.sigma_hi);
    }

    // multistart around the lambda = 0 init; deterministic spread
    static constexpr double kMuFactor[] = {1.0, 1.6, 0.625, 2.5, 0.4};
    static constexpr double kSigmaFactor[] = {1.0, 0.625, 1.6, 0.4, 2.5};
    const int starts = std::max(1, opts.multistart);

    detail::StageResult best;
    best.f = std::numeric_limits<double>::infinity();
    int total_iters = 0;
    for (int k = 0; k < starts; ++k) {
        const int j = k % 5;
        Params start{init.mu * kMuFactor[j], init.sigma * kSigmaFactor[j]};
        detail::StageResult r = detail::solve_stage(path, model, spec, opts, start, 0.0,
                                                    k == 0 ? opts.trace : nullptr);
        total_iters += r.iters;
        if (r.f < best.f) best = r;
    }

    // continuation in lambda, in steps of at most warm_start_step
    if (spec.lambda > 0.0) {
        const int stages =
            std::max(1, static_cast<int>(std::ceil(spec.lambda / opts.warm_start_step - 1e-12)));
        for (int j = 1; j <= stages; ++j) {
            const double lambda_j = spec.lambda * j / stages;
            best = detail::solve_stage(path, model, spec, opts, best.theta, lambda_j, opts.trace);
            total_iters += best.iters;
        }
    }

    FitResult result;
    result.theta_hat = best.theta;
    result.objective_value = best.f;
    result.iterations = total_iters;
    result.grad_norm = best.grad_norm;
    result.converged =
        best.simplex_converged || best.grad_norm <= opts.grad_tol * static_cast<double>(path.n);

    const double mu_margin = 1e-9 * (box.mu_hi - box.mu_lo);
    const double sigma_margin = 1e-9 * (box.sigma_hi - box.sigma_lo);
    result.at_boundary = best.theta.mu <= box.mu_lo + mu_margin ||
                         best.theta.mu >= box.mu_hi - mu_margin ||
                         best.theta.sigma <= box.sigma_lo + sigma_margin ||
                         best.theta.sigma >= box.sigma_hi - sigma_margin;
    return result;
}

}  // namespace robdiff
