#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "robdiff/model.hpp"
#include "robdiff/rng.hpp"

// Euler-Maruyama simulation of discretely observed sample paths.
// The integrator runs on an internal grid of h/substeps and records every
// substeps-th state, so the observation step h can stay coarse while the
// discretization error stays small.

namespace robdiff {

struct SamplePath {
    long n = 0;                  // number of observation increments
    double h = 0.0;              // observation step
    std::vector<double> values;  // n + 1 observations
    std::uint64_t seed = 0;      // provenance
};

struct SimulationOptions {
    enum class Init { Fixed, StationaryOU };

    int substeps = 10;        // internal Euler steps per observation interval
    long burn_in = 1000;      // internal steps discarded before t_0
    Init init = Init::Fixed;
    double x0 = 0.0;          // used when init == Fixed
};

// Default observation-step rule h_n = n^{-0.55}.
inline double default_step(long n) { return std::pow(static_cast<double>(n), -0.55); }

inline SamplePath simulate_path(const DiffusionModel& model, const Params& theta, long n,
                                double h, const SimulationOptions& opts = {},
                                std::uint64_t seed = 0) {
    if (n < 2) throw std::invalid_argument("simulate_path: n must be >= 2");
    if (!(h > 0.0)) throw std::invalid_argument("simulate_path: h must be > 0");
    if (!(theta.sigma >= 0.0)) throw std::invalid_argument("simulate_path: sigma must be >= 0");
    if (opts.substeps < 1) throw std::invalid_argument("simulate_path: substeps must be >= 1");
    if (opts.burn_in < 0) throw std::invalid_argument("simulate_path: burn_in must be >= 0");

    auto engine = make_engine(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    double x;
    if (opts.init == SimulationOptions::Init::StationaryOU) {
        if (model.id != ModelId::ModelA || !(theta.mu > 0.0))
            throw std::invalid_argument(
                "simulate_path: StationaryOU init requires ModelA with mu > 0");
        x = std::sqrt(theta.sigma * theta.sigma / (2.0 * theta.mu)) * gauss(engine);
    } else {
        x = opts.x0;
    }

    const double dt = h / opts.substeps;
    const double sqrt_dt = std::sqrt(dt);
    long step_index = 0;

    auto advance = [&](double state) {
        const double next = state + model.drift(state, theta.mu) * dt +
                            model.diffusion(state, theta.sigma) * sqrt_dt * gauss(engine);
        ++step_index;
        if (!std::isfinite(next))
            throw std::runtime_error("simulate_path: non-finite state at internal step " +
                                     std::to_string(step_index) +
                                     " (explosive parameters or step too large)");
        return next;
    };

    for (long i = 0; i < opts.burn_in; ++i) x = advance(x);

    SamplePath path;
    path.n = n;
    path.h = h;
    path.seed = seed;
    path.values.reserve(static_cast<std::size_t>(n) + 1);
    path.values.push_back(x);
    for (long i = 0; i < n; ++i) {
        for (int s = 0; s < opts.substeps; ++s) x = advance(x);
        path.values.push_back(x);
    }
    return path;
}

}  // namespace robdiff
