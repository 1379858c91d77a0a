#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "robdiff/model.hpp"
#include "robdiff/simulate.hpp"

// Asymptotic covariance of the gamma-divergence estimator for constant-sigma
// models: mu converges at rate sqrt(n h), sigma at rate sqrt(n), with
//
//   var_mu    = sigma0^2 ((1+g)/sqrt(1+2g))^3 / S
//   var_sigma = sigma0^2 (1+g)^3 (3g^2 + 4g + 2) / (4 (1+2g)^{5/2})
//
// where S is the stationary second moment of the drift derivative. Both
// entries grow with g, which is the efficiency price of robustness. The
// comparison is meaningful for ModelA only (a(x, sigma) = sigma).

namespace robdiff {

struct StationaryMoments {
    enum class Source { ClosedFormOU, LongSimulation };
    double s_value = 0.0;  // integral of (d/dmu b)^2 against the invariant law
    Source source = Source::ClosedFormOU;
};

struct LongSimulationSpec {
    long length = 1000000;  // internal Euler steps
    std::uint64_t seed = 0;
    double dt = 0.01;
};

// S from the OU invariant law N(0, sigma0^2 / (2 mu0)); d/dmu b = -x.
inline StationaryMoments s_matrix(const DiffusionModel& model, const Params& theta0) {
    if (model.id != ModelId::ModelA)
        throw std::invalid_argument("s_matrix: closed form requires ModelA");
    if (!(theta0.mu > 0.0))
        throw std::invalid_argument("s_matrix: ModelA is ergodic only for mu > 0");
    return {theta0.sigma * theta0.sigma / (2.0 * theta0.mu),
            StationaryMoments::Source::ClosedFormOU};
}

// S as the time average of (d/dmu b(x_t))^2 over one long simulated path.
inline StationaryMoments s_matrix(const DiffusionModel& model, const Params& theta0,
                                  const LongSimulationSpec& sim) {
    if (!(theta0.mu > 0.0))
        throw std::invalid_argument("s_matrix: drift must be mean-reverting (mu > 0)");
    if (sim.length < 100) throw std::invalid_argument("s_matrix: simulation too short");

    SimulationOptions opts;
    opts.substeps = 1;
    opts.burn_in = static_cast<long>(std::min(100000.0, 0.1 * sim.length));
    const SamplePath path = simulate_path(model, theta0, sim.length, sim.dt, opts, sim.seed);
    double acc = 0.0;
    for (double x : path.values) {
        const double d = model.drift_dmu(x, theta0.mu);
        acc += d * d;
    }
    const double s = acc / static_cast<double>(path.values.size());
    if (!(s > 0.0)) throw std::runtime_error("s_matrix: simulated S is not positive");
    return {s, StationaryMoments::Source::LongSimulation};
}

struct AsympCov {
    double var_mu = 0.0;     // limit variance of sqrt(n h) (mu_hat - mu0)
    double var_sigma = 0.0;  // limit variance of sqrt(n) (sigma_hat - sigma0)
};

inline AsympCov theorem1_cov(double gamma, double sigma0, const StationaryMoments& s) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("theorem1_cov: gamma must be >= 0");
    if (!(sigma0 > 0.0)) throw std::invalid_argument("theorem1_cov: sigma0 must be > 0");
    if (!(s.s_value > 0.0)) throw std::invalid_argument("theorem1_cov: S must be positive");

    const double s2 = sigma0 * sigma0;
    const double g = gamma;
    AsympCov cov;
    cov.var_mu = s2 * std::pow((1.0 + g) / std::sqrt(1.0 + 2.0 * g), 3.0) / s.s_value;
    cov.var_sigma = s2 * std::pow(1.0 + g, 3.0) * (3.0 * g * g + 4.0 * g + 2.0) /
                    (4.0 * std::pow(1.0 + 2.0 * g, 2.5));
    return cov;
}

}  // namespace robdiff
