#pragma once

#include <stdexcept>
#include <string>

// Parametric scalar diffusion models dX = b(X, mu) dt + a(X, sigma) dW.
// Two built-in models share the linear drift b(x, mu) = -mu x:
//   Model A: a(x, sigma) = sigma                  (Ornstein-Uhlenbeck)
//   Model B: a(x, sigma) = 1 + sigma / (1 + x^2)  (state-dependent volatility)

namespace robdiff {

struct Params {
    double mu = 1.0;     // drift parameter
    double sigma = 1.0;  // diffusion parameter, > 0 for estimation
};

struct ParamBounds {
    double mu_lo = 0.01;
    double mu_hi = 10.0;
    double sigma_lo = 0.01;
    double sigma_hi = 10.0;

    bool contains(const Params& p) const {
        return p.mu >= mu_lo && p.mu <= mu_hi && p.sigma >= sigma_lo && p.sigma <= sigma_hi;
    }
    Params clamp(Params p) const {
        if (p.mu < mu_lo) p.mu = mu_lo;
        if (p.mu > mu_hi) p.mu = mu_hi;
        if (p.sigma < sigma_lo) p.sigma = sigma_lo;
        if (p.sigma > sigma_hi) p.sigma = sigma_hi;
        return p;
    }
};

enum class ModelId { ModelA, ModelB };

inline std::string to_string(ModelId id) { return id == ModelId::ModelA ? "A" : "B"; }

struct DiffusionModel {
    ModelId id = ModelId::ModelA;
    double (*drift)(double x, double mu) = nullptr;
    double (*diffusion)(double x, double sigma) = nullptr;
    // exact analytic parameter derivatives
    double (*drift_dmu)(double x, double mu) = nullptr;
    double (*diffusion_dsigma)(double x, double sigma) = nullptr;
    ParamBounds param_bounds{};
};

inline DiffusionModel model_a() {
    DiffusionModel m;
    m.id = ModelId::ModelA;
    m.drift = [](double x, double mu) { return -mu * x; };
    m.diffusion = [](double, double sigma) { return sigma; };
    m.drift_dmu = [](double x, double) { return -x; };
    m.diffusion_dsigma = [](double, double) { return 1.0; };
    return m;
}

inline DiffusionModel model_b() {
    DiffusionModel m;
    m.id = ModelId::ModelB;
    m.drift = [](double x, double mu) { return -mu * x; };
    m.diffusion = [](double x, double sigma) { return 1.0 + sigma / (1.0 + x * x); };
    m.drift_dmu = [](double x, double) { return -x; };
    m.diffusion_dsigma = [](double x, double) { return 1.0 / (1.0 + x * x); };
    return m;
}

inline DiffusionModel make_model(ModelId id) {
    return id == ModelId::ModelA ? model_a() : model_b();
}

inline ModelId model_id_from_string(const std::string& s) {
    if (s == "A" || s == "a") return ModelId::ModelA;
    if (s == "B" || s == "b") return ModelId::ModelB;
    throw std::invalid_argument("unknown model '" + s + "' (expected A or B)");
}

}  // namespace robdiff
