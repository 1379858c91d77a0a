#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "robdiff/rng.hpp"
#include "robdiff/simulate.hpp"

// Outlier mechanisms applied to an observed series. At every index an
// independent Bernoulli(epsilon) indicator R decides whether the observation
// is hit by N(0, sigma_z2) noise Z:
//   additive    (AO): y = x + R z
//   replacement (RO): y = (1 - R) x + R z
// The contamination stream is driven by its own seed, so one clean path can
// be reused across noise settings.

namespace robdiff {

enum class OutlierKind { None, AO, RO };

struct ContaminationSpec {
    OutlierKind kind = OutlierKind::None;
    double epsilon = 0.0;   // Pr(R = 1)
    double sigma_z2 = 0.0;  // Var(Z)
    std::uint64_t seed = 0;
};

inline SamplePath contaminate(const SamplePath& path, const ContaminationSpec& spec) {
    if (path.values.size() != static_cast<std::size_t>(path.n) + 1)
        throw std::invalid_argument("contaminate: malformed path");
    if (spec.kind != OutlierKind::None) {
        if (!(spec.epsilon >= 0.0 && spec.epsilon <= 1.0))
            throw std::invalid_argument("contaminate: epsilon must lie in [0, 1]");
        if (!(spec.sigma_z2 >= 0.0))
            throw std::invalid_argument("contaminate: sigma_z2 must be >= 0");
    }

    SamplePath out = path;
    out.seed = spec.seed;
    if (spec.kind == OutlierKind::None) return out;

    auto engine = make_engine(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sigma_z = std::sqrt(spec.sigma_z2);

    for (double& y : out.values) {
        // both draws happen at every index so the R pattern is a pure
        // function of (seed, index)
        const bool hit = unif(engine) < spec.epsilon;
        const double z = sigma_z * gauss(engine);
        if (!hit) continue;
        y = spec.kind == OutlierKind::AO ? y + z : z;
    }
    return out;
}

}  // namespace robdiff
