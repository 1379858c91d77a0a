#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "robdiff/contamination.hpp"
#include "robdiff/csv.hpp"
#include "robdiff/estimator.hpp"
#include "robdiff/model.hpp"
#include "robdiff/rng.hpp"
#include "robdiff/simulate.hpp"

// Monte Carlo harness: per replication one clean path is simulated for every
// sample size, every contamination setting is applied to that same path, and
// every estimator is fitted on each observed series. Bias and MSE are
// aggregated over converged interior fits.
//
// All randomness is derived per (master_seed, n, replication, setting), so
// reports are bit-identical for a fixed config regardless of thread count.

namespace robdiff {

enum class Scenario { Clean, AO, RO };

inline std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::Clean: return "clean";
        case Scenario::AO: return "ao";
        default: return "ro";
    }
}

inline Scenario scenario_from_string(const std::string& s) {
    if (s == "clean" || s == "none") return Scenario::Clean;
    if (s == "ao") return Scenario::AO;
    if (s == "ro") return Scenario::RO;
    throw std::invalid_argument("unknown scenario '" + s + "' (expected clean, ao or ro)");
}

struct ExperimentConfig {
    ModelId model = ModelId::ModelA;
    Params theta0{1.0, 1.0};
    Scenario scenario = Scenario::Clean;
    double epsilon = 0.05;
    std::vector<double> sigma_z2_list;  // contamination settings; unused for Clean
    std::vector<long> n_list{50, 100, 200, 500};
    std::vector<DivergenceSpec> estimators;
    int reps = 2000;
    std::uint64_t master_seed = 1;
    double h_exponent = 0.55;  // h_n = n^{-h_exponent}
    SimulationOptions sim_opts{};
    FitOptions fit_opts{};
    int threads = 0;  // 0 = all hardware threads
};

struct ReportRow {
    Family family = Family::Gamma;
    double lambda = 0.0;
    long n = 0;
    Scenario scenario = Scenario::Clean;
    double sigma_z2 = 0.0;
    double bias_mu = 0.0;
    double bias_sigma = 0.0;
    double mse_mu = 0.0;
    double mse_sigma = 0.0;
    int reps_used = 0;
    int failures = 0;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
};

namespace detail {

inline constexpr std::uint64_t kPathStream = 0x7061746873696dULL;
inline constexpr std::uint64_t kContamStream = 0x636f6e74616dULL;

struct Setting {
    Scenario scenario = Scenario::Clean;
    double sigma_z2 = 0.0;
};

struct FitOutcome {
    bool ok = false;
    double mu = 0.0;
    double sigma = 0.0;
};

}  // namespace detail

inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    if (config.reps < 1) throw std::invalid_argument("run_experiment: reps must be >= 1");
    if (config.n_list.empty()) throw std::invalid_argument("run_experiment: empty n list");
    for (long n : config.n_list)
        if (n < 10) throw std::invalid_argument("run_experiment: every n must be >= 10");
    if (config.estimators.empty())
        throw std::invalid_argument("run_experiment: no estimators configured");
    if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0))
        throw std::invalid_argument("run_experiment: epsilon must lie in [0, 1]");
    if (config.scenario != Scenario::Clean && config.sigma_z2_list.empty())
        throw std::invalid_argument("run_experiment: contaminated scenario needs sigma_z2 values");

    const DiffusionModel model = make_model(config.model);

    std::vector<detail::Setting> settings{{Scenario::Clean, 0.0}};
    if (config.scenario != Scenario::Clean)
        for (double s : config.sigma_z2_list) settings.push_back({config.scenario, s});

    const std::size_t n_count = config.n_list.size();
    const std::size_t cells_per_rep = n_count * settings.size() * config.estimators.size();
    std::vector<detail::FitOutcome> outcomes(static_cast<std::size_t>(config.reps) *
                                             cells_per_rep);

    FitOptions fit_opts = config.fit_opts;
    fit_opts.trace = nullptr;  // workers share nothing

    auto run_rep = [&](int rep) {
        const std::size_t base = static_cast<std::size_t>(rep) * cells_per_rep;
        for (std::size_t ni = 0; ni < n_count; ++ni) {
            const long n = config.n_list[ni];
            const double h = std::pow(static_cast<double>(n), -config.h_exponent);
            SamplePath clean;
            bool have_path = true;
            try {
                clean = simulate_path(
                    model, config.theta0, n, h, config.sim_opts,
                    derive_seed(config.master_seed, detail::kPathStream,
                                static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)));
            } catch (const std::exception&) {
                have_path = false;
            }
            for (std::size_t si = 0; si < settings.size(); ++si) {
                SamplePath observed;
                bool have_series = have_path;
                if (have_path) {
                    if (settings[si].scenario == Scenario::Clean) {
                        observed = clean;
                    } else {
                        ContaminationSpec spec;
                        spec.kind = settings[si].scenario == Scenario::AO ? OutlierKind::AO
                                                                          : OutlierKind::RO;
                        spec.epsilon = config.epsilon;
                        spec.sigma_z2 = settings[si].sigma_z2;
                        spec.seed = derive_seed(config.master_seed, detail::kContamStream,
                                                static_cast<std::uint64_t>(n),
                                                static_cast<std::uint64_t>(rep),
                                                std::bit_cast<std::uint64_t>(settings[si].sigma_z2));
                        try {
                            observed = contaminate(clean, spec);
                        } catch (const std::exception&) {
                            have_series = false;
                        }
                    }
                }
                for (std::size_t ei = 0; ei < config.estimators.size(); ++ei) {
                    detail::FitOutcome& slot =
                        outcomes[base + (ni * settings.size() + si) * config.estimators.size() +
                                 ei];
                    if (!have_series) continue;
                    try {
                        const FitResult r = fit(observed, model, config.estimators[ei], fit_opts);
                        if (r.converged && !r.at_boundary) {
                            slot.ok = true;
                            slot.mu = r.theta_hat.mu;
                            slot.sigma = r.theta_hat.sigma;
                        }
                    } catch (const std::exception&) {
                        // counted as a failure
                    }
                }
            }
        }
    };

    int workers = config.threads > 0 ? config.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (workers == 1 || config.reps == 1) {
        for (int rep = 0; rep < config.reps; ++rep) run_rep(rep);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (int rep = next.fetch_add(1); rep < config.reps; rep = next.fetch_add(1))
                    run_rep(rep);
            });
        for (std::thread& t : pool) t.join();
    }

    // deterministic sequential reduction in replication order
    ExperimentReport report;
    for (std::size_t ni = 0; ni < n_count; ++ni) {
        for (std::size_t si = 0; si < settings.size(); ++si) {
            for (std::size_t ei = 0; ei < config.estimators.size(); ++ei) {
                const std::size_t cell =
                    (ni * settings.size() + si) * config.estimators.size() + ei;
                double sum_mu = 0.0, sum_sigma = 0.0, sq_mu = 0.0, sq_sigma = 0.0;
                int used = 0;
                for (int rep = 0; rep < config.reps; ++rep) {
                    const detail::FitOutcome& o =
                        outcomes[static_cast<std::size_t>(rep) * cells_per_rep + cell];
                    if (!o.ok) continue;
                    ++used;
                    const double dmu = o.mu - config.theta0.mu;
                    const double dsigma = o.sigma - config.theta0.sigma;
                    sum_mu += dmu;
                    sum_sigma += dsigma;
                    sq_mu += dmu * dmu;
                    sq_sigma += dsigma * dsigma;
                }
                ReportRow row;
                row.family = config.estimators[ei].family;
                row.lambda = config.estimators[ei].lambda;
                row.n = config.n_list[ni];
                row.scenario = settings[si].scenario;
                row.sigma_z2 = settings[si].sigma_z2;
                row.reps_used = used;
                row.failures = config.reps - used;
                if (used > 0) {
                    row.bias_mu = sum_mu / used;
                    row.bias_sigma = sum_sigma / used;
                    row.mse_mu = sq_mu / used;
                    row.mse_sigma = sq_sigma / used;
                } else {
                    row.bias_mu = row.bias_sigma = row.mse_mu = row.mse_sigma =
                        std::numeric_limits<double>::quiet_NaN();
                }
                report.rows.push_back(row);
            }
        }
    }
    return report;
}

inline std::string report_to_csv(const ExperimentReport& report) {
    if (report.rows.empty()) throw std::invalid_argument("report_to_csv: empty report");

    std::vector<ReportRow> rows = report.rows;
    std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        if (a.scenario != b.scenario) return a.scenario < b.scenario;
        if (a.family != b.family) return a.family < b.family;
        if (a.lambda != b.lambda) return a.lambda < b.lambda;
        if (a.n != b.n) return a.n < b.n;
        return a.sigma_z2 < b.sigma_z2;
    });

    std::ostringstream out;
    out << "family,lambda,n,scenario,sigma_z2,bias_mu,bias_sigma,mse_mu,mse_sigma,"
           "reps_used,failures\n";
    for (const ReportRow& r : rows) {
        out << to_string(r.family) << ',' << format_number(r.lambda) << ',' << r.n << ','
            << to_string(r.scenario) << ',' << format_number(r.sigma_z2) << ','
            << format_number(r.bias_mu) << ',' << format_number(r.bias_sigma) << ','
            << format_number(r.mse_mu) << ',' << format_number(r.mse_sigma) << ','
            << r.reps_used << ',' << r.failures << '\n';
    }
    return out.str();
}

inline ExperimentReport report_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("family,lambda,n,scenario,", 0) != 0)
        throw std::invalid_argument("report_from_csv: missing header");

    ExperimentReport report;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        ReportRow r;
        std::getline(row, field, ',');
        r.family = field == "dpower" ? Family::DensityPower : Family::Gamma;
        std::getline(row, field, ',');
        r.lambda = std::stod(field);
        std::getline(row, field, ',');
        r.n = std::stol(field);
        std::getline(row, field, ',');
        r.scenario = scenario_from_string(field);
        std::getline(row, field, ',');
        r.sigma_z2 = std::stod(field);
        std::getline(row, field, ',');
        r.bias_mu = std::stod(field);
        std::getline(row, field, ',');
        r.bias_sigma = std::stod(field);
        std::getline(row, field, ',');
        r.mse_mu = std::stod(field);
        std::getline(row, field, ',');
        r.mse_sigma = std::stod(field);
        std::getline(row, field, ',');
        r.reps_used = std::stoi(field);
        std::getline(row, field, ',');
        r.failures = std::stoi(field);
        report.rows.push_back(r);
    }
    return report;
}

}  // namespace robdiff
