#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "latreg/asymptotics.hpp"
#include "latreg/covariance.hpp"
#include "latreg/design.hpp"
#include "latreg/estimators.hpp"
#include "latreg/fit.hpp"
#include "latreg/sampler.hpp"

namespace latreg {

struct ExperimentConfig {
    std::vector<ModelId> models = all_model_ids();
    RegressorKind regressor = RegressorKind::Polynomial;
    std::vector<std::pair<int, int>> orders = {{1, 1}, {1, 2}, {2, 2}};
    std::vector<int> n_values = {20, 60};
    int replicates = 1000;
    int fit_n = 60;            // grid used to estimate the fixed g
    int fit_replicates = 1000;
    std::uint64_t base_seed = 20240601;
    double beta = 2.0;
    bool refit_per_replicate = false;  // sensitivity alternative to the fixed-g protocol
    int dense_cap = 128;
    int threads = 1;
    int timing_runs = 5;
    int timing_n = 100;
    int timing_scaling_n = 50;
    std::string out_dir = ".";

    /// Stable textual form used for hashing and the manifest.
    std::string canonical() const;
    std::uint64_t hash() const;  // FNV-1a over canonical()
};

struct ResultRow {
    std::string model;
    std::string regressor;
    std::string family;  // separable approximation, "-" for LSE/GLSE rows
    std::string estimator;
    int N = 0;
    int replicates = 0;
    int excluded = 0;
    double scaled_emp_var = std::numeric_limits<double>::quiet_NaN();
    double mc_se = std::numeric_limits<double>::quiet_NaN();
    double asym_var = std::numeric_limits<double>::quiet_NaN();
    double ratio_to_glse = std::numeric_limits<double>::quiet_NaN();
    double ratio_se = std::numeric_limits<double>::quiet_NaN();
    double theoretical_ratio = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed_lo = 0, seed_hi = 0;
};

struct ResultTable {
    std::vector<ResultRow> rows;
    std::uint64_t config_hash = 0;

    const ResultRow& find(const std::string& model, const std::string& family, int N,
                          const std::string& estimator) const;
    void write_csv(const std::string& path) const;
    void write_json(const std::string& path) const;
};

/// One separable approximation with parameters averaged over the fit stage.
struct FittedApprox {
    std::pair<int, int> orders;
    SeparableARModel model;
    int excluded = 0;  // replicates whose moment fit was inadmissible
    int used = 0;
};

/// Fit stage of the protocol: fit_replicates independent fields at fit_n,
/// LSE residual moment fits, componentwise parameter averages per family
/// (AR(2) axes average the coefficients; roots are recomputed from them).
std::vector<FittedApprox> average_parameter_fits(const CovarianceModel& model,
                                                 RegressorKind regressor,
                                                 const std::vector<std::pair<int, int>>& orders,
                                                 int fit_n, int fit_replicates,
                                                 std::uint64_t seed0, double beta, int threads);

/// Convergence experiment: scaled empirical variances of the PBE (and LSE)
/// against the Theorem limits, fixed g reused across every N.
ResultTable run_experiment1(const ExperimentConfig& cfg);

/// Efficiency experiment: adds the GLSE under the true covariance on common
/// replicates and reports empirical and theoretical variance ratios.
ResultTable run_experiment2(const ExperimentConfig& cfg);

struct TimingRow {
    int N = 0;
    std::string item;    // "lse", "glse", "fit", "pbe_solve"
    std::string family;  // approximation, "-" for LSE/GLSE
    double seconds = 0.0;
    int runs = 0;
};

struct TimingReport {
    std::vector<TimingRow> rows;
    std::uint64_t config_hash = 0;
    double get(int N, const std::string& item, const std::string& family = "-") const;
    void write_csv(const std::string& path) const;
    void write_json(const std::string& path) const;
};

/// Wall-clock medians for LSE, dense GLSE and the PBE (fit stage and solve
/// stage separately) on a single sampled field; the PBE solve is also timed
/// at timing_scaling_n for the complexity check. Runs single-threaded.
TimingReport run_timing(const ExperimentConfig& cfg);

/// Regular grid of a spectral density over [0, pi]^2, written as CSV with
/// header "lambda1,lambda2,density".
void emit_spectral_surface(const SpectralFn& density, int resolution, const std::string& path);

}  // namespace latreg
