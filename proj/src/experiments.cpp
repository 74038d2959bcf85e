#include "latreg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace latreg {

namespace {

using json = nlohmann::json;

std::string fmt6(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path);
    return out;
}

/// Chunked replicate loop. Block boundaries are multiples of `chunk`
/// regardless of the thread count, and each block only writes its own result
/// slots, so outputs do not depend on how blocks land on threads.
void for_each_chunk(int total, int threads, int chunk,
                    const std::function<void(int, int)>& body) {
    const int nblocks = (total + chunk - 1) / chunk;
    if (threads <= 1) {
        for (int b = 0; b < nblocks; ++b)
            body(b * chunk, std::min(total, (b + 1) * chunk));
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int b = next.fetch_add(1);
            if (b >= nblocks) return;
            body(b * chunk, std::min(total, (b + 1) * chunk));
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(threads, nblocks); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

struct VarStats {
    double var = 0.0;       // scaled sample variance
    double se = 0.0;        // MC standard error of the variance
    std::vector<double> sqdev;  // scaled squared deviations, for ratio SEs
};

VarStats scaled_variance_stats(const std::vector<double>& beta, double norm) {
    const int r = static_cast<int>(beta.size());
    VarStats s;
    if (r < 2) return s;
    double mean = 0.0;
    for (double b : beta) mean += b;
    mean /= r;
    s.sqdev.resize(beta.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) {
        double d = (beta[i] - mean) * norm;
        s.sqdev[i] = d * d;
        acc += s.sqdev[i];
    }
    s.var = acc / (r - 1);
    s.se = s.var * std::sqrt(2.0 / (r - 1));
    return s;
}

/// Delta-method SE of var1/var2 with paired replicates.
double ratio_se(const VarStats& a, const VarStats& b) {
    const int r = static_cast<int>(a.sqdev.size());
    if (r < 2 || b.sqdev.size() != a.sqdev.size()) return 0.0;
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < r; ++i) {
        ma += a.sqdev[i];
        mb += b.sqdev[i];
    }
    ma /= r;
    mb /= r;
    double vaa = 0.0, vbb = 0.0, vab = 0.0;
    for (int i = 0; i < r; ++i) {
        double da = a.sqdev[i] - ma, db = b.sqdev[i] - mb;
        vaa += da * da;
        vbb += db * db;
        vab += da * db;
    }
    vaa /= (r - 1);
    vbb /= (r - 1);
    vab /= (r - 1);
    double ratio = a.var / b.var;
    double rel = vaa / (a.var * a.var) + vbb / (b.var * b.var) - 2.0 * vab / (a.var * b.var);
    return std::abs(ratio) * std::sqrt(std::max(0.0, rel) / r);
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    os << "models=";
    for (ModelId id : models) os << to_string(id) << ",";
    os << ";regressor=" << to_string(regressor) << ";orders=";
    for (auto& o : orders) os << o.first << "x" << o.second << ",";
    os << ";n=";
    for (int n : n_values) os << n << ",";
    os << ";replicates=" << replicates << ";fit_n=" << fit_n
       << ";fit_replicates=" << fit_replicates << ";seed=" << base_seed << ";beta=" << fmt6(beta)
       << ";refit=" << refit_per_replicate << ";dense_cap=" << dense_cap
       << ";timing_runs=" << timing_runs << ";timing_n=" << timing_n
       << ";timing_scaling_n=" << timing_scaling_n;
    return os.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical()); }

// ---------------------------------------------------------------------------
// ResultTable
// ---------------------------------------------------------------------------

const ResultRow& ResultTable::find(const std::string& model, const std::string& family, int N,
                                   const std::string& estimator) const {
    for (const auto& r : rows)
        if (r.model == model && r.family == family && r.N == N && r.estimator == estimator)
            return r;
    throw error("result table: no row for " + model + "/" + family + "/N=" + std::to_string(N) +
                "/" + estimator);
}

void ResultTable::write_csv(const std::string& path) const {
    auto out = open_out(path);
    out << "model,regressor,approximation,N,estimator,replicates,excluded,"
           "scaled_empirical_variance,mc_se,asymptotic_variance,ratio_to_glse,ratio_se,"
           "theoretical_ratio,seed_lo,seed_hi,config_hash\n";
    for (const auto& r : rows) {
        out << r.model << ',' << r.regressor << ',' << r.family << ',' << r.N << ','
            << r.estimator << ',' << r.replicates << ',' << r.excluded << ','
            << fmt6(r.scaled_emp_var) << ',' << fmt6(r.mc_se) << ',' << fmt6(r.asym_var) << ','
            << fmt6(r.ratio_to_glse) << ',' << fmt6(r.ratio_se) << ','
            << fmt6(r.theoretical_ratio) << ',' << r.seed_lo << ',' << r.seed_hi << ','
            << config_hash << '\n';
    }
    if (!out) throw io_error("write failed: " + path);
}

void ResultTable::write_json(const std::string& path) const {
    json doc;
    doc["config_hash"] = config_hash;
    doc["rows"] = json::array();
    auto put = [](json& j, const char* key, double v) {
        if (!std::isnan(v)) j[key] = v;
    };
    for (const auto& r : rows) {
        json j{{"model", r.model},         {"regressor", r.regressor}, {"approximation", r.family},
               {"N", r.N},                 {"estimator", r.estimator}, {"replicates", r.replicates},
               {"excluded", r.excluded},   {"seed_lo", r.seed_lo},     {"seed_hi", r.seed_hi}};
        put(j, "scaled_empirical_variance", r.scaled_emp_var);
        put(j, "mc_se", r.mc_se);
        put(j, "asymptotic_variance", r.asym_var);
        put(j, "ratio_to_glse", r.ratio_to_glse);
        put(j, "ratio_se", r.ratio_se);
        put(j, "theoretical_ratio", r.theoretical_ratio);
        doc["rows"].push_back(std::move(j));
    }
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Fit stage
// ---------------------------------------------------------------------------

namespace {

struct FitDraw {
    bool ok = false;
    Eigen::VectorXd phi1, phi2;
    double sigma12 = 0.0;
};

}  // namespace

std::vector<FittedApprox> average_parameter_fits(const CovarianceModel& model,
                                                 RegressorKind regressor,
                                                 const std::vector<std::pair<int, int>>& orders,
                                                 int fit_n, int fit_replicates,
                                                 std::uint64_t seed0, double beta, int threads) {
    if (fit_replicates < 1) throw parameter_error("fit stage: need at least one replicate");
    LatticeDesign design = LatticeDesign::build(regressor, fit_n);
    FieldSampler sampler(model, fit_n);
    Eigen::VectorXd beta_vec = Eigen::VectorXd::Constant(1, beta);

    std::vector<std::vector<FitDraw>> draws(orders.size());
    for (auto& d : draws) d.resize(fit_replicates);

    const int chunk = 64;
    for_each_chunk(fit_replicates, threads, chunk, [&](int lo, int hi) {
        Eigen::MatrixXd eps = sampler.sample_block(seed0 + lo, hi - lo);
        for (int r = lo; r < hi; ++r) {
            Eigen::VectorXd y = design.X * beta_vec + eps.col(r - lo);
            Eigen::VectorXd bhat = lse(design, y);
            Eigen::VectorXd resid = residuals(design, y, bhat);
            for (std::size_t k = 0; k < orders.size(); ++k) {
                try {
                    SeparableARModel m = fit_separable(resid, fit_n, orders[k]);
                    draws[k][r] = {true, m.phi1, m.phi2, m.sigma12};
                } catch (const fit_error&) {
                } catch (const degenerate_root_error&) {
                }
            }
        }
    });

    std::vector<FittedApprox> out;
    for (std::size_t k = 0; k < orders.size(); ++k) {
        FittedApprox fa;
        fa.orders = orders[k];
        Eigen::VectorXd phi1 = Eigen::VectorXd::Zero(orders[k].first);
        Eigen::VectorXd phi2 = Eigen::VectorXd::Zero(orders[k].second);
        double sigma12 = 0.0;
        for (const auto& d : draws[k]) {
            if (!d.ok) {
                ++fa.excluded;
                continue;
            }
            phi1 += d.phi1;
            phi2 += d.phi2;
            sigma12 += d.sigma12;
            ++fa.used;
        }
        if (fa.used == 0) throw fit_error("fit stage: every replicate was excluded");
        fa.model.phi1 = phi1 / fa.used;
        fa.model.phi2 = phi2 / fa.used;
        fa.model.sigma12 = sigma12 / fa.used;
        fa.model.validate();
        if (fa.excluded * 100 > fit_replicates)
            std::cerr << "[latreg] warning: " << fa.excluded << "/" << fit_replicates
                      << " fits excluded for orders " << orders[k].first << "x"
                      << orders[k].second << "\n";
        out.push_back(std::move(fa));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiments 1 and 2
// ---------------------------------------------------------------------------

namespace {

std::string family_name(std::pair<int, int> orders) {
    return "ar" + std::to_string(orders.first) + "xar" + std::to_string(orders.second);
}

ResultTable run_core(const ExperimentConfig& cfg, bool with_glse) {
    if (cfg.replicates < 2) throw parameter_error("experiment: need at least 2 replicates");
    ResultTable table;
    table.config_hash = cfg.hash();
    const JumpMeasure jumps = jump_measure(cfg.regressor);
    const Eigen::MatrixXd r00 = jumps.char_fn(0, 0);

    for (ModelId id : cfg.models) {
        const CovarianceModel model = reference_model(id);
        const std::string model_name = to_string(id);
        FoldedSpectrum fold = FoldedSpectrum::adaptive(model);
        SpectralFn f = [&fold](double l1, double l2) { return fold(l1, l2); };

        std::vector<FittedApprox> fits =
            average_parameter_fits(model, cfg.regressor, cfg.orders, cfg.fit_n,
                                   cfg.fit_replicates, cfg.base_seed, cfg.beta, cfg.threads);

        const double asym_glse = asym_cov_glse(f, jumps)(0, 0);
        const double asym_lse = asym_cov_lse(f, jumps, r00)(0, 0);

        for (int n_idx = 0; n_idx < static_cast<int>(cfg.n_values.size()); ++n_idx) {
            const int N = cfg.n_values[n_idx];
            if (N < std::max(cfg.orders.back().first, cfg.orders.back().second) + 2)
                throw parameter_error("experiment: N too small for the AR orders");
            LatticeDesign design = LatticeDesign::build(cfg.regressor, N);
            Eigen::VectorXd beta_vec = Eigen::VectorXd::Constant(1, cfg.beta);
            const double norm = design.norms(0);
            FieldSampler sampler(model, N, cfg.dense_cap);

            std::optional<GlseSolver> glse_solver;
            if (with_glse) {
                if (sampler.kronecker()) {
                    Eigen::MatrixXd sigma = assemble_sigma(model, N, cfg.dense_cap);
                    glse_solver.emplace(design, sigma);
                } else {
                    glse_solver.emplace(design, sampler.dense_llt());
                }
            }
            std::vector<PbeSolver> pbe_solvers;
            if (!cfg.refit_per_replicate)
                for (const auto& fa : fits) pbe_solvers.emplace_back(design, fa.model);

            const std::uint64_t seed_lo =
                cfg.base_seed + 1000000ull + static_cast<std::uint64_t>(N) * 100000ull;
            const int R = cfg.replicates;
            std::vector<double> b_lse(R), b_glse(R);
            std::vector<std::vector<double>> b_pbe(fits.size(), std::vector<double>(R));
            std::vector<std::vector<char>> pbe_ok(fits.size(),
                                                  std::vector<char>(R, cfg.refit_per_replicate ? 0 : 1));

            const int chunk = 64;
            for_each_chunk(R, cfg.threads, chunk, [&](int lo, int hi) {
                Eigen::MatrixXd eps = sampler.sample_block(seed_lo + lo, hi - lo);
                for (int r = lo; r < hi; ++r) {
                    Eigen::VectorXd y = design.X * beta_vec + eps.col(r - lo);
                    Eigen::VectorXd bl = lse(design, y);
                    b_lse[r] = bl(0);
                    if (glse_solver) b_glse[r] = glse_solver->solve(y)(0);
                    for (std::size_t k = 0; k < fits.size(); ++k) {
                        if (cfg.refit_per_replicate) {
                            try {
                                SeparableARModel m = fit_separable(residuals(design, y, bl), N,
                                                                   fits[k].orders);
                                b_pbe[k][r] = pbe(design, y, m)(0);
                                pbe_ok[k][r] = 1;
                            } catch (const fit_error&) {
                            } catch (const degenerate_root_error&) {
                            }
                        } else {
                            b_pbe[k][r] = pbe_solvers[k].solve(y)(0);
                        }
                    }
                }
            });

            VarStats lse_stats = scaled_variance_stats(b_lse, norm);
            VarStats glse_stats;
            if (with_glse) glse_stats = scaled_variance_stats(b_glse, norm);

            ResultRow lrow;
            lrow.model = model_name;
            lrow.regressor = to_string(cfg.regressor);
            lrow.family = "-";
            lrow.estimator = "lse";
            lrow.N = N;
            lrow.replicates = R;
            lrow.scaled_emp_var = lse_stats.var;
            lrow.mc_se = lse_stats.se;
            lrow.asym_var = asym_lse;
            lrow.seed_lo = seed_lo;
            lrow.seed_hi = seed_lo + R - 1;
            if (with_glse) {
                lrow.ratio_to_glse = lse_stats.var / glse_stats.var;
                lrow.ratio_se = ratio_se(lse_stats, glse_stats);
                lrow.theoretical_ratio = asym_lse / asym_glse;
            }
            table.rows.push_back(lrow);

            if (with_glse) {
                ResultRow grow = lrow;
                grow.estimator = "glse";
                grow.scaled_emp_var = glse_stats.var;
                grow.mc_se = glse_stats.se;
                grow.asym_var = asym_glse;
                grow.ratio_to_glse = 1.0;
                grow.ratio_se = 0.0;
                grow.theoretical_ratio = 1.0;
                table.rows.push_back(grow);
            }

            for (std::size_t k = 0; k < fits.size(); ++k) {
                std::vector<double> kept;
                std::vector<double> kept_glse;
                kept.reserve(R);
                for (int r = 0; r < R; ++r) {
                    if (!pbe_ok[k][r]) continue;
                    kept.push_back(b_pbe[k][r]);
                    if (with_glse) kept_glse.push_back(b_glse[r]);
                }
                VarStats pbe_stats = scaled_variance_stats(kept, norm);
                SpectralFn g = [m = fits[k].model](double l1, double l2) { return m.g(l1, l2); };
                ResultRow prow;
                prow.model = model_name;
                prow.regressor = to_string(cfg.regressor);
                prow.family = family_name(fits[k].orders);
                prow.estimator = "pbe";
                prow.N = N;
                prow.replicates = static_cast<int>(kept.size());
                prow.excluded = R - static_cast<int>(kept.size()) + fits[k].excluded;
                prow.scaled_emp_var = pbe_stats.var;
                prow.mc_se = pbe_stats.se;
                prow.asym_var = asym_cov_pbe(f, g, jumps)(0, 0);
                prow.seed_lo = seed_lo;
                prow.seed_hi = seed_lo + R - 1;
                if (with_glse) {
                    VarStats paired_glse = scaled_variance_stats(kept_glse, norm);
                    prow.ratio_to_glse = pbe_stats.var / paired_glse.var;
                    prow.ratio_se = ratio_se(pbe_stats, paired_glse);
                    prow.theoretical_ratio = prow.asym_var / asym_glse;
                }
                table.rows.push_back(prow);
            }
        }
    }
    return table;
}

}  // namespace

ResultTable run_experiment1(const ExperimentConfig& cfg) { return run_core(cfg, false); }

ResultTable run_experiment2(const ExperimentConfig& cfg) { return run_core(cfg, true); }

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// One measurement: fast bodies are repeated until the total is long enough
/// to trust the clock, then averaged.
double time_adaptive(const std::function<void()>& body, double min_total = 0.02) {
    auto t0 = std::chrono::steady_clock::now();
    body();
    double once = seconds_since(t0);
    if (once >= min_total) return once;
    int reps = static_cast<int>(std::ceil(min_total / std::max(once, 1e-9)));
    reps = std::min(reps, 2000000);
    t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) body();
    return seconds_since(t0) / reps;
}

double median_of(int runs, const std::function<double()>& measure) {
    std::vector<double> xs(runs);
    for (int i = 0; i < runs; ++i) xs[i] = measure();
    std::sort(xs.begin(), xs.end());
    return runs % 2 ? xs[runs / 2] : 0.5 * (xs[runs / 2 - 1] + xs[runs / 2]);
}

volatile double g_timing_sink = 0.0;

}  // namespace

double TimingReport::get(int N, const std::string& item, const std::string& family) const {
    for (const auto& r : rows)
        if (r.N == N && r.item == item && r.family == family) return r.seconds;
    throw error("timing report: no entry " + item + "/" + family + "/N=" + std::to_string(N));
}

void TimingReport::write_csv(const std::string& path) const {
    auto out = open_out(path);
    out << "N,item,approximation,seconds,runs,config_hash\n";
    for (const auto& r : rows)
        out << r.N << ',' << r.item << ',' << r.family << ',' << fmt6(r.seconds) << ',' << r.runs
            << ',' << config_hash << '\n';
    if (!out) throw io_error("write failed: " + path);
}

void TimingReport::write_json(const std::string& path) const {
    json doc;
    doc["config_hash"] = config_hash;
    doc["rows"] = json::array();
    for (const auto& r : rows)
        doc["rows"].push_back({{"N", r.N},
                               {"item", r.item},
                               {"approximation", r.family},
                               {"seconds", r.seconds},
                               {"runs", r.runs}});
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
}

TimingReport run_timing(const ExperimentConfig& cfg) {
    TimingReport report;
    report.config_hash = cfg.hash();
    const CovarianceModel model =
        cfg.models.empty() ? reference_model(ModelId::Matern2) : reference_model(cfg.models[0]);
    const int runs = std::max(1, cfg.timing_runs);

    std::vector<int> sizes{cfg.timing_scaling_n, cfg.timing_n};
    for (int N : sizes) {
        LatticeDesign design = LatticeDesign::build(cfg.regressor, N);
        Eigen::VectorXd beta_vec = Eigen::VectorXd::Constant(1, cfg.beta);
        FieldSampler sampler(model, N, std::max(cfg.dense_cap, N));
        Eigen::VectorXd y = design.X * beta_vec + sampler.sample(cfg.base_seed + N).eps;
        Eigen::VectorXd beta_lse = lse(design, y);

        report.rows.push_back(
            {N, "lse", "-",
             median_of(runs,
                       [&] {
                           return time_adaptive([&] { g_timing_sink = g_timing_sink + lse(design, y)(0); });
                       }),
             runs});

        {
            Eigen::MatrixXd sigma_storage;
            const Eigen::MatrixXd* sigma = nullptr;
            if (sampler.kronecker()) {
                sigma_storage = assemble_sigma(model, N, std::max(cfg.dense_cap, N));
                sigma = &sigma_storage;
            } else {
                sigma = &sampler.dense_sigma();
            }
            report.rows.push_back(
                {N, "glse", "-",
                 median_of(runs,
                           [&] {
                               return time_adaptive(
                                   [&] { g_timing_sink = g_timing_sink + glse(design, y, *sigma)(0); });
                           }),
                 runs});
        }

        for (const auto& orders : cfg.orders) {
            const std::string fam = family_name(orders);
            SeparableARModel fitted =
                fit_separable(residuals(design, y, beta_lse), N, orders);
            report.rows.push_back(
                {N, "fit", fam,
                 median_of(runs,
                           [&] {
                               return time_adaptive([&] {
                                   SeparableARModel m = fit_separable(
                                       residuals(design, y, beta_lse), N, orders);
                                   g_timing_sink = g_timing_sink + m.sigma12;
                               });
                           }),
                 runs});
            report.rows.push_back(
                {N, "pbe_solve", fam,
                 median_of(runs,
                           [&] {
                               return time_adaptive(
                                   [&] { g_timing_sink = g_timing_sink + pbe(design, y, fitted)(0); });
                           }),
                 runs});
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Spectral surfaces
// ---------------------------------------------------------------------------

void emit_spectral_surface(const SpectralFn& density, int resolution, const std::string& path) {
    if (resolution < 2) throw parameter_error("surface: resolution must be >= 2");
    const double pi = 3.14159265358979323846;
    auto out = open_out(path);
    out << "lambda1,lambda2,density\n";
    for (int i = 0; i < resolution; ++i) {
        double l1 = pi * i / (resolution - 1);
        for (int j = 0; j < resolution; ++j) {
            double l2 = pi * j / (resolution - 1);
            out << fmt6(l1) << ',' << fmt6(l2) << ',' << fmt6(density(l1, l2)) << '\n';
        }
    }
    if (!out) throw io_error("write failed: " + path);
}

}  // namespace latreg
