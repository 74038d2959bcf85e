#include "latreg/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "latreg/experiments.hpp"

namespace latreg {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kSchemaVersion = "1";
constexpr const char* kToolVersion = "0.1.0";

std::string default_out_dir() {
    if (const char* env = std::getenv("LATREG_OUT_DIR")) return env;
    return ".";
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory: " + dir);
}

void write_json_file(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw io_error("write failed: " + path);
}

void write_manifest(const std::string& dir, const std::string& command,
                    const ExperimentConfig& cfg) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["tool_version"] = kToolVersion;
    doc["command"] = command;
    doc["config"] = cfg.canonical();
    doc["config_hash"] = cfg.hash();
    doc["seed"] = cfg.base_seed;
    write_json_file(dir + "/manifest.json", doc);
}

// Known experiment-config keys; anything else is rejected.
const std::vector<std::string> kConfigKeys = {
    "models",       "regressor",       "orders",      "n",           "replicates",
    "fit_n",        "fit_replicates",  "seed",        "beta",        "refit_per_replicate",
    "dense_cap",    "threads",         "timing_runs", "timing_n",    "timing_scaling_n"};

void apply_config_json(ExperimentConfig& cfg, const json& doc) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& key = it.key();
        if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
            throw config_error("unknown config key: " + key);
        try {
            const json& v = it.value();
            if (key == "models") {
                cfg.models.clear();
                for (const auto& m : v) cfg.models.push_back(model_id_from_string(m));
            } else if (key == "regressor") {
                cfg.regressor = regressor_from_string(v);
            } else if (key == "orders") {
                cfg.orders.clear();
                for (const auto& o : v) cfg.orders.emplace_back(int(o.at(0)), int(o.at(1)));
            } else if (key == "n") {
                cfg.n_values = v.get<std::vector<int>>();
            } else if (key == "replicates") {
                cfg.replicates = v;
            } else if (key == "fit_n") {
                cfg.fit_n = v;
            } else if (key == "fit_replicates") {
                cfg.fit_replicates = v;
            } else if (key == "seed") {
                cfg.base_seed = v;
            } else if (key == "beta") {
                cfg.beta = v;
            } else if (key == "refit_per_replicate") {
                cfg.refit_per_replicate = v;
            } else if (key == "dense_cap") {
                cfg.dense_cap = v;
            } else if (key == "threads") {
                cfg.threads = v;
            } else if (key == "timing_runs") {
                cfg.timing_runs = v;
            } else if (key == "timing_n") {
                cfg.timing_n = v;
            } else if (key == "timing_scaling_n") {
                cfg.timing_scaling_n = v;
            }
        } catch (const json::exception& e) {
            throw config_error("bad value for config key '" + key + "': " + e.what());
        }
    }
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
    ExperimentConfig cfg;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw io_error("cannot open config file: " + path);
        json doc;
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw config_error(std::string("config parse error: ") + e.what());
        }
        apply_config_json(cfg, doc);
    }
    for (const std::string& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw config_error("override must look like key=value: " + kv);
        json frag;
        std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        try {
            frag[key] = json::parse(val);
        } catch (const json::exception&) {
            frag[key] = val;  // bare strings need no quoting on the command line
        }
        apply_config_json(cfg, frag);
    }
    return cfg;
}

struct ModelFlags {
    std::string model = "ar1xar1";
    std::optional<double> phi1, phi2;

    CovarianceModel build() const {
        CovarianceModel m = reference_model(model_id_from_string(model));
        if (!phi1 && !phi2) return m;
        if (!m.separable())
            throw config_error("--phi1/--phi2 apply only to separable models");
        ProductKernel prod = m.product();
        auto patch = [](Kernel1d& k, double phi) {
            if (!std::holds_alternative<Ar1Params>(k))
                throw config_error("--phi override needs an AR(1) axis");
            k = Ar1Params::normalized(phi);
        };
        if (phi1) patch(prod.axis1, *phi1);
        if (phi2) patch(prod.axis2, *phi2);
        return {prod};
    }
};

json estimates_json(const LatticeDesign& design, const Eigen::VectorXd& y,
                    const CovarianceModel& model, const SeparableARModel& fitted, int N,
                    int dense_cap) {
    json out;
    Eigen::VectorXd bl = lse(design, y);
    out["lse"] = bl(0);
    out["glse"] = glse(design, y, assemble_sigma(model, N, dense_cap))(0);
    bool warn = false;
    out["pbe"] = pbe(design, y, fitted, &warn)(0);
    out["pbe_conditioning_warning"] = warn;
    out["fitted"] = {{"phi1", std::vector<double>(fitted.phi1.data(),
                                                  fitted.phi1.data() + fitted.phi1.size())},
                     {"phi2", std::vector<double>(fitted.phi2.data(),
                                                  fitted.phi2.data() + fitted.phi2.size())},
                     {"sigma12", fitted.sigma12}};
    return out;
}

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Lattice spatial regression: LSE, GLSE and the separable-approximation PBE"};
    app.require_subcommand(1);

    std::string out_dir = default_out_dir();
    app.add_option("--out", out_dir, "Output directory (default: $LATREG_OUT_DIR or .)");

    // ---- estimate ----
    auto* est = app.add_subcommand("estimate", "Single estimation on one sampled field");
    ModelFlags est_model;
    int est_n = 20;
    std::uint64_t est_seed = 1;
    double est_beta = 2.0;
    std::string est_reg = "poly";
    std::vector<int> est_orders{1, 1};
    est->add_option("--model", est_model.model, "True covariance model id");
    est->add_option("--phi1", est_model.phi1, "Override AR(1) coefficient on axis 1");
    est->add_option("--phi2", est_model.phi2, "Override AR(1) coefficient on axis 2");
    est->add_option("--n", est_n, "Grid side N");
    est->add_option("--regressor", est_reg, "poly | harmonic | poly+harmonic");
    est->add_option("--seed", est_seed, "RNG seed");
    est->add_option("--beta", est_beta, "True coefficient");
    est->add_option("--orders", est_orders, "PBE approximation orders P1 P2")->expected(2);

    // ---- fit ----
    auto* fitcmd = app.add_subcommand("fit", "Separable AR fit from LSE residuals");
    ModelFlags fit_model;
    int fit_n = 60;
    std::uint64_t fit_seed = 1;
    double fit_beta = 2.0;
    std::string fit_reg = "poly";
    std::vector<int> fit_orders{1, 1};
    fitcmd->add_option("--model", fit_model.model, "True covariance model id");
    fitcmd->add_option("--phi1", fit_model.phi1, "Override AR(1) coefficient on axis 1");
    fitcmd->add_option("--phi2", fit_model.phi2, "Override AR(1) coefficient on axis 2");
    fitcmd->add_option("--n", fit_n, "Grid side N");
    fitcmd->add_option("--regressor", fit_reg, "Regressor kind");
    fitcmd->add_option("--seed", fit_seed, "RNG seed");
    fitcmd->add_option("--beta", fit_beta, "True coefficient");
    fitcmd->add_option("--orders", fit_orders, "Orders P1 P2")->expected(2);

    // ---- asymptotics ----
    auto* asy = app.add_subcommand("asymptotics",
                                   "Theorem limits and ratios (population-fitted g)");
    std::string asy_model = "ar1xar1", asy_reg = "poly+harmonic";
    std::vector<int> asy_orders{1, 1};
    asy->add_option("--model", asy_model, "True covariance model id");
    asy->add_option("--regressor", asy_reg, "Regressor kind");
    asy->add_option("--orders", asy_orders, "Approximation orders P1 P2")->expected(2);

    // ---- experiments ----
    std::string cfg_path;
    std::vector<std::string> overrides;
    auto* exp1 = app.add_subcommand("experiment1", "Scaled-variance convergence tables");
    auto* exp2 = app.add_subcommand("experiment2", "Efficiency-ratio tables");
    auto* timing = app.add_subcommand("timing", "Estimator wall-clock comparison");
    for (auto* sub : {exp1, exp2, timing}) {
        sub->add_option("--config", cfg_path, "JSON config file");
        sub->add_option("--set", overrides, "Config override key=value (repeatable)");
    }

    // ---- surface ----
    auto* surf = app.add_subcommand("surface", "Spectral density grid over [0,pi]^2");
    std::string surf_model = "ar1xar1";
    std::vector<int> surf_orders;
    std::string surf_params;
    int surf_res = 64;
    surf->add_option("--model", surf_model, "True model id (emits aliased f)");
    surf->add_option("--approx", surf_orders,
                     "Approximation orders P1 P2: emit fitted g instead of f")
        ->expected(2);
    surf->add_option("--params", surf_params,
                     "JSON file {phi1:[...], phi2:[...], sigma12: s} for g; "
                     "defaults to the population fit of --model");
    surf->add_option("--res", surf_res, "Grid resolution per axis");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    ensure_dir(out_dir);
    ExperimentConfig cfg = load_config(cfg_path, overrides);
    cfg.out_dir = out_dir;

    if (est->parsed()) {
        cfg.base_seed = est_seed;
        write_manifest(out_dir, "estimate", cfg);
        CovarianceModel model = est_model.build();
        LatticeDesign design = LatticeDesign::build(regressor_from_string(est_reg), est_n);
        Eigen::VectorXd y = design.X * Eigen::VectorXd::Constant(1, est_beta) +
                            sample_field(model, est_n, est_seed).eps;
        SeparableARModel fitted =
            fit_separable(residuals(design, y, lse(design, y)), est_n,
                          {est_orders[0], est_orders[1]});
        write_json_file(out_dir + "/estimate.json",
                        estimates_json(design, y, model, fitted, est_n, cfg.dense_cap));
    } else if (fitcmd->parsed()) {
        cfg.base_seed = fit_seed;
        write_manifest(out_dir, "fit", cfg);
        CovarianceModel model = fit_model.build();
        LatticeDesign design = LatticeDesign::build(regressor_from_string(fit_reg), fit_n);
        Eigen::VectorXd y = design.X * Eigen::VectorXd::Constant(1, fit_beta) +
                            sample_field(model, fit_n, fit_seed).eps;
        SeparableARModel m = fit_separable(residuals(design, y, lse(design, y)), fit_n,
                                           {fit_orders[0], fit_orders[1]});
        json doc{{"phi1", std::vector<double>(m.phi1.data(), m.phi1.data() + m.phi1.size())},
                 {"phi2", std::vector<double>(m.phi2.data(), m.phi2.data() + m.phi2.size())},
                 {"sigma12", m.sigma12}};
        write_json_file(out_dir + "/fit.json", doc);
    } else if (asy->parsed()) {
        write_manifest(out_dir, "asymptotics", cfg);
        CovarianceModel model = reference_model(model_id_from_string(asy_model));
        JumpMeasure jumps = jump_measure(regressor_from_string(asy_reg));
        FoldedSpectrum fold = FoldedSpectrum::adaptive(model);
        SpectralFn f = [&fold](double a, double b) { return fold(a, b); };
        SeparableARModel gm = fit_separable_population(model, {asy_orders[0], asy_orders[1]});
        SpectralFn g = [&gm](double a, double b) { return gm.g(a, b); };
        TheoreticalRatios ratios = theoretical_ratios(f, g, jumps, jumps.char_fn(0, 0));
        json doc{{"lse_ratio", ratios.lse_ratio},
                 {"pbe_ratio", ratios.pbe_ratio},
                 {"lse_efficiency_condition", lse_efficiency_condition(jumps)},
                 {"truncation", fold.truncation()}};
        for (const auto& res : evaluate_asymptotics(f, g, jumps, jumps.char_fn(0, 0))) {
            doc[res.estimator] = res.cov(0, 0);
            json atoms = json::array();
            for (std::size_t k = 0; k < jumps.atoms.size(); ++k) {
                json atom{{"lambda1", jumps.atoms[k].lambda1},
                          {"lambda2", jumps.atoms[k].lambda2},
                          {"f", res.f_at_atoms[k]}};
                if (!res.g_at_atoms.empty()) atom["g"] = res.g_at_atoms[k];
                atoms.push_back(std::move(atom));
            }
            doc[res.estimator + "_atoms"] = std::move(atoms);
        }
        write_json_file(out_dir + "/asymptotics.json", doc);
    } else if (exp1->parsed() || exp2->parsed()) {
        bool second = exp2->parsed();
        write_manifest(out_dir, second ? "experiment2" : "experiment1", cfg);
        ResultTable table = second ? run_experiment2(cfg) : run_experiment1(cfg);
        std::string stem = out_dir + (second ? "/experiment2" : "/experiment1");
        table.write_csv(stem + ".csv");
        table.write_json(stem + ".json");
    } else if (timing->parsed()) {
        write_manifest(out_dir, "timing", cfg);
        if (cfg_path.empty() && overrides.empty()) {
            cfg.models = {ModelId::Matern2};
            cfg.regressor = RegressorKind::PolyPlusHarmonic;
        }
        TimingReport report = run_timing(cfg);
        report.write_csv(out_dir + "/timing.csv");
        report.write_json(out_dir + "/timing.json");
    } else if (surf->parsed()) {
        write_manifest(out_dir, "surface", cfg);
        std::string path = out_dir + "/surface.csv";
        if (surf_orders.empty()) {
            CovarianceModel model = reference_model(model_id_from_string(surf_model));
            FoldedSpectrum fold = FoldedSpectrum::adaptive(model);
            emit_spectral_surface([&fold](double a, double b) { return fold(a, b); }, surf_res,
                                  path);
        } else {
            SeparableARModel gm;
            if (!surf_params.empty()) {
                std::ifstream in(surf_params);
                if (!in) throw io_error("cannot open params file: " + surf_params);
                json doc;
                try {
                    in >> doc;
                } catch (const json::exception& e) {
                    throw config_error(std::string("params parse error: ") + e.what());
                }
                std::vector<double> p1 = doc.at("phi1"), p2 = doc.at("phi2");
                gm.phi1 = Eigen::Map<Eigen::VectorXd>(p1.data(), p1.size());
                gm.phi2 = Eigen::Map<Eigen::VectorXd>(p2.data(), p2.size());
                gm.sigma12 = doc.at("sigma12");
                gm.validate();
            } else {
                CovarianceModel model = reference_model(model_id_from_string(surf_model));
                gm = fit_separable_population(model, {surf_orders[0], surf_orders[1]});
            }
            emit_spectral_surface([&gm](double a, double b) { return gm.g(a, b); }, surf_res,
                                  path);
        }
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    try {
        return dispatch(argc, argv);
    } catch (const config_error& e) {
        std::cerr << "error (config): " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "error (io): " << e.what() << "\n";
        return 4;
    } catch (const error& e) {
        std::cerr << "error (numeric): " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace latreg
