#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "latreg/experiments.hpp"

using namespace latreg;

namespace {

ExperimentConfig smoke_config() {
    ExperimentConfig cfg;
    cfg.models = {ModelId::Ar1xAr1};
    cfg.regressor = RegressorKind::PolyPlusHarmonic;
    cfg.orders = {{1, 1}};
    cfg.n_values = {10};
    cfg.replicates = 40;
    cfg.fit_n = 12;
    cfg.fit_replicates = 20;
    cfg.base_seed = 4242;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("degenerate two-replicate config still runs") {
    ExperimentConfig cfg = smoke_config();
    cfg.replicates = 2;
    cfg.fit_replicates = 2;
    ResultTable t = run_experiment1(cfg);
    const ResultRow& row = t.find("ar1xar1", "ar1xar1", 10, "pbe");
    CHECK(row.replicates == 2);
    CHECK(row.mc_se > row.scaled_emp_var);  // wide error bars, as expected
}

TEST_CASE("identical config and seed give identical tables") {
    ExperimentConfig cfg = smoke_config();
    ResultTable a = run_experiment2(cfg);
    ResultTable b = run_experiment2(cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].scaled_emp_var == b.rows[i].scaled_emp_var);
        CHECK(a.rows[i].ratio_to_glse == b.rows[i].ratio_to_glse);
        CHECK(a.rows[i].seed_lo == b.rows[i].seed_lo);
    }
    CHECK(a.config_hash == b.config_hash);

    ExperimentConfig other = cfg;
    other.base_seed += 1;
    ResultTable c = run_experiment2(other);
    CHECK(c.rows[0].scaled_emp_var != a.rows[0].scaled_emp_var);
}

TEST_CASE("identical estimator inputs pin the pbe/glse variance ratio to 1") {
    // hand the PBE the exact separable truth instead of a fitted model:
    // the two estimators coincide replicate by replicate
    const int N = 12, R = 40;
    CovarianceModel m = reference_model(ModelId::Ar1xAr1);
    LatticeDesign d = LatticeDesign::build(RegressorKind::PolyPlusHarmonic, N);
    SeparableARModel truth;
    truth.phi1 = Eigen::VectorXd::Constant(1, 0.9);
    truth.phi2 = Eigen::VectorXd::Constant(1, 0.9);
    truth.sigma12 = 0.19 * 0.19;
    FieldSampler sampler(m, N);
    GlseSolver gsolve(d, assemble_sigma(m, N));
    PbeSolver psolve(d, truth);
    Eigen::MatrixXd eps = sampler.sample_block(321, R);
    Eigen::VectorXd beta = Eigen::VectorXd::Constant(1, 2.0);
    double vg = 0.0, vp = 0.0, mg = 0.0, mp = 0.0;
    std::vector<double> bg(R), bp(R);
    for (int r = 0; r < R; ++r) {
        Eigen::VectorXd y = d.X * beta + eps.col(r);
        bg[r] = gsolve.solve(y)(0);
        bp[r] = psolve.solve(y)(0);
        CHECK(bp[r] == doctest::Approx(bg[r]).epsilon(1e-8));
        mg += bg[r];
        mp += bp[r];
    }
    mg /= R;
    mp /= R;
    for (int r = 0; r < R; ++r) {
        vg += (bg[r] - mg) * (bg[r] - mg);
        vp += (bp[r] - mp) * (bp[r] - mp);
    }
    CHECK(vp / vg == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("protocol smoke: fitted pbe tracks the glse, lse never beats it") {
    ExperimentConfig cfg = smoke_config();
    cfg.replicates = 60;
    cfg.fit_replicates = 200;
    cfg.fit_n = 24;
    ResultTable t = run_experiment2(cfg);
    const ResultRow& row = t.find("ar1xar1", "ar1xar1", 10, "pbe");
    // small fit grids leave visible moment-fit bias; the ratio stays modest
    CHECK(row.ratio_to_glse >= 1.0 - 1e-9);
    CHECK(row.ratio_to_glse < 1.5);
    CHECK(row.theoretical_ratio >= 1.0 - 1e-9);
    CHECK(row.theoretical_ratio < 1.2);
    const ResultRow& lrow = t.find("ar1xar1", "-", 10, "lse");
    CHECK(lrow.ratio_to_glse >= 1.0 - 1e-9);
}

TEST_CASE("exclusions are counted, not silently dropped") {
    std::vector<FittedApprox> fits = average_parameter_fits(
        reference_model(ModelId::Ar1xAr1), RegressorKind::Polynomial, {{1, 1}}, 12, 30, 99, 2.0,
        1);
    REQUIRE(fits.size() == 1);
    CHECK(fits[0].used + fits[0].excluded == 30);
    CHECK(fits[0].used > 0);
}

TEST_CASE("fixed-g protocol reuses the fit across sizes") {
    ExperimentConfig cfg = smoke_config();
    cfg.n_values = {8, 10};
    ResultTable t = run_experiment1(cfg);
    // same family rows at both sizes, against the same asymptotic value
    const ResultRow& a = t.find("ar1xar1", "ar1xar1", 8, "pbe");
    const ResultRow& b = t.find("ar1xar1", "ar1xar1", 10, "pbe");
    CHECK(a.asym_var == b.asym_var);
    CHECK(a.seed_lo != b.seed_lo);  // fresh replicates per size
}

TEST_CASE("csv and json outputs round the same rows") {
    ExperimentConfig cfg = smoke_config();
    ResultTable t = run_experiment1(cfg);
    std::string csv_path = "test_table.csv", json_path = "test_table.json";
    t.write_csv(csv_path);
    t.write_json(json_path);
    std::string csv = slurp(csv_path);
    CHECK(csv.find("model,regressor,approximation,N,estimator") == 0);
    CHECK(csv.find("ar1xar1") != std::string::npos);
    std::string js = slurp(json_path);
    CHECK(js.find("\"config_hash\"") != std::string::npos);
    std::remove(csv_path.c_str());
    std::remove(json_path.c_str());
}

TEST_CASE("spectral surface emission") {
    SeparableARModel gm;
    gm.phi1 = Eigen::VectorXd::Constant(1, 0.0);
    gm.phi2 = Eigen::VectorXd::Constant(1, 0.0);
    gm.sigma12 = 1.0;
    std::string path = "test_surface.csv";
    emit_spectral_surface([&](double a, double b) { return gm.g(a, b); }, 5, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "lambda1,lambda2,density");
    int lines = 0;
    double first = -1.0;
    std::string line;
    while (std::getline(in, line)) {
        if (lines == 0) first = std::stod(line.substr(line.rfind(',') + 1));
        ++lines;
    }
    CHECK(lines == 25);
    // white noise surface is constant 1/(2pi)^2
    CHECK(first == doctest::Approx(1.0 / (4.0 * 9.869604401089358)).epsilon(1e-4));
    std::remove(path.c_str());

    CHECK_THROWS_AS(emit_spectral_surface([](double, double) { return 1.0; }, 1, path),
                    parameter_error);
}

TEST_CASE("surface values match pointwise evaluator calls") {
    auto [xi1, xi2] = reference_ar2_roots();
    auto [a, b] = ar_coeffs_from_roots(xi1, xi2);
    SeparableARModel gm;
    gm.phi1 = Eigen::VectorXd::Constant(1, 0.5);
    gm.phi2 = (Eigen::VectorXd(2) << a, b).finished();
    gm.sigma12 = 0.9;
    std::string path = "test_surface2.csv";
    emit_spectral_surface([&](double u, double v) { return gm.g(u, v); }, 9, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    bool interior_ridge = false;
    double first_col_max = -1.0, edge_max = -1.0;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string l1s, l2s, ds;
        std::getline(ss, l1s, ',');
        std::getline(ss, l2s, ',');
        std::getline(ss, ds, ',');
        double l1 = std::stod(l1s), l2 = std::stod(l2s), dv = std::stod(ds);
        CHECK(dv == doctest::Approx(gm.g(l1, l2)).epsilon(1e-4));
        if (l1 == 0.0) {
            if (l2s != "0" && std::abs(l2 - 3.14159) > 0.01)
                first_col_max = std::max(first_col_max, dv);
            else
                edge_max = std::max(edge_max, dv);
        }
    }
    interior_ridge = first_col_max > edge_max;
    CHECK(interior_ridge);  // the AR(2) axis puts its peak strictly inside (0, pi)
    std::remove(path.c_str());
}

TEST_CASE("timing report smoke run") {
    ExperimentConfig cfg;
    cfg.models = {ModelId::Ar1xAr1};  // separable truth keeps the smoke test fast
    cfg.regressor = RegressorKind::PolyPlusHarmonic;
    cfg.orders = {{1, 1}};
    cfg.timing_runs = 1;
    cfg.timing_n = 24;
    cfg.timing_scaling_n = 12;
    cfg.base_seed = 7;
    TimingReport rep = run_timing(cfg);
    CHECK(rep.get(24, "lse") > 0.0);
    CHECK(rep.get(24, "glse") > 0.0);
    CHECK(rep.get(24, "fit", "ar1xar1") > 0.0);
    CHECK(rep.get(24, "pbe_solve", "ar1xar1") > 0.0);
    CHECK(rep.get(12, "pbe_solve", "ar1xar1") > 0.0);
    std::string path = "test_timing.csv";
    rep.write_csv(path);
    std::string csv = slurp(path);
    CHECK(csv.find("N,item,approximation,seconds,runs") == 0);
    std::remove(path.c_str());
}
