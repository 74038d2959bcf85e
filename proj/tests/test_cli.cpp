#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "latreg/cli.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

int run(std::vector<std::string> args) {
    std::vector<const char*> argv{"latreg"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return latreg::run_cli(static_cast<int>(argv.size()), argv.data());
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    json doc;
    in >> doc;
    return doc;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("help exits zero and lists every subcommand") {
    CHECK(run({"--help"}) == 0);
    // ctest runs from the build directory next to the binary
    if (fs::exists("latreg")) {
        REQUIRE(std::system("./latreg --help > cli_help.txt 2>&1") == 0);
        std::ifstream in("cli_help.txt");
        std::ostringstream os;
        os << in.rdbuf();
        std::string help = os.str();
        for (const char* sub : {"estimate", "fit", "asymptotics", "experiment1", "experiment2",
                                "timing", "surface"})
            CHECK(help.find(sub) != std::string::npos);
        fs::remove("cli_help.txt");
    }
}

TEST_CASE("estimate writes the three-estimator record and a manifest") {
    TempDir dir("latreg_cli_estimate");
    int rc = run({"--out", dir.path.string(), "estimate", "--model", "ar1xar1", "--phi1", "0.9",
                  "--phi2", "0.9", "--n", "20", "--regressor", "poly", "--seed", "7"});
    CHECK(rc == 0);
    json est = read_json(dir.path / "estimate.json");
    CHECK(est.contains("lse"));
    CHECK(est.contains("glse"));
    CHECK(est.contains("pbe"));
    // beta = 2 with modest noise: every estimator lands near the truth
    CHECK(std::abs(est["lse"].get<double>() - 2.0) < 0.5);
    CHECK(std::abs(est["pbe"].get<double>() - 2.0) < 0.5);
    json manifest = read_json(dir.path / "manifest.json");
    CHECK(manifest["command"] == "estimate");
    CHECK(manifest.contains("config_hash"));
    CHECK(manifest["seed"] == 7);
}

TEST_CASE("same invocation twice produces identical outputs") {
    TempDir a("latreg_cli_rep_a"), b("latreg_cli_rep_b");
    std::vector<std::string> args{"estimate", "--model", "ar1xar2", "--n",
                                  "12",       "--seed",  "13",      "--orders",
                                  "1",        "2"};
    std::vector<std::string> run_a{"--out", a.path.string()};
    run_a.insert(run_a.end(), args.begin(), args.end());
    std::vector<std::string> run_b{"--out", b.path.string()};
    run_b.insert(run_b.end(), args.begin(), args.end());
    CHECK(run(run_a) == 0);
    CHECK(run(run_b) == 0);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    CHECK(slurp(a.path / "estimate.json") == slurp(b.path / "estimate.json"));
    CHECK(slurp(a.path / "manifest.json") == slurp(b.path / "manifest.json"));
}

TEST_CASE("unknown config keys are rejected with exit code 2") {
    TempDir dir("latreg_cli_badcfg");
    fs::path cfg = dir.path / "cfg.json";
    std::ofstream(cfg) << R"({"replicates": 5, "banana": 1})";
    CHECK(run({"--out", dir.path.string(), "experiment1", "--config", cfg.string()}) == 2);
    std::ofstream(cfg) << R"({"replicates": )";  // malformed
    CHECK(run({"--out", dir.path.string(), "experiment1", "--config", cfg.string()}) == 2);
    CHECK(run({"--out", dir.path.string(), "experiment1", "--set", "nope=1"}) == 2);
}

TEST_CASE("experiment subcommand writes tables from a config file") {
    TempDir dir("latreg_cli_exp");
    fs::path cfg = dir.path / "cfg.json";
    std::ofstream(cfg) << R"({
        "models": ["ar1xar1"], "regressor": "poly+harmonic",
        "orders": [[1,1]], "n": [8], "replicates": 12,
        "fit_n": 10, "fit_replicates": 8, "seed": 99
    })";
    CHECK(run({"--out", dir.path.string(), "experiment2", "--config", cfg.string()}) == 0);
    CHECK(fs::exists(dir.path / "experiment2.csv"));
    CHECK(fs::exists(dir.path / "experiment2.json"));
    json doc = read_json(dir.path / "experiment2.json");
    CHECK(doc["rows"].size() > 0);
    bool has_glse = false;
    for (const auto& row : doc["rows"])
        if (row["estimator"] == "glse") has_glse = true;
    CHECK(has_glse);
}

TEST_CASE("config overrides change the run") {
    TempDir dir("latreg_cli_override");
    CHECK(run({"--out", dir.path.string(), "experiment1", "--set", "models=[\"ar1xar1\"]",
               "--set", "n=[8]", "--set", "replicates=6", "--set", "fit_n=10", "--set",
               "fit_replicates=5", "--set", "orders=[[1,1]]", "--set", "seed=3"}) == 0);
    json doc = read_json(dir.path / "experiment1.json");
    for (const auto& row : doc["rows"]) CHECK(row["N"] == 8);
}

TEST_CASE("surface subcommand emits a grid") {
    TempDir dir("latreg_cli_surface");
    CHECK(run({"--out", dir.path.string(), "surface", "--model", "ar1xar2", "--approx", "1",
               "2", "--res", "8"}) == 0);
    std::ifstream in(dir.path / "surface.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "lambda1,lambda2,density");
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 64);
}

TEST_CASE("asymptotics subcommand reports limits and ratios") {
    TempDir dir("latreg_cli_asym");
    CHECK(run({"--out", dir.path.string(), "asymptotics", "--model", "ar1xar1", "--regressor",
               "poly+harmonic", "--orders", "1", "1"}) == 0);
    json doc = read_json(dir.path / "asymptotics.json");
    CHECK(doc["lse_ratio"].get<double>() > 1000.0);  // strongly inefficient case
    CHECK(doc["pbe_ratio"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(doc["lse_efficiency_condition"] == false);
}

TEST_CASE("bad flag values yield exit code 2") {
    TempDir dir("latreg_cli_badflag");
    CHECK(run({"--out", dir.path.string(), "estimate", "--model", "bogus"}) == 2);
    CHECK(run({"--out", dir.path.string(), "nosuchcommand"}) == 2);
}
