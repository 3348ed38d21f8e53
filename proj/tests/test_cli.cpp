#include <doctest.h>

#include <json.hpp>
#include <sys/wait.h>

#include <Eigen/Dense>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pcreg/csv.hpp"
#include "pcreg/signal.hpp"
#include "schema_check.hpp"

using namespace pcreg;
using nlohmann::json;
using testutil::load_json_file;
using testutil::structural_check;
namespace fs = std::filesystem;

namespace {

const std::string kBin = PCREG_BIN_PATH;
const std::string kTmp = PCREG_TMP_DIR;
const std::string kSchemas = PCREG_SCHEMA_DIR;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CmdResult {
    int code = -1;
    std::string out;
    std::string err;
};

// Runs the binary through the shell; `env` is an optional VAR=value prefix.
CmdResult run_cli(const std::string& args, const std::string& tag,
                  const std::string& env = "") {
    const std::string out_file = kTmp + "/" + tag + ".stdout";
    const std::string err_file = kTmp + "/" + tag + ".stderr";
    const std::string cmd =
        (env.empty() ? "" : env + " ") + kBin + " " + args + " >" + out_file + " 2>" + err_file;
    const int rc = std::system(cmd.c_str());
    CmdResult r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

std::string fresh_dir(const std::string& name) {
    const std::string dir = kTmp + "/" + name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Identity design with the response appended as the last column.
std::string write_identity_data(const std::string& dir, const Eigen::VectorXd& y) {
    const int p = static_cast<int>(y.size());
    Eigen::MatrixXd m(p, p + 1);
    m.leftCols(p) = Eigen::MatrixXd::Identity(p, p);
    m.col(p) = y;
    const std::string path = dir + "/data.csv";
    write_matrix_csv(path, m);
    return path;
}

Eigen::VectorXd staircase(int p, const std::vector<int>& jumps_at, double step) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
    double level = 0.0;
    int next = 0;
    for (int i = 0; i < p; ++i) {
        if (next < static_cast<int>(jumps_at.size()) && i == jumps_at[next]) {
            level += step;
            ++next;
        }
        x[i] = level;
    }
    return x;
}

std::vector<int> json_int_vector(const json& arr) {
    std::vector<int> out;
    for (const auto& v : arr) out.push_back(v.get<int>());
    return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("running without a subcommand is a usage error") {
    CHECK(run_cli("", "nosub").code == 2);
    CHECK(run_cli("--help", "help").code == 0);
}

TEST_CASE("fit with a fixed lambda2 of zero reproduces the response") {
    const std::string dir = fresh_dir("fit_l2zero");
    Eigen::VectorXd y(8);
    y << 1, 1, 2, 2, 0, 0, 3, 3;
    const std::string data = write_identity_data(dir, y);
    const CmdResult r =
        run_cli("fit --design " + data + " --lambda2 0 --out " + dir, "fit_l2zero");
    CHECK(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["schema"] == "pcreg-fit");
    CHECK(doc["lambda2"] == 0.0);
    const CsvTable coef = read_csv(dir + "/coefficients.csv");
    REQUIRE(coef.data.rows() == 8);
    for (int i = 0; i < 8; ++i) CHECK(coef.data(i, 0) == doctest::Approx(y[i]).epsilon(1e-4));
    structural_check(doc, load_json_file(kSchemas + "/fit.schema.json"));
}

TEST_CASE("fit with a zero tv budget returns the best constant") {
    const std::string dir = fresh_dir("fit_v0");
    Eigen::VectorXd y(6);
    y << 4, 4, 1, 1, 1, 1;
    const std::string data = write_identity_data(dir, y);
    const CmdResult r =
        run_cli("fit --design " + data + " --constrained-V 0 --out " + dir, "fit_v0");
    CHECK(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["constrained_v"] == 0.0);
    const CsvTable coef = read_csv(dir + "/coefficients.csv");
    for (int i = 0; i < 6; ++i) CHECK(coef.data(i, 0) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("fit under cross validation reports the grid and curve") {
    const std::string dir = fresh_dir("fit_cv");
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) y[i] = (i < 15 ? 0.0 : 3.0) + 0.01 * ((i * 37) % 11 - 5);
    const std::string data = write_identity_data(dir, y);
    const CmdResult r =
        run_cli("fit --design " + data + " --cv 12 --folds 4 --seed 3 --out " + dir, "fit_cv");
    CHECK(r.code == 0);
    const json doc = json::parse(r.out);
    REQUIRE(doc.contains("cv"));
    CHECK(doc["cv"]["folds"] == 4);
    REQUIRE(doc["cv"]["grid"].size() == 12);
    REQUIRE(doc["cv"]["curve"].size() == 12);
    CHECK(doc["cv"]["lambda2"].get<double>() > 0.0);
    CHECK(doc["lambda2"] == doc["cv"]["lambda2"]);
    structural_check(doc, load_json_file(kSchemas + "/fit.schema.json"));
}

TEST_CASE("fit rejects conflicting penalty selections") {
    const std::string dir = fresh_dir("fit_conflict");
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    const std::string data = write_identity_data(dir, y);
    CHECK(run_cli("fit --design " + data + " --lambda2 1 --constrained-V 2 --out " + dir,
                  "fit_conflict_a")
              .code == 2);
    CHECK(run_cli("fit --design " + data + " --out " + dir, "fit_conflict_b").code == 2);
    CHECK(run_cli("fit --design " + data + " --lambda1 0.5 --out " + dir, "fit_conflict_c")
              .code == 2);
}

TEST_CASE("detect recovers the jumps of an exact staircase") {
    const std::string dir = fresh_dir("detect_stairs");
    const std::vector<int> jumps = {50, 130};
    const Eigen::VectorXd x = staircase(200, jumps, 2.0);
    const std::string path = dir + "/coef.csv";
    write_vector_csv(path, x, "coefficient");
    const CmdResult r =
        run_cli("detect --coefficients " + path + " --seed 4 --out " + dir, "detect_stairs");
    CHECK(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["schema"] == "pcreg-report");
    CHECK(doc["tau_rule"] == "permutation-pooled");
    CHECK(json_int_vector(doc["raw"]) == jumps);
    CHECK(json_int_vector(doc["filtered"]) == jumps);
    CHECK(json_int_vector(doc["pruned"]) == jumps);
    structural_check(doc, load_json_file(kSchemas + "/report.schema.json"));

    const CmdResult fixed = run_cli(
        "detect --coefficients " + path + " --tau 1e9 --out " + dir, "detect_hightau");
    CHECK(fixed.code == 0);
    const json doc2 = json::parse(fixed.out);
    CHECK(doc2["tau_rule"] == "fixed");
    CHECK(json_int_vector(doc2["raw"]) == jumps);
    CHECK(doc2["filtered"].empty());
    CHECK(doc2["pruned"].empty());
}

TEST_CASE("detect needs exactly one input source") {
    const std::string dir = fresh_dir("detect_sources");
    CHECK(run_cli("detect --out " + dir, "detect_none").code == 2);
    Eigen::VectorXd y(4);
    y << 0, 0, 1, 1;
    const std::string data = write_identity_data(dir, y);
    const std::string coef = dir + "/coef.csv";
    write_vector_csv(coef, y, "coefficient");
    CHECK(run_cli("detect --coefficients " + coef + " --design " + data + " --lambda2 1 --out " +
                      dir,
                  "detect_both")
              .code == 2);
}

TEST_CASE("simulate writes byte-identical artifacts for a repeated seed") {
    const std::string d1 = fresh_dir("sim_a");
    const std::string d2 = fresh_dir("sim_b");
    const std::string args = "simulate --preset identity-nine-equal --reps 5 --seed 7 --out ";
    const CmdResult r1 = run_cli(args + d1, "sim_a");
    const CmdResult r2 = run_cli(args + d2, "sim_b");
    CHECK(r1.code == 0);
    CHECK(r2.code == 0);
    const std::string rec1 = slurp(d1 + "/replications.csv");
    CHECK(!rec1.empty());
    CHECK(rec1 == slurp(d2 + "/replications.csv"));
    const std::string agg1 = slurp(d1 + "/aggregate.json");
    CHECK(agg1 == slurp(d2 + "/aggregate.json"));
    CHECK(r1.out == r2.out);
    const json doc = json::parse(agg1);
    CHECK(doc["scenario"]["layout"] == "nine-equal");
    CHECK(doc["scenario"]["replications"] == 5);
    structural_check(doc, load_json_file(kSchemas + "/aggregate.schema.json"));
    const std::string svg = slurp(d1 + "/metrics.svg");
    CHECK(svg.find("pcreg-metrics-svg v1") != std::string::npos);
    CHECK(svg.find("<svg") != std::string::npos);
}

TEST_CASE("simulate needs two replications to aggregate") {
    const std::string dir = fresh_dir("sim_one");
    const CmdResult r = run_cli(
        "simulate --family identity --layout one-cp --p 100 --reps 1 --seed 2 --out " + dir,
        "sim_one");
    CHECK(r.code == 2);
    CHECK(fs::exists(dir + "/replications.csv"));
}

TEST_CASE("simulate lists the presets when given an unknown name") {
    const std::string dir = fresh_dir("sim_unknown");
    const CmdResult r = run_cli("simulate --preset no-such-thing --out " + dir, "sim_unknown");
    CHECK(r.code == 2);
    CHECK(r.err.find("identity-one-cp") != std::string::npos);
    CHECK(r.err.find("gaussian-bandcov-nine-unequal") != std::string::npos);
}

TEST_CASE("a seed from the environment matches the explicit flag") {
    const std::string d1 = fresh_dir("sim_envseed");
    const std::string d2 = fresh_dir("sim_flagseed");
    const std::string base = "simulate --family identity --layout one-cp --p 100 --reps 2 --out ";
    const CmdResult env = run_cli(base + d1, "sim_envseed", "PCREG_SEED=42");
    const CmdResult flag = run_cli(base + d2 + " --seed 42", "sim_flagseed");
    CHECK(env.code == 0);
    CHECK(flag.code == 0);
    CHECK(slurp(d1 + "/aggregate.json") == slurp(d2 + "/aggregate.json"));
}

TEST_CASE("ric on an identity design pins both envelope ends at one") {
    const std::string dir = fresh_dir("ric_identity");
    const CmdResult r = run_cli(
        "ric --family identity --p 20 --t 1 --samples 50 --zeta 0 --seed 6 --out " + dir,
        "ric_identity");
    CHECK(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["schema"] == "pcreg-certificate");
    CHECK(doc["min_norm"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(doc["max_norm"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(doc["interval_ok"] == true);
    structural_check(doc, load_json_file(kSchemas + "/certificate.schema.json"));
}

TEST_CASE("ric with a zero budget reports constant witnesses") {
    const std::string dir = fresh_dir("ric_t0");
    const CmdResult r = run_cli(
        "ric --family gaussian --n 40 --p 16 --row-scaled --t 0 --samples 30 --seed 8 --out " +
            dir,
        "ric_t0");
    CHECK(r.code == 0);
    const json doc = json::parse(r.out);
    const double c = 1.0 / 4.0;  // 1/sqrt(16)
    for (const char* key : {"min_witness", "max_witness"}) {
        REQUIRE(doc[key].size() == 16);
        for (const auto& v : doc[key])
            CHECK(std::abs(v.get<double>()) == doctest::Approx(c).epsilon(1e-9));
    }
}

TEST_CASE("config values apply when flags are absent and lose when present") {
    const std::string dir = fresh_dir("config_prec");
    Eigen::VectorXd y(8);
    y << 0, 0, 0, 0, 5, 5, 5, 5;
    const std::string data = write_identity_data(dir, y);
    const std::string cfg = dir + "/cfg.json";
    {
        std::ofstream out(cfg);
        out << "{\"fit\": {\"lambda2\": 5.0}}\n";
    }
    const CmdResult from_config =
        run_cli("fit --config " + cfg + " --design " + data + " --out " + dir, "config_used");
    CHECK(from_config.code == 0);
    CHECK(json::parse(from_config.out)["lambda2"] == 5.0);

    const CmdResult flag_wins = run_cli(
        "fit --config " + cfg + " --design " + data + " --lambda2 0 --out " + dir, "flag_wins");
    CHECK(flag_wins.code == 0);
    CHECK(json::parse(flag_wins.out)["lambda2"] == 0.0);
}

TEST_CASE("unknown config keys are rejected") {
    const std::string dir = fresh_dir("config_bad");
    Eigen::VectorXd y(4);
    y << 1, 1, 2, 2;
    const std::string data = write_identity_data(dir, y);
    const std::string cfg = dir + "/cfg.json";
    {
        std::ofstream out(cfg);
        out << "{\"fit\": {\"lambda_two\": 1.0}}\n";
    }
    const CmdResult r = run_cli(
        "fit --config " + cfg + " --design " + data + " --lambda2 1 --out " + dir, "config_bad");
    CHECK(r.code == 2);
    CHECK(r.err.find("lambda_two") != std::string::npos);
}

}  // TEST_SUITE
