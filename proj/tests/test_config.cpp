#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rrproc/config.hpp"
#include "suite_laws.hpp"

using namespace rrproc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("rrproc_test_" + std::to_string(
                                     std::chrono::steady_clock::now().time_since_epoch().count()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name, const std::string& contents) const {
        std::string p = (path / name).string();
        std::ofstream out(p, std::ios::binary);
        out << contents;
        return p;
    }
};

bool mentions(const ConfigError& e, const std::string& needle) {
    for (const std::string& p : e.problems())
        if (p.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("parse_config: a grid spec expands to 21 points") {
    TempDir dir;
    std::string law = dir.file("law.json", law_to_json_text(suite::rademacher()));
    std::string text = R"({"command":"eta","law":")" + law +
                       R"(","lambda_grid":{"from":-1.0,"to":1.0,"step":0.1}})";
    RunConfig config = parse_config(text);
    CHECK(config.command == Command::Eta);
    CHECK(config.lambda_grid.size() == 21);
    CHECK(config.lambda_grid.front() == -1.0);
    CHECK(config.lambda_grid[10] == 0.0);  // exact zero on the grid
}

TEST_CASE("parse_config: every violated field is reported by name") {
    TempDir dir;
    std::string law = dir.file("law.json", law_to_json_text(suite::rademacher()));

    try {
        parse_config(R"({"command":"mdp","law":")" + law +
                     R"(","schedule":[{"t":100,"x":1,"n_samples":10}]})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "seed"));
    }

    try {
        parse_config(R"({"command":"warp","law":")" + law + R"("})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "unknown command"));
    }

    try {
        parse_config(R"({"command":"eta","law":"/no/such/file.json","lambda_grid":[0.0]})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "file not found"));
    }

    std::string broken =
        dir.file("broken.json", R"({"kind":"discrete","atoms":[{"tau":"3//2","x":0,"p":1}]})");
    try {
        parse_config(R"({"command":"eta","law":")" + broken + R"(","lambda_grid":[0.0]})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "malformed rational"));
    }

    try {
        parse_config(R"({"command":"mdp","law":")" + law +
                     R"(","seed":1,"schedule":[{"t":100,"x":1,"n_samples":0}]})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "n_samples"));
    }
}

TEST_CASE("run: identity-check on the Rademacher fixture passes with zero gap") {
    TempDir dir;
    std::string law = dir.file("law.json", law_to_json_text(suite::rademacher()));
    RunConfig config = parse_config(
        R"({"command":"identity-check","law":")" + law +
        R"(","lambda_grid":{"from":-1.0,"to":1.0,"step":0.5},"t_max_steps":120,"threshold":1e-12})");
    RunResult result = run(config, (dir.path / "out").string());
    CHECK(result.exit_code == 0);

    auto summary = nlohmann::json::parse(slurp(result.summary_path));
    CHECK(summary.at("pass").get<bool>());
    CHECK(summary.at("results").at("max_relative_gap").get<double>() <= 1e-12);
    CHECK(summary.at("seed").get<uint64_t>() == 0);
    CHECK(summary.at("law").at("standardized").get<bool>());
    CHECK(summary.contains("config"));

    std::string csv = slurp((dir.path / "out" / "identity-check.csv").string());
    CHECK(csv.rfind("lambda,t,direct,tilted,normalized,limit\n", 0) == 0);
}

TEST_CASE("run: blackwell threshold verdict on uniform{1,2}") {
    TempDir dir;
    std::string law = dir.file("law.json", law_to_json_text(suite::uniform12_pm1()));
    RunConfig config = parse_config(
        R"({"command":"blackwell","law":")" + law +
        R"(","lambda_grid":[0.0],"n_max":200,"threshold":1e-8,"u_min_steps":40})");
    RunResult result = run(config, (dir.path / "out").string());
    CHECK(result.exit_code == 0);
    auto summary = nlohmann::json::parse(slurp(result.summary_path));
    CHECK(summary.at("results").at("max_gap_beyond_burnin").get<double>() <= 1e-8);
}

TEST_CASE("run: identical config and seed give byte-identical CSV") {
    TempDir dir;
    std::string law = dir.file("law.json", law_to_json_text(suite::uniform12_pm1_std()));
    std::string cfg = R"({"command":"mdp","law":")" + law + R"(","seed":77,"method":"both",
        "schedule":[{"t":400,"x":1.0,"n_samples":20000},{"t":2500,"x":1.5,"n_samples":20000}]})";
    RunConfig c1 = parse_config(cfg);
    RunConfig c2 = parse_config(cfg);
    c2.threads = 4;
    RunResult r1 = run(c1, (dir.path / "a").string());
    RunResult r2 = run(c2, (dir.path / "b").string());
    CHECK(r1.exit_code == 0);
    CHECK(r2.exit_code == 0);
    CHECK(slurp((dir.path / "a" / "mdp.csv").string()) ==
          slurp((dir.path / "b" / "mdp.csv").string()));

    std::string csv = slurp((dir.path / "a" / "mdp.csv").string());
    CHECK(csv.rfind("t,x,method,p_hat,std_err,rate,reference\n", 0) == 0);
}

TEST_CASE("run: module errors produce an error report and nonzero exit") {
    TempDir dir;
    // tilted mdp on a law whose drift cannot reach x/sqrt(t)
    std::string law = dir.file("law.json", law_to_json_text(suite::rademacher()));
    RunConfig config = parse_config(R"({"command":"mdp","law":")" + law +
                                    R"(","seed":1,"schedule":[{"t":4,"x":2.5,"n_samples":10}]})");
    RunResult result = run(config, (dir.path / "out").string());
    CHECK(result.exit_code == 2);
    CHECK(fs::exists(dir.path / "out" / "error.json"));
}

TEST_CASE("run: eta, renewal and dri commands emit their tables") {
    TempDir dir;
    std::string law = dir.file("law.json", law_to_json_text(suite::geometric_sym()));

    RunConfig eta = parse_config(R"({"command":"eta","law":")" + law +
                                 R"(","lambda_grid":{"from":-0.5,"to":0.5,"step":0.25}})");
    CHECK(run(eta, (dir.path / "eta").string()).exit_code == 0);
    std::string eta_csv = slurp((dir.path / "eta" / "eta.csv").string());
    CHECK(eta_csv.rfind("lambda,eta,ratio,drift\n", 0) == 0);

    RunConfig renewal = parse_config(R"({"command":"renewal","law":")" + law +
                                     R"(","seed":5,"n_max":120,"inequality_trials":10000})");
    RunResult rr = run(renewal, (dir.path / "renewal").string());
    CHECK(rr.exit_code == 0);
    auto summary = nlohmann::json::parse(slurp(rr.summary_path));
    CHECK(summary.at("results").at("inequality_ok").get<bool>());

    RunConfig dri = parse_config(R"({"command":"dri","law":")" + law +
                                 R"(","lambda_grid":[-0.5,0.0,0.5],"t_max":60.0})");
    CHECK(run(dri, (dir.path / "dri").string()).exit_code == 0);
}
