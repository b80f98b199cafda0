#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "singular_sense/cli.hpp"
#include "singular_sense/errors.hpp"

using namespace singular_sense;

namespace {
struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(p);
    return p.string();
}
}  // namespace

TEST_CASE("classify prints the regime report") {
    auto r = run({"classify"});
    REQUIRE(r.code == kExitPass);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["singular"] == true);
    CHECK(j["ep"] == true);
    CHECK(j["at_lasing_threshold"] == true);
    CHECK(r.out.find("\"singular\":true") != std::string::npos);

    r = run({"--g", "2", "--gamma1", "1", "--gamma2", "4", "classify"});
    REQUIRE(r.code == kExitPass);
    j = nlohmann::json::parse(r.out);
    CHECK(j["stable"] == false);
    CHECK(j["singular"] == true);

    r = run({"--g", "1.4142135623730951", "--omega0", "1", "classify"});
    CHECK(nlohmann::json::parse(r.out)["det_m_zero"] == true);
}

TEST_CASE("config errors exit with code 2") {
    CHECK(run({"--kappa", "0", "classify"}).code == kExitConfig);
    CHECK(run({"--gamma1", "0.1", "classify"}).code == kExitConfig);
    CHECK(run({"--perturbation", "bogus", "expand"}).code == kExitConfig);
    CHECK(run({"--sign", "2", "sweep"}).code == kExitConfig);
    CHECK(run({"--samples", "10", "mc-check"}).code == kExitConfig);
    CHECK(run({"--config", "/no/such/file.json", "classify"}).code == kExitConfig);
    CHECK(run({"figure", "fig9", "--out", temp_dir("ss_cli_fig9")}).code == kExitConfig);
    CHECK(run({}).code == kExitConfig);

    RunConfig cfg;
    CHECK_THROWS_AS(apply_config_json(cfg, nlohmann::json{{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(apply_config_json(cfg, nlohmann::json{{"g", "x"}}), ConfigError);
}

TEST_CASE("config file with flag override") {
    const std::string dir = temp_dir("ss_cli_cfg");
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/cfg.json";
    std::ofstream(path) << R"({"g": 2.0, "gamma1": 1.0, "gamma2": 4.0})";
    auto r = run({"--config", path, "classify"});
    CHECK(nlohmann::json::parse(r.out)["stable"] == false);
    r = run({"--config", path, "--gamma2", "0.25", "--g", "1", "classify"});
    CHECK(nlohmann::json::parse(r.out)["stable"] == true);

    RunConfig cfg;
    cfg.params.g = 1.5;
    cfg.inputs.displacement = Vec4(1, 2, 3, 4);
    RunConfig back;
    apply_config_json(back, config_to_json(cfg));
    CHECK(back.params.g == 1.5);
    CHECK(back.inputs.displacement == cfg.inputs.displacement);
    std::filesystem::remove_all(dir);
}

TEST_CASE("steady state subcommand") {
    const auto r = run({"--gamma2", "0.25", "steady-state"});
    REQUIRE(r.code == kExitPass);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["status"] == "stable");
    CHECK(j["n1"].get<double>() == doctest::Approx(4.0 / 9.0));
}

TEST_CASE("expand subcommand") {
    auto r = run({"--perturbation", "two_mode_symmetric", "expand", "--check", "1e-3"});
    REQUIRE(r.code == kExitPass);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["pole_order"] == 2);
    CHECK(j["path"] == "sm");
    CHECK(j["check_residual"].get<double>() < 1e-6);
    const auto x1 = j["coeffs"][1].get<std::vector<std::vector<double>>>();
    CHECK(x1[0][0] == doctest::Approx(1.0));
    CHECK(x1[0][1] == doctest::Approx(0.0));

    r = run({"--perturbation", "one_mode", "expand"});
    CHECK(nlohmann::json::parse(r.out)["pole_order"] == 1);

    r = run({"--gamma2", "0.5", "expand", "--check", "0.01"});
    j = nlohmann::json::parse(r.out);
    CHECK(j["pole_order"] == 0);
    CHECK(j["path"] == "neumann");
    CHECK(j["check_residual"].get<double>() < 1e-10);
}

TEST_CASE("bounds subcommand") {
    const auto r = run({"--theta0", "0.01", "bounds"});
    REQUIRE(r.code == kExitPass);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["delta_c"].get<double>() >= j["delta_q"].get<double>());
}

TEST_CASE("sweep and figure write files") {
    const std::string dir = temp_dir("ss_cli_out");
    auto r = run({"--theta-points", "8", "--out", dir, "sweep"});
    REQUIRE(r.code == kExitPass);
    CHECK(std::filesystem::exists(dir + "/sweep.csv"));
    CHECK(std::filesystem::exists(dir + "/sweep_config.json"));

    r = run({"figure", "fig6", "--out", dir});
    CHECK(r.code == kExitPass);
    CHECK(std::filesystem::exists(dir + "/fig6_verdict.json"));
    CHECK(r.out.find("PASS") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("output directory from the environment") {
    const std::string dir = temp_dir("ss_cli_env");
    setenv("SINGULAR_SENSE_OUT", dir.c_str(), 1);
    CHECK(default_out_dir() == dir);
    const auto r = run({"--theta-points", "4", "sweep"});
    CHECK(r.code == kExitPass);
    CHECK(std::filesystem::exists(dir + "/sweep.csv"));
    unsetenv("SINGULAR_SENSE_OUT");
    CHECK(default_out_dir() == "singular_sense_out");
    std::filesystem::remove_all(dir);
}

TEST_CASE("io failures exit with code 3") {
    std::ofstream("/tmp/ss_cli_blocker") << "x";
    CHECK(run({"--out", "/tmp/ss_cli_blocker/sub", "--theta-points", "4", "sweep"}).code == kExitIo);
    CHECK(run({"figure", "fig6", "--out", "/tmp/ss_cli_blocker/sub"}).code == kExitIo);
    std::filesystem::remove("/tmp/ss_cli_blocker");
}

TEST_CASE("mc-check is deterministic") {
    const std::string dir = temp_dir("ss_cli_mc");
    auto r1 = run({"--samples", "20000", "--seed", "3", "--out", dir, "mc-check"});
    std::stringstream a;
    a << std::ifstream(dir + "/mc_check.json").rdbuf();
    auto r2 = run({"--samples", "20000", "--seed", "3", "--out", dir, "mc-check"});
    std::stringstream b;
    b << std::ifstream(dir + "/mc_check.json").rdbuf();
    CHECK(r1.out == r2.out);
    CHECK(a.str() == b.str());
    std::filesystem::remove_all(dir);
}
