#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli_app.hpp"

using namespace overflow_lab;

namespace {

struct Outcome {
    int code;
    std::string out;
    Json json() const { return Json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
    auto p = std::filesystem::temp_directory_path() / ("overflow_lab_test_" + name);
    std::ofstream(p) << text;
    return p;
}

std::string run_binary(const std::string& args) {
    const char* bin = std::getenv("OVERFLOW_LAB_CLI");
    if (!bin) return {};
    std::string cmd = std::string(bin) + " " + args;
    FILE* f = popen(cmd.c_str(), "r");
    std::string text;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
    pclose(f);
    return text;
}

}  // namespace

TEST(Cli, BlowupChainExample) {
    Outcome o = run({"blowup-chain", "--n", "3", "--cc", "0"});
    ASSERT_EQ(o.code, 0) << o.out;
    Json j = o.json();
    EXPECT_EQ(j["v"], Json::array({"3", "2", "1"}));
    EXPECT_EQ(j["DD"], "3");
}

TEST(Cli, OverflowExample) {
    Outcome o = run({"overflow", "--map", "z^3+z", "--radius", "10", "--target", "C", "--method", "both"});
    ASSERT_EQ(o.code, 0) << o.out;
    Json j = o.json();
    EXPECT_NEAR(j["value"].get<double>(), 2.0 * std::log(10.0), 0.05 * 2.0 * std::log(10.0));
    ASSERT_TRUE(j.contains("residual"));
    EXPECT_LT(j["residual"].get<double>(), 1e-4);
    EXPECT_EQ(j["settings"]["depth"], 9);
}

TEST(Cli, MalformedSeriesLiteral) {
    Outcome o = run({"grelem", "--psi", R"(["0","2","1/x"])", "--e", "1"});
    EXPECT_EQ(o.code, 2);
    Json j = o.json();
    EXPECT_EQ(j["error"]["kind"], "ParseError");
    EXPECT_EQ(j["error"]["position"], 2);
}

TEST(Cli, UnknownConfigKeyRejected) {
    auto p = temp_file("unknown.json", R"({"command": "dimbound", "n": 3, "d": 1, "colour": "red"})");
    Outcome o = run({"run", "--config", p.string()});
    EXPECT_EQ(o.code, 2);
    EXPECT_EQ(o.json()["error"]["kind"], "ConfigError");
}

TEST(Cli, FlagsOverrideConfig) {
    auto p = temp_file("dim.json", R"({"n": 2, "d": 1})");
    Outcome base = run({"dimbound", "--config", p.string()});
    ASSERT_EQ(base.code, 0);
    EXPECT_EQ(base.json()["count"], 6);
    Outcome over = run({"dimbound", "--config", p.string(), "--n", "0"});
    EXPECT_EQ(over.json()["count"], 1);
}

TEST(Cli, ReportsEchoSettings) {
    Outcome o = run({"overflow", "--map", "z^2+z/3", "--grid", "64", "--tol", "1e-7"});
    ASSERT_EQ(o.code, 0) << o.out;
    Json j = o.json();
    EXPECT_EQ(j["settings"]["grid"], 64);
    EXPECT_EQ(j["settings"]["tol"], 1e-7);
    EXPECT_EQ(j["config"]["map"], "z^2+z/3");
}

TEST(Cli, DomainAndNumericalExitCodes) {
    Outcome pc = run({"dinv", "--psi", R"(["0","2","0"])", "--map", "z/2", "--radius", "1"});
    EXPECT_EQ(pc.code, 2);
    EXPECT_EQ(pc.json()["error"]["kind"], "NotPseudoconcave");
    Outcome ni = run({"selfint", "--psi", R"(["0","1/2","0"])", "--map", "z"});
    EXPECT_EQ(ni.code, 2);
    EXPECT_EQ(ni.json()["error"]["kind"], "NotIntegral");
    EXPECT_EQ(ni.json()["error"]["position"], 1);
    Outcome nc = run({"overflow", "--map", "z^3+z", "--radius", "10", "--grid", "4", "--depth", "1", "--tol", "1e-14"});
    EXPECT_EQ(nc.code, 3);
    EXPECT_EQ(nc.json()["error"]["kind"], "NoConvergence");
    EXPECT_EQ(run({"no-such-command"}).code, 2);
}

TEST(Cli, CsvColumns) {
    Outcome o = run({"overflow", "--map", "z^3+z", "--radii", "[2,4]", "--format", "csv"});
    ASSERT_EQ(o.code, 0) << o.out;
    EXPECT_EQ(o.out.rfind("x,value,method\n", 0), 0u);
    EXPECT_NE(o.out.find("\n2,"), std::string::npos);
    EXPECT_NE(o.out.find("\n4,"), std::string::npos);
}

TEST(Cli, RoundTripByteStable) {
    for (auto args : std::vector<std::vector<std::string>>{
             {"blowup-chain", "--n", "4", "--cc", "-1/2"},
             {"measure-mc", "--samples", "2000", "--seed", "5"},
             {"selfint", "--psi", R"(["0","1/3","0","0","0"])", "--map", "6z+9z^2"},
             {"grelem", "--psi", R"(["0","2","1","0","0","0"])"}}) {
        Outcome o = run(args);
        ASSERT_EQ(o.code, 0) << o.out;
        EXPECT_EQ(to_stable_json(Json::parse(o.out)), o.out) << args[0];
    }
}

TEST(Cli, ConfigRunMatchesFlags) {
    auto p = temp_file("mc.json", R"({"command": "measure-mc", "samples": 3000, "seed": 9, "shards": 3})");
    Outcome a = run({"run", "--config", p.string()});
    Outcome b = run({"measure-mc", "--samples", "3000", "--seed", "9", "--shards", "3"});
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.json()["hits"], b.json()["hits"]);
    EXPECT_EQ(a.json()["seed"], 9);
    EXPECT_EQ(a.json()["shards"], 3);
}

TEST(Cli, OutputFile) {
    auto p = std::filesystem::temp_directory_path() / "overflow_lab_test_out.json";
    std::filesystem::remove(p);
    Outcome o = run({"dimbound", "--n", "2", "--d", "1", "--output", p.string()});
    ASSERT_EQ(o.code, 0);
    EXPECT_TRUE(o.out.empty());
    std::ifstream f(p);
    EXPECT_EQ(Json::parse(f)["count"], 6);
}

TEST(Cli, EquilibriumFromLatticeFile) {
    auto p = temp_file("lat.json",
                       R"({"labels":["X~","E1"],"matrix":[["-1","1"],["1","-2"]],"c":["1","0"],"cc":"2"})");
    Outcome o = run({"equilibrium", "--lattice", p.string(), "--candidate", R"(["1","0"])"});
    ASSERT_EQ(o.code, 0) << o.out;
    Json j = o.json();
    EXPECT_EQ(j["v"], Json::array({"2", "1"}));
    EXPECT_EQ(j["denough"]["gap"], "1");
    auto bad = temp_file("lat_bad.json", R"({"matrix":[["-1"]],"c":["1"],"extra":1})");
    EXPECT_EQ(run({"equilibrium", "--lattice", bad.string()}).code, 2);
}

TEST(Cli, BinaryRunsAreByteIdentical) {
    if (!std::getenv("OVERFLOW_LAB_CLI")) GTEST_SKIP() << "binary path not provided";
    std::string a = run_binary("measure-mc --samples 5000 --seed 11 --shards 4");
    std::string b = run_binary("measure-mc --samples 5000 --seed 11 --shards 4");
    ASSERT_FALSE(a.empty());
    EXPECT_EQ(a, b);
    std::string c = run_binary("sample-diffeo --n 3 --count 3 --seed 11");
    EXPECT_EQ(c, run_binary("sample-diffeo --n 3 --count 3 --seed 11"));
}
