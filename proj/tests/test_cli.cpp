#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

fs::path workdir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("layerheat_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = workdir() / name;
    std::ofstream(p) << text;
    return p;
}

std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string(LAYERHEAT_CLI) + " " + args + " > " + (workdir() / "stdout.txt").string() +
                            " 2> " + (workdir() / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string l; std::getline(ss, l);) out.push_back(l);
    return out;
}

const char* kEvalConfig = R"({
  "medium": {"dim": 2, "upper": [[1, 0.2], [0.2, 1]], "lower": [[2, 0.3], [0.3, 0.5]]},
  "seed": 3,
  "queries": {
    "source": {"y": [0.1, 0.3], "s": 0.0},
    "times": [0.5],
    "grid": {"lower": [-1, -1], "upper": [1, 1], "points": [5, 5]}
  }
})";

}  // namespace

TEST(Cli, EvalGrid) {
    const fs::path cfg = write("eval.json", kEvalConfig);
    const fs::path out = workdir() / "eval.csv";
    ASSERT_EQ(cli("eval --config " + cfg.string() + " --output " + out.string()), 0);
    const std::vector<std::string> rows = lines(read(out));
    ASSERT_EQ(rows.size(), 26u);
    EXPECT_EQ(rows[0], "x1,x2,t,y1,y2,s,gamma,grad1,grad2,est_error");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::stringstream ss(rows[i]);
        std::vector<double> v;
        for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
        ASSERT_EQ(v.size(), 10u);
        EXPECT_GT(v[6], 0.0);
    }
    EXPECT_FALSE(fs::exists(out.string() + ".tmp"));
}

TEST(Cli, EvalIsReproducible) {
    const fs::path cfg = write("eval.json", kEvalConfig);
    const fs::path a = workdir() / "a.csv", b = workdir() / "b.csv";
    ASSERT_EQ(cli("eval -c " + cfg.string() + " -o " + a.string()), 0);
    ASSERT_EQ(cli("eval -c " + cfg.string() + " -o " + b.string()), 0);
    EXPECT_EQ(read(a), read(b));
}

TEST(Cli, GreenParallelFaceIsUnsupported) {
    const fs::path cfg = write("green.json", R"({
      "medium": {"dim": 2, "upper": [1, 0, 0, 1], "lower": [2, 0, 0, 1]},
      "queries": {"source": {"y": [0, 0.2]}, "times": [0.3],
                  "grid": {"lower": [-0.5, -0.5], "upper": [0.5, 0.5], "points": [2, 2]}},
      "green": {"domain": "half_space", "axis": 1, "offset": 0.5}
    })");
    EXPECT_EQ(cli("green -c " + cfg.string() + " -o " + (workdir() / "g.csv").string()), 4);
}

TEST(Cli, GreenCubeBoundaryCheck) {
    const fs::path cfg = write("cube.json", R"({
      "medium": {"dim": 1, "upper": [2]},
      "queries": {"source": {"y": [0.3]}, "times": [0.1, 0.4],
                  "grid": {"lower": [-1], "upper": [1], "points": [11]}},
      "green": {"domain": "cube", "center": [0], "half_width": 1, "depth": 3, "aronson_constant": 12}
    })");
    ASSERT_EQ(cli("green -c " + cfg.string() + " -o " + (workdir() / "cube.csv").string()), 0);
    EXPECT_NE(read(workdir() / "stdout.txt").find("pass=true"), std::string::npos);
    EXPECT_EQ(lines(read(workdir() / "cube.csv")).size(), 23u);
}

TEST(Cli, VerifyMassIdentity) {
    const fs::path cfg = write("mass.json", R"({
      "medium": {"dim": 1, "upper": [1]},
      "verify": {"harness": "mass"}
    })");
    const fs::path out = workdir() / "mass_report.json";
    ASSERT_EQ(cli("verify -c " + cfg.string() + " -o " + out.string()), 0);
    const nlohmann::json r = nlohmann::json::parse(read(out));
    EXPECT_TRUE(r.at("passed").get<bool>());
}

TEST(Cli, VerifyTransmissionLayered) {
    const fs::path cfg = write("tr.json", R"({
      "medium": {"dim": 1, "upper": [1], "lower": [4]},
      "verify": {"harness": "transmission"}
    })");
    EXPECT_EQ(cli("verify -c " + cfg.string() + " -o " + (workdir() / "tr.out").string()), 0);
}

TEST(Cli, VerifyPerturbedKernelFails) {
    const fs::path cfg = write("ar.json", R"({
      "medium": {"dim": 1, "upper": [1]},
      "verify": {"harness": "aronson", "params": {"samples": 200}, "perturb": {"time_power": 1.0}}
    })");
    const fs::path out = workdir() / "ar.out";
    EXPECT_EQ(cli("verify -c " + cfg.string() + " -o " + out.string()), 5);
    const nlohmann::json r = nlohmann::json::parse(read(out));
    EXPECT_FALSE(r.at("passed").get<bool>());
}

TEST(Cli, CompareOracleIdentity) {
    const fs::path cfg = write("co.json", R"({
      "medium": {"dim": 1, "upper": [1]},
      "compare_oracle": {"source": [0.1], "levels": [201, 401, 801, 1601], "max_linf": 0.01}
    })");
    const fs::path out = workdir() / "co.out";
    ASSERT_EQ(cli("compare-oracle -c " + cfg.string() + " -o " + out.string()), 0);
    const nlohmann::json r = nlohmann::json::parse(read(out));
    EXPECT_LE(r["levels"].back()["linf_rel"].get<double>(), 0.01);
}

TEST(Cli, ConfigErrors) {
    const fs::path syntax = write("bad1.json", "{\n  \"medium\": {\"dim\": 1,,}\n}");
    EXPECT_EQ(cli("eval -c " + syntax.string()), 2);
    EXPECT_NE(read(workdir() / "stderr.txt").find("bad1.json:2"), std::string::npos);

    const fs::path shape = write("bad2.json", R"({"medium": {"dim": 2, "upper": [1, 0, 0]}})");
    EXPECT_EQ(cli("eval -c " + shape.string()), 2);
    EXPECT_NE(read(workdir() / "stderr.txt").find("medium.upper"), std::string::npos);

    const fs::path asym = write("bad3.json", R"({"medium": {"dim": 2, "upper": [1, 0.5, 0, 1]},
      "queries": {"source": {"y": [0, 0]}, "times": [1], "grid": {"lower": [0, 0], "upper": [1, 1], "points": [2, 2]}}})");
    EXPECT_EQ(cli("eval -c " + asym.string()), 2);

    EXPECT_EQ(cli("eval -c " + (workdir() / "missing.json").string()), 2);
    EXPECT_EQ(cli("eval"), 2);
}
