#include "hifu_cli/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::initializer_list<const char*> args) {
    std::vector<const char*> argv{"hifu"};
    argv.insert(argv.end(), args);
    std::ostringstream out, err;
    const int code = hifu::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("hifu_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

class GoldenHelp : public ::testing::TestWithParam<const char*> {};

TEST_P(GoldenHelp, MatchesFile) {
    const std::string sub = GetParam();
    const auto r = sub == "hifu" ? invoke({"--help"}) : invoke({sub.c_str(), "--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, slurp(fs::path(HIFU_GOLDEN_DIR) / (sub + "_help.txt")));
}

INSTANTIATE_TEST_SUITE_P(Cli, GoldenHelp, ::testing::Values("hifu", "run", "preset", "verify", "kernel", "mesh"));

TEST(Cli, RunPresetWritesOutputs) {
    const auto dir = scratch("run");
    const auto r = invoke({"-q", "run", "--preset", "example1", "--set", "mesh.h=0.004", "--set", "time.steps=100",
                           "--out", dir.c_str()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"config.toml", "final.vtk", "axis_final.csv", "probes.csv", "report.json", "mass.svg",
                          "pressure.svg"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_NE(slurp(dir / "config.toml").find("h = 0.004"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Cli, PairedRunGoesToSubdirectory) {
    const auto dir = scratch("paired");
    const auto r = invoke({"-q", "run", "--preset", "example3", "--set", "mesh.h=0.01", "--set", "time.steps=5",
                           "--out", dir.c_str()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "paired_no_ultrasound" / "probes.csv"));
    EXPECT_NE(slurp(dir / "report.json").find("\"comparison\""), std::string::npos);
    fs::remove_all(dir);
}

TEST(Cli, ConfigAndPresetAreExclusive) {
    EXPECT_EQ(invoke({"run", "--config", "x.toml", "--preset", "example1"}).code, hifu::cli::kUsage);
}

TEST(Cli, MissingConfigFileIsUsageError) {
    EXPECT_EQ(invoke({"run", "--config", "/nonexistent/x.toml"}).code, hifu::cli::kUsage);
}

TEST(Cli, BadOverrideIsUsageError) {
    EXPECT_EQ(invoke({"run", "--preset", "example1", "--set", "time.heat_dt=1"}).code, hifu::cli::kUsage);
    EXPECT_EQ(invoke({"run", "--preset", "example1", "--set", "nonsense"}).code, hifu::cli::kUsage);
}

TEST(Cli, UnwritableDirectoryIsRuntimeError) {
    const auto blocker = fs::temp_directory_path() / "hifu_cli_blocker";
    std::ofstream(blocker) << "x";
    const auto target = (blocker / "sub").string();
    const auto r = invoke({"-q", "run", "--preset", "example1", "--set", "mesh.h=0.01", "--set", "time.steps=2",
                           "--out", target.c_str()});
    EXPECT_EQ(r.code, hifu::cli::kRuntime);
    fs::remove(blocker);
}

TEST(Cli, PresetListAndDocument) {
    const auto list = invoke({"preset"});
    EXPECT_EQ(list.code, 0);
    EXPECT_EQ(list.out, "example1\nexample2\nexample3\n");
    const auto doc = invoke({"preset", "example3"});
    EXPECT_EQ(doc.code, 0);
    EXPECT_NE(doc.out.find("v0 = [0, 10]"), std::string::npos);
    EXPECT_EQ(invoke({"preset", "example9"}).code, hifu::cli::kUsage);
}

TEST(Cli, KernelWeights) {
    const auto r = invoke({"kernel", "--kind", "abel", "--alpha", "0.8", "--weights", "4"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("j,zeta\n0,0.5445622105291683", 0), 0u);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 7);
}

TEST(Kernel, MittagLeffler) {
    const auto r = invoke({"kernel", "--ml", "1", "1", "1"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("2.718281828459045"), std::string::npos);
}

TEST(Cli, KernelRejectsAlpha) {
    EXPECT_EQ(invoke({"kernel", "--kind", "abel", "--alpha", "1.5", "--weights", "3"}).code, hifu::cli::kUsage);
    EXPECT_EQ(invoke({"kernel", "--kind", "abel", "--alpha", "0.5"}).code, hifu::cli::kUsage);
}

TEST(Cli, VerifyKernels) {
    const auto r = invoke({"verify", "--suite", "kernels"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("4 of 4 checks passed"), std::string::npos);
}

TEST(Cli, VerifyDetectsPerturbedWeights) {
    const auto r = invoke({"verify", "--suite", "kernels", "--perturb-zeta0", "1e-6"});
    EXPECT_EQ(r.code, hifu::cli::kVerifyFailed);
    EXPECT_NE(r.out.find("3 of 4 checks passed"), std::string::npos);
    EXPECT_EQ(invoke({"verify", "--suite", "kernels"}).code, 0);
}

TEST(Cli, VerifyUnknownSuite) {
    EXPECT_EQ(invoke({"verify", "--suite", "everything"}).code, hifu::cli::kUsage);
}

TEST(Cli, MeshStatistics) {
    const auto dir = scratch("mesh");
    fs::create_directories(dir);
    const auto file = (dir / "m.mesh").string();
    const auto r = invoke({"mesh", "--size", "0.01", "--out", file.c_str()});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("triangles"), std::string::npos);
    const auto again = invoke({"mesh", "--input", file.c_str()});
    EXPECT_EQ(again.code, 0);
    EXPECT_EQ(again.out, r.out);
    fs::remove_all(dir);
}

TEST(Cli, NoSubcommandIsUsageError) {
    EXPECT_EQ(invoke({}).code, hifu::cli::kUsage);
    EXPECT_EQ(invoke({"launch"}).code, hifu::cli::kUsage);
}
