#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "json.hpp"
#include "wickshe/app/commands.hpp"
#include "wickshe/app/config.hpp"
#include "wickshe/app/report.hpp"

using namespace wickshe::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("wickshe_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(WICKSHE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig small_config(const fs::path& out) {
    RunConfig c = parse_config_text(
        "seed = 99\n"
        "mc.n_paths = 400\n"
        "mc.block_size = 64\n"
        "localtime.h_values = 0.1\n"
        "localtime.extra_t = 0.5\n"
        "probes.points = 0.5:0.2\n");
    c.output_dir = out.string();
    return c;
}

}  // namespace

TEST(Csv, FormatsSeventeenDigitsWithLfEndings) {
    CsvTable t({"a", "b"});
    t.row().add(0.1).add("x,y");
    t.row().add(1.0 / 3.0).add(static_cast<long long>(-4));
    EXPECT_EQ(t.str(), "a,b\n0.10000000000000001,\"x,y\"\n0.33333333333333331,-4\n");
}

TEST(Csv, RaggedRowsAreRejected) {
    CsvTable t({"a", "b"});
    t.row().add(1.0);
    EXPECT_THROW(t.row(), std::logic_error);
}

TEST(Sha256, KnownDigest) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Run, EquivalenceWritesHashedArtifactsAndPasses) {
    const auto dir = scratch("equivalence");
    RunConfig c = small_config(dir);
    const auto report = run_subcommand("equivalence", c, 1);
    EXPECT_TRUE(report.all_pass());
    ASSERT_FALSE(report.files.empty());
    for (const auto& f : report.files) {
        const std::string content = slurp(dir / f.name);
        EXPECT_FALSE(content.empty());
        EXPECT_EQ(sha256_hex(content), f.sha256);
        EXPECT_EQ(content.find('\r'), std::string::npos);
    }
    const auto json = nlohmann::json::parse(slurp(dir / "report.json"));
    EXPECT_EQ(json["subcommand"], "equivalence");
    EXPECT_EQ(json["config"]["seed"], "99");
    EXPECT_EQ(json["files"].size(), report.files.size());
    EXPECT_TRUE(json["all_pass"].get<bool>());
}

TEST(Run, SameSeedGivesIdenticalCsvsAcrossThreadCounts) {
    std::vector<std::vector<ArtifactFile>> runs;
    for (int threads : {1, 3}) {
        const auto dir = scratch("repro" + std::to_string(threads));
        runs.push_back(run_subcommand("localtime", small_config(dir), threads).files);
    }
    ASSERT_EQ(runs[0].size(), runs[1].size());
    for (std::size_t i = 0; i < runs[0].size(); ++i) EXPECT_EQ(runs[0][i].sha256, runs[1][i].sha256);
}

TEST(Run, DifferentSeedsGiveDifferentSamples) {
    auto c1 = small_config(scratch("seed1"));
    auto c2 = small_config(scratch("seed2"));
    c2.seed = 100;
    const auto a = run_subcommand("localtime", c1, 1);
    const auto b = run_subcommand("localtime", c2, 1);
    EXPECT_NE(a.files.front().sha256, b.files.front().sha256);
}

TEST(Run, ModuleErrorsCarryTheSubcommandName) {
    auto c = small_config(scratch("error"));
    c.probes = {{0.5, 100.0}};  // outside the propagator lattice
    c.truncation.max_order = 3;
    try {
        (void)run_subcommand("chaos", c, 1);
        FAIL() << "expected an error";
    } catch (const SubcommandError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("chaos: ", 0), 0u);
    }
    EXPECT_THROW((void)run_subcommand("nonsense", c, 1), std::invalid_argument);
}

TEST(Cli, ExitCodeContract) {
    const auto dir = scratch("exit");
    {
        std::ofstream(dir / "ok.ini") << "seed = 1\nprobes.points = 0.5:0\noutput_dir = " << (dir / "ok").string()
                                       << "\n";
        std::ofstream(dir / "bad.ini") << "quadratur.L = 3\n";
        // a Cauchy tolerance no finite truncation can meet
        std::ofstream(dir / "fail.ini") << "truncation.N = 1\nprobes.points = 1:0\nderivative.cauchy_tolerance = 1e-12\n"
                                        << "output_dir = " << (dir / "fail").string() << "\n";
    }
    EXPECT_EQ(run_cli("equivalence --config " + (dir / "ok.ini").string()), 0);
    EXPECT_EQ(run_cli("equivalence --config " + (dir / "bad.ini").string()), 2);
    EXPECT_EQ(run_cli("equivalence --config " + (dir / "missing.ini").string()), 2);
    EXPECT_EQ(run_cli("derivative --config " + (dir / "fail.ini").string()), 1);
    EXPECT_EQ(run_cli("bogus --config " + (dir / "ok.ini").string()), 2);
    EXPECT_TRUE(fs::exists(dir / "ok" / "report.json"));
}

TEST(Cli, ThreadEnvironmentVariableIsValidated) {
    const auto dir = scratch("env");
    std::ofstream(dir / "ok.ini") << "probes.points = 0.5:0\noutput_dir = " << (dir / "out").string() << "\n";
    EXPECT_EQ(run_cli("equivalence --config " + (dir / "ok.ini").string() + " --threads 2"), 0);
    const std::string cmd = "WICKSHE_THREADS=zero " + std::string(WICKSHE_CLI_PATH) + " equivalence --config " +
                            (dir / "ok.ini").string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    EXPECT_EQ(WEXITSTATUS(status), 2);
}
