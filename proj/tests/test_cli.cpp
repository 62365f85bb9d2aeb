#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "hetmimo/cli.hpp"

using namespace hetmimo;
namespace fs = std::filesystem;

namespace {

struct Invocation {
    int code = -1;
    std::string out, err;
};

Invocation cli(std::vector<std::string> args) {
    args.insert(args.begin(), "hetmimo");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    Invocation r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hetmimo_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST(Cli, RunWritesOutputs) {
    const fs::path dir = scratch("run") / "nested";
    const auto r = cli({"run", "--preset", "hetero-quarter", "--epochs", "2", "--seed", "7", "--out", dir.string(),
                        "--workers", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"samples.csv", "summary.csv", "run.json", "config.txt", "plot_cdf.py", "cdf_dl_maxmin.csv",
                          "cdf_dl_full-equal.csv", "cdf_ul_maxmin.csv", "cdf_ul_full-equal.csv"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto meta = nlohmann::json::parse(slurp(dir / "run.json"));
    EXPECT_EQ(meta["seed"], 7);
    EXPECT_EQ(meta["config"]["epochs"], "2");
    EXPECT_EQ(meta["version"], kVersion);
    std::istringstream s(slurp(dir / "samples.csv"));
    EXPECT_EQ(read_samples_csv(s).size(), 4u * 2 * 32);
}

TEST(Cli, ConfigReproducesRun) {
    const fs::path a = scratch("repro_a"), b = scratch("repro_b");
    ASSERT_EQ(cli({"run", "--preset", "cell-free-512", "--epochs", "1", "--link", "dl", "--out", a.string()}).code, 0);
    ASSERT_EQ(cli({"run", "--config", (a / "config.txt").string(), "--out", b.string()}).code, 0);
    EXPECT_EQ(slurp(a / "samples.csv"), slurp(b / "samples.csv"));
    EXPECT_FALSE(fs::exists(b / "cdf_ul_maxmin.csv"));
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(cli({"run", "--preset", "hetero-quarter", "--config", "x.txt"}).code, kExitUsage);
    EXPECT_EQ(cli({"run", "--epochs", "1"}).code, kExitUsage);
    EXPECT_EQ(cli({"run", "--preset", "nope"}).code, kExitUsage);
    EXPECT_EQ(cli({"run", "--preset", "hetero-quarter", "--link", "sideways"}).code, kExitUsage);
    EXPECT_EQ(cli({}).code, kExitUsage);
    EXPECT_EQ(cli({"compare", "only-one"}).code, kExitUsage);
}

TEST(Cli, InvalidConfigExitsWithReport) {
    const fs::path dir = scratch("invalid");
    fs::create_directories(dir);
    { std::ofstream(dir / "bad.txt") << "paradigm = hetero\npilot_length = 250\n"; }
    const auto r = cli({"run", "--config", (dir / "bad.txt").string(), "--out", (dir / "o").string()});
    EXPECT_EQ(r.code, kExitValidation);
    EXPECT_NE(r.err.find("τ_p < τ_c"), std::string::npos);
}

TEST(Cli, EnvOverride) {
    const fs::path dir = scratch("env");
    ::setenv("HETMIMO_FADING_DRAWS_PER_EPOCH", "3", 1);
    const auto r = cli({"run", "--preset", "hetero-half", "--epochs", "1", "--link", "ul", "--out", dir.string()});
    ::unsetenv("HETMIMO_FADING_DRAWS_PER_EPOCH");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "run.json"))["config"]["fading_draws_per_epoch"], "3");
}

TEST(Cli, Presets) {
    const auto r = cli({"presets"});
    EXPECT_EQ(r.code, 0);
    for (const auto& [name, p] : preset_names()) EXPECT_NE(r.out.find(name), std::string::npos);
}

TEST(Cli, CompareTable) {
    const fs::path q = scratch("cmp_q"), h = scratch("cmp_h"), c = scratch("cmp_c");
    ASSERT_EQ(cli({"run", "--preset", "hetero-quarter", "--epochs", "2", "--link", "dl", "--power", "full-equal", "--out", q.string()}).code, 0);
    ASSERT_EQ(cli({"run", "--preset", "hetero-half", "--epochs", "2", "--link", "dl", "--power", "full-equal", "--out", h.string()}).code, 0);
    ASSERT_EQ(cli({"run", "--preset", "cellular-512", "--epochs", "2", "--link", "dl", "--power", "full-equal", "--out", c.string()}).code, 0);
    const auto r = cli({"compare", q.string(), h.string(), c.string()});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("0.2500"), std::string::npos);
    EXPECT_NE(r.out.find("0.5000"), std::string::npos);
    EXPECT_NE(r.out.find("ordering DL full-equal"), std::string::npos);

    const auto same = cli({"compare", q.string(), q.string()});
    std::istringstream lines(same.out);
    std::string line;
    std::getline(lines, line);
    int rows = 0;
    while (std::getline(lines, line) && line.rfind("ordering", 0) != 0) {
        ++rows;
        EXPECT_NE(line.find("0.0000     0.0000"), std::string::npos) << line;
    }
    EXPECT_EQ(rows, 2);

    const auto missing = cli({"compare", q.string(), (q / "nope").string()});
    EXPECT_EQ(missing.code, kExitRuntime);
    EXPECT_NE(missing.out.find("error"), std::string::npos);
}

TEST(Cli, OrderingFlags) {
    EXPECT_EQ(ordering_line({{"a", 0.1}, {"b", 2.0}, {"c", 1.0}}), "b > c >> a");
    EXPECT_EQ(ordering_line({{"a", 1.0}, {"b", 1.0}}), "a = b");
}

TEST(Cli, ValidateIsDeterministic) {
    ValidationSuiteOptions o;
    o.oracle_instances = 3;
    o.grid_instances = 2;
    o.estimation_instances = 1;
    o.identity_instances = 50;
    std::ostringstream a, b;
    EXPECT_EQ(cmd_validate(o, a), kExitOk);
    cmd_validate(o, b);
    EXPECT_EQ(a.str(), b.str());
}
