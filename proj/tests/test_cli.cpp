#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("run emits the artifact set and a manifest that reproduces it byte for byte") {
    const fs::path base = fs::temp_directory_path() / "gp_cli_roundtrip";
    fs::remove_all(base);
    const fs::path first = base / "a", second = base / "b";
    REQUIRE(run_cli("run --algorithm green_pow --miners 25 --k 2 --blocks 120 --seed 42 "
                    "--set timeout_enabled=false --out " + first.string()) == 0);
    for (const char* name : {"manifest.json", "summary.json", "blocks.csv", "forks.csv",
                             "epochs.csv", "energy.csv", "retarget.csv"})
        CHECK(fs::exists(first / name));
    REQUIRE(run_cli("run --config " + (first / "manifest.json").string() + " --out " +
                    second.string()) == 0);
    for (const char* name : {"summary.json", "blocks.csv", "epochs.csv", "energy.csv"})
        CHECK(slurp(first / name) == slurp(second / name));
}

TEST_CASE("config errors exit 2, unknown analyses exit 2") {
    CHECK(run_cli("run --miners 1 --blocks 100") == 2);
    CHECK(run_cli("run --set nope=1") == 2);
    CHECK(run_cli("analyze") == 2);
    CHECK(run_cli("analyze --timeout-curve --shares x.csv") == 2);
    CHECK(run_cli("analyze --shares /no/such/trace.csv") == 2);
    CHECK(run_cli("definitely-not-a-subcommand") == 2);
}

TEST_CASE("sweep produces one row per cartesian point") {
    const fs::path out = fs::temp_directory_path() / "gp_cli_sweep";
    fs::remove_all(out);
    REQUIRE(run_cli("run --sweep k=1..3 --miners 20,30 --blocks 60 --seed 3 "
                    "--set timeout_enabled=false --out " + out.string()) == 0);
    const std::string table = slurp(out / "sweep.csv");
    int rows = -1;  // header
    for (char ch : table)
        if (ch == '\n') rows++;
    CHECK(rows == 6);
    CHECK(fs::exists(out / "point_n20_k1" / "summary.json"));
    CHECK(fs::exists(out / "point_n30_k3" / "summary.json"));
}

TEST_CASE("analyze subcommands emit CSV tables") {
    const fs::path out = fs::temp_directory_path() / "gp_cli_analyze.csv";
    fs::remove_all(out);
    REQUIRE(run_cli("analyze --timeout-curve --lambda 0.1 --p 0.7,0.9 --out " + out.string()) ==
            0);
    const std::string curve = slurp(out);
    CHECK(curve.rfind("p,wait,in_recommended_band", 0) == 0);
    CHECK(curve.find("12.03972") != std::string::npos);
    CHECK(curve.find("23.02585") != std::string::npos);

    const fs::path trace = fs::temp_directory_path() / "gp_cli_trace.csv";
    {
        std::ofstream t(trace);
        t << "height,miner_id\n";
        for (int i = 0; i < 40; ++i)
            t << i << ",m" << (i % 2 == 0 ? 0 : 1 + (i / 2) % 3) << "\n";
    }
    const fs::path shares = fs::temp_directory_path() / "gp_cli_shares.csv";
    REQUIRE(run_cli("analyze --shares " + trace.string() + " --seed 4 --out " +
                    shares.string()) == 0);
    const std::string table = slurp(shares);
    CHECK(table.rfind("miner_id,pow_share_pct,greenpow_share_pct", 0) == 0);
    double total = 0.0;
    std::istringstream rows(table);
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
        const auto a = line.find(','), b = line.rfind(',');
        total += std::stod(line.substr(b + 1));
        (void)a;
    }
    CHECK(total == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("partition scenario run records timeout epochs") {
    const fs::path out = fs::temp_directory_path() / "gp_cli_scenario";
    fs::remove_all(out);
    REQUIRE(run_cli("run --algorithm green_pow --miners 30 --k 2 --blocks 300 --seed 6 "
                    "--scenario partition_runnerups --timeout 6000s "
                    "--set scenario_period_epochs=30 --set scenario_duration_s=13000 "
                    "--out " + out.string()) == 0);
    const std::string epochs = slurp(out / "epochs.csv");
    CHECK(epochs.find(",1,") != std::string::npos);  // at least one timeout epoch flagged
}

TEST_SUITE_END();
