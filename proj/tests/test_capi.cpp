#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "greenpow/greenpow.h"

TEST_SUITE_BEGIN("capi");

TEST_CASE("create, override, run, and read metrics through the C surface") {
    gp_sim* sim = gp_sim_create(R"({"miners": 30, "k": 2, "block_budget": 200, "seed": 5,
                                    "timeout_enabled": false})");
    REQUIRE(sim != nullptr);
    CHECK(gp_sim_override(sim, "k", "3") == GP_OK);
    CHECK(gp_sim_override(sim, "bogus", "3") == GP_ERR_CONFIG);
    const char* cfg = gp_sim_config_json(sim);
    REQUIRE(cfg != nullptr);
    CHECK(std::string(cfg).find("\"k\": 3") != std::string::npos);

    gp_report* rep = gp_sim_run(sim);
    REQUIRE(rep != nullptr);
    int found = 0;
    CHECK(gp_report_metric(rep, "canonical_blocks", &found) == 200.0);
    CHECK(found == 1);
    CHECK(gp_report_metric(rep, "saving_pct", &found) > 0.0);
    gp_report_metric(rep, "not_a_metric", &found);
    CHECK(found == 0);
    CHECK(std::string(gp_last_error()).find("unknown metric") != std::string::npos);

    const char* summary = gp_report_summary_json(rep);
    REQUIRE(summary != nullptr);
    CHECK(std::string(summary).find("saving_pct") != std::string::npos);

    const auto dir = std::filesystem::temp_directory_path() / "gp_capi_artifacts";
    std::filesystem::remove_all(dir);
    CHECK(gp_report_write_artifacts(rep, dir.c_str()) == GP_OK);
    CHECK(std::filesystem::exists(dir / "summary.json"));
    CHECK(std::filesystem::exists(dir / "blocks.csv"));
    CHECK(std::filesystem::exists(dir / "manifest.json"));

    gp_report_destroy(rep);
    gp_sim_destroy(sim);
}

TEST_CASE("invalid configuration yields null with a message, not a crash") {
    gp_sim* sim = gp_sim_create(R"({"miners": 0})");
    CHECK(sim == nullptr);
    CHECK(std::string(gp_last_error()).find("miners") != std::string::npos);
    CHECK(gp_sim_create("{") == nullptr);
    CHECK(gp_sim_create_from_file("/no/such/file.json") == nullptr);
}

TEST_CASE("analysis helpers return owned strings") {
    const double ps[] = {0.7, 0.9};
    char* csv = gp_timeout_curve_csv(0.1, ps, 2);
    REQUIRE(csv != nullptr);
    CHECK(std::string(csv).find("12.03972") != std::string::npos);
    CHECK(std::string(csv).find("23.02585") != std::string::npos);
    gp_string_free(csv);

    int ok = 0;
    const double pr = gp_fork_probability("exponential", 2.0, 1.0 / 600.0, &ok);
    CHECK(ok == 1);
    CHECK(pr == doctest::Approx(2.0 / 600.0).epsilon(0.01));
    gp_fork_probability("parabolic", 2.0, 0.1, &ok);
    CHECK(ok == 0);

    CHECK(gp_censorship_pow_window(3, 1.0 / 600.0) == doctest::Approx(1800.0));

    const auto trace = std::filesystem::temp_directory_path() / "gp_capi_trace.csv";
    {
        std::ofstream out(trace);
        out << "height,miner_id\n0,a\n1,a\n2,b\n3,c\n";
    }
    char* shares = gp_share_redistribution_csv(trace.c_str(), 1, 0);
    REQUIRE(shares != nullptr);
    CHECK(std::string(shares).rfind("miner_id,", 0) == 0);
    gp_string_free(shares);
}

TEST_SUITE_END();
