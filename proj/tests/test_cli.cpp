#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef PERPETUA_BIN
#error "PERPETUA_BIN must point at the CLI binary"
#endif

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(PERPETUA_BIN) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("exit codes are a stable contract") {
    // conclusive finite
    CHECK(run("analyze --family bessel --param delta=3 --f x^-3") == 0);
    // precondition failure: plain BM is not transient to the right
    CHECK(run("analyze --family bm --f 'exp(-x)'") == 3);
    // borderline u^-2: harmonic-rate divergence classifies Infinite (or, at
    // worst, Inconclusive): accept 0 or 2
    const int rc = run("analyze --family bessel --param delta=3 --f x^-2");
    CHECK((rc == 0 || rc == 2));
    // malformed inputs
    CHECK(run("analyze --family nosuch --f 1") == 64);
    CHECK(run("analyze --family bessel --param delta=3 --f 'x^'") == 64);
    CHECK(run("analyze --f 1") == 64);          // no model selected
    CHECK(run("bogus-subcommand") == 64);
    CHECK(run("analyze --family bessel --f x^-3") == 64);  // missing delta
}

TEST_CASE("classify command") {
    // BM on (0,1): both ends regular
    const char* model = "/tmp/perpetua_cli_bm01.json";
    {
        std::ofstream f(model);
        f << R"({"l": 0, "r": 1, "b": "0", "sigma": "1", "x0": 0.5})";
    }
    const std::string out = "/tmp/perpetua_cli_classify.json";
    CHECK(run("classify --model " + std::string(model) + " --end right --out " + out) ==
          0);
    auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["kind"] == "Regular");

    CHECK(run("classify --family bessel --param delta=3 --end right --out " + out) == 0);
    j = nlohmann::json::parse(slurp(out));
    CHECK(j["kind"] == "Natural");

    CHECK(run("classify --family bessel --param delta=3 --end left --out " + out) == 0);
    j = nlohmann::json::parse(slurp(out));
    CHECK(j["kind"] == "Entrance");
}

TEST_CASE("report schema and manifest reproducibility") {
    const std::string out1 = "/tmp/perpetua_cli_rep1.json";
    const std::string out2 = "/tmp/perpetua_cli_rep2.json";
    const std::string args =
        "analyze --family bm_drift --param mu=1 --f 'exp(-x)' --x 0 --out ";
    REQUIRE(run(args + out1) == 0);
    REQUIRE(run(args + out2) == 0);
    // byte-identical reports on re-run
    CHECK(slurp(out1) == slurp(out2));
    auto j = nlohmann::json::parse(slurp(out1));
    CHECK(j["report"]["verdict_Y"]["decision"] == "Finite");
    CHECK(j["report"]["verdict_Z"]["decision"] == "Finite");
    CHECK(j["report"]["agree"] == true);
    CHECK(j["report"]["mean"]["decision"] == "Finite");
    // manifest written next to the report, listing it as an output
    auto man = nlohmann::json::parse(slurp(out1 + ".manifest.json"));
    CHECK(man["outputs"][0] == out1);
    CHECK(man["version"] == "0.1.0");
    CHECK(man["config"].contains("theta_finite"));
}

TEST_CASE("transform and mean commands") {
    const std::string out = "/tmp/perpetua_cli_tr.json";
    CHECK(run("transform --family bessel --param delta=3 --f x^-4 --out " + out) == 0);
    auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["z_interval"][1].get<double>() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(j["g_table"].size() > 10);

    CHECK(run("mean --family bessel --param delta=3 --f x^-4 --x 1 --out " + out) == 0);
    j = nlohmann::json::parse(slurp(out));
    CHECK(j["mean"]["decision"] == "Infinite");
    CHECK(j["mean"]["right_tail"]["value"].get<double>() ==
          doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("validate command (small run) and input errors") {
    const std::string out = "/tmp/perpetua_cli_val.json";
    CHECK(run("validate --family bessel --param delta=3 --f x^-4 --y 2 "
              "--paths 500 --dt 2e-3 --seed 11 --plot --out " +
              out) == 0);
    auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["ks"]["pass"] == true);
    CHECK(slurp(out + ".svg").find("<svg") == 0);

    // mismatched target: negative y for a positive-interval model
    CHECK(run("validate --family bessel --param delta=3 --f x^-4 --y -2 --paths 200") ==
          64);
}

TEST_CASE("config file overrides") {
    const char* cfgfile = "/tmp/perpetua_cli_cfg.toml";
    {
        std::ofstream f(cfgfile);
        f << "# test config\ncap = 1e6\nwindow = 5\n";
    }
    const std::string out = "/tmp/perpetua_cli_cfgrep.json";
    CHECK(run(std::string("--config ") + cfgfile +
              " analyze --family bessel --param delta=3 --f x^-3 --out " + out) == 0);
    auto man = nlohmann::json::parse(slurp(out + ".manifest.json"));
    CHECK(man["config"]["cap"].get<double>() == 1e6);
    CHECK(man["config"]["window"].get<int>() == 5);

    {
        std::ofstream f(cfgfile);
        f << "nonsense_key = 1\n";
    }
    CHECK(run(std::string("--config ") + cfgfile +
              " analyze --family bessel --param delta=3 --f x^-3") == 64);
}
