#include "../../tools/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using levygibbs::cli::run_cli;
using nlohmann::json;

namespace {

struct Captured
{
    int code = 0;
    std::string out, err;
};

Captured run(std::vector<std::string> args)
{
    args.insert(args.begin(), "levygibbs");
    std::ostringstream out, err;
    auto* o = std::cout.rdbuf(out.rdbuf());
    auto* e = std::cerr.rdbuf(err.rdbuf());
    auto* l = std::clog.rdbuf(err.rdbuf());
    Captured c;
    c.code = run_cli(args);
    std::cout.rdbuf(o);
    std::cerr.rdbuf(e);
    std::clog.rdbuf(l);
    c.out = out.str();
    c.err = err.str();
    return c;
}

std::string dir(const std::string& name)
{
    const auto d = fs::temp_directory_path() / "levygibbs-unit-cli" / name;
    fs::remove_all(d);
    return d.string();
}

json manifest(const std::string& d)
{
    std::ifstream in(fs::path(d) / "manifest.json");
    return json::parse(in);
}

std::string hash_of(const json& m, const std::string& file)
{
    for (const auto& o : m.at("outputs"))
        if (o.at("file") == file)
            return o.at("fnv1a");
    return {};
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("sample is reproducible and independent of the worker count")
    {
        const auto d1 = dir("s1"), d2 = dir("s2"), d3 = dir("s3");
        REQUIRE(run({"sample", "--n", "200", "--cutoff", "64", "--seed", "7", "--out", d1}).code == 0);
        REQUIRE(run({"sample", "--n", "200", "--cutoff", "64", "--seed", "7", "--out", d2, "--workers", "1"}).code == 0);
        const auto m1 = manifest(d1), m2 = manifest(d2);
        CHECK(m1.at("status") == "complete");
        CHECK(!hash_of(m1, "ensemble.lgen").empty());
        CHECK(hash_of(m1, "ensemble.lgen") == hash_of(m2, "ensemble.lgen"));
        CHECK(hash_of(m1, "observables.csv") == hash_of(m2, "observables.csv"));
        REQUIRE(run({"sample", "--n", "200", "--cutoff", "64", "--seed", "8", "--out", d3}).code == 0);
        CHECK(hash_of(m1, "ensemble.lgen") != hash_of(manifest(d3), "ensemble.lgen"));

        // conditioned: same draws whatever the worker count
        const auto c1 = dir("c1"), c4 = dir("c4");
        const std::vector<std::string> base{"sample", "--n", "40", "--cutoff", "32", "--a", "1", "--eps", "0.2"};
        auto a1 = base, a4 = base;
        a1.insert(a1.end(), {"--workers", "1", "--out", c1});
        a4.insert(a4.end(), {"--workers", "4", "--out", c4});
        REQUIRE(run(a1).code == 0);
        REQUIRE(run(a4).code == 0);
        CHECK(hash_of(manifest(c1), "ensemble.lgen") == hash_of(manifest(c4), "ensemble.lgen"));
    }

    TEST_CASE("the manifest replays through --config")
    {
        const auto d1 = dir("r1"), d2 = dir("r2");
        REQUIRE(run({"sample", "--n", "30", "--cutoff", "16", "--seed", "3", "--out", d1}).code == 0);
        const auto m = manifest(d1);
        const auto cfg = fs::path(dir("r-config")).replace_extension(".toml");
        fs::create_directories(cfg.parent_path());
        std::ofstream(cfg) << m.at("config").get<std::string>();
        REQUIRE(run({"--config", cfg.string(), "sample", "--out", d2}).code == 0);
        CHECK(hash_of(m, "ensemble.lgen") == hash_of(manifest(d2), "ensemble.lgen"));
    }

    TEST_CASE("configuration errors exit 2 and name the invariant")
    {
        auto c = run({"sample", "--n", "10", "--eps", "0.1", "--out", dir("e1")});
        CHECK(c.code == 2);
        CHECK(c.err.find("ConditioningSpec") != std::string::npos);
        CHECK(run({"sample", "--bogus", "--out", dir("e2")}).code == 2);
        CHECK(run({"sample", "--n", "5", "--a", "1", "--eps", "3", "--out", dir("e3")}).code == 2);
        CHECK(run({}).code == 2);
    }

    TEST_CASE("budget exhaustion exits 3")
    {
        const auto d = dir("b");
        const auto c = run({"sample", "--n", "50", "--cutoff", "8", "--a", "1", "--eps", "0.001", "--max-attempts",
                            "1000", "--out", d});
        CHECK(c.code == 3);
        // an interrupted run never claims to be complete
        CHECK(manifest(d).at("status") == "running");
        CHECK(run({"audit", d}).code == 6);
    }

    TEST_CASE("cutoff too small exits 4")
    {
        CHECK(run({"density", "--s-cutoff", "3", "--t-cutoff", "3", "--a-n", "32", "--b-n", "32", "--out", dir("d4")})
                  .code == 4);
    }

    TEST_CASE("dt above the stability bound exits 5 with the bound in the message")
    {
        const auto d = dir("i5");
        const auto c = run({"invariance", "--n", "10", "--cutoff", "64", "--a", "1", "--eps", "0.3", "--dt", "0.5",
                            "--out", d});
        CHECK(c.code == 5);
        CHECK(c.err.find("dt_max") != std::string::npos);
        CHECK(!fs::exists(fs::path(d) / "invariance.json"));
    }

    TEST_CASE("invariance at T = 0 prints zero statistics")
    {
        const auto c = run({"invariance", "--n", "100", "--cutoff", "16", "--a", "1", "--eps", "0.3", "--T", "0",
                            "--permutations", "100", "--out", dir("t0")});
        CHECK(c.code == 0);
        CHECK(c.out.find("PASS invariance") != std::string::npos);
        CHECK(c.out.find("FAIL") == std::string::npos);
        for (const std::string o : {"l4", "hs_quarter", "re_c1", "abs_c0_sq"})
            CHECK(c.out.find("PASS " + o + " ks 0 ") != std::string::npos);
    }

    TEST_CASE("evolve writes a trace and a flow trailer; audit checks hashes and orphans")
    {
        const auto d = dir("ev");
        const auto c = run({"evolve", "--n", "4", "--cutoff", "16", "--T", "0.01", "--dt", "1e-3", "--stride", "2",
                            "--out", d});
        REQUIRE(c.code == 0);
        CHECK(fs::exists(fs::path(d) / "trace.csv"));
        CHECK(fs::exists(fs::path(d) / "evolved.lgen"));
        CHECK(run({"audit", d}).code == 0);
        std::ofstream(fs::path(d) / "stray.txt") << "x";
        auto a = run({"audit", d});
        CHECK(a.code == 6);
        CHECK(a.out.find("orphan output stray.txt") != std::string::npos);
        fs::remove(fs::path(d) / "stray.txt");
        std::ofstream(fs::path(d) / "trace.csv", std::ios::app) << "tampered\n";
        a = run({"audit", d});
        CHECK(a.code == 6);
        CHECK(a.out.find("hash mismatch trace.csv") != std::string::npos);
        CHECK(run({"audit", dir("nothing-here")}).code == 6);
    }

    TEST_CASE("Brownian-loop momentum marginal")
    {
        const auto c = run({"density", "--bm-mode", "--tail-start", "1", "--marginal", "momentum", "--b-min", "-6",
                            "--b-max", "6", "--b-n", "241", "--out", dir("bm")});
        CHECK(c.code == 0);
        CHECK(c.out.find("fitted scale 3.14") != std::string::npos);
    }
}
