#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "artifacts.hpp"
#include "config.hpp"
#include "mfgabs/error.hpp"
#include "runner.hpp"

using namespace mfgabs;
using namespace mfgabs::app;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string config_error(const json& doc)
{
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

json small_config()
{
    return {{"model", {{"preset", "decoupled"}}},
            {"grids", {{"K", 50}, {"J", 60}, {"dt", 0.02}}},
            {"simulate", {{"N", 200}, {"replications", 2}}},
            {"study", {{"N_list", {20, 40, 80}}, {"pilot_particles", 2000}, {"mc_paths", 2000}, {"probe_count", 200}}},
            {"seed", 3}};
}

}  // namespace

TEST_CASE("minimal config fills defaults")
{
    const ExperimentConfig c = parse_config({{"model", {{"preset", "brownian"}}}, {"seed", 4}});
    CHECK(c.seed == 4);
    CHECK(c.grids == GridSection{});
    CHECK(c.mfg == MfgSection{});
    CHECK(c.output.has("csv"));
    CHECK(c.model.sigma == 1.0);
}

TEST_CASE("unknown keys are named")
{
    CHECK(config_error({{"modle", json::object()}, {"seed", 1}}) == "unknown key: modle");
    CHECK(config_error({{"model", {{"preset", "brownian"}, {"sigmaa", 1.0}}}}) == "unknown key: model.sigmaa");
}

TEST_CASE("range errors name the field")
{
    const std::string e = config_error({{"model", {{"preset", "brownian"}}}, {"grids", {{"dt", 0.0}}}});
    CHECK(e.find("dt") != std::string::npos);
    CHECK(e.find("must be") != std::string::npos);
    CHECK_FALSE(config_error({{"model", {{"preset", "brownian"}}}, {"mfg", {{"damping", 1.5}}}}).empty());
    CHECK_FALSE(config_error({{"model", {{"preset", "nope"}}}}).empty());
    CHECK_FALSE(config_error({{"model", {{"preset", "brownian"}, {"sigma", -1.0}}}}).empty());
    CHECK_FALSE(config_error({{"model", {{"preset", "brownian"}}}, {"study", {{"alpha_list", {3}}}}}).empty());
}

TEST_CASE("resolved config round-trips")
{
    const ExperimentConfig c = parse_config(small_config());
    CHECK(parse_config(to_json(c)) == c);
    json custom = {{"model",
                    {{"drift", {{"family", "ou"}, {"params", {{"kappa", 2.0}}}}},
                     {"initial", {{"family", "truncated_gaussian"}, {"mean", 1.0}, {"sd", 0.5}, {"a", 0.1}, {"b", 3.0}}}}},
                   {"seed", 8}};
    const ExperimentConfig d = parse_config(custom);
    CHECK(parse_config(to_json(d)) == d);
}

TEST_CASE("load_config reads files and reports missing ones")
{
    const fs::path dir = fs::temp_directory_path() / "mfgabs_unit_config";
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "c.json");
        os << "{\n  // comment\n  \"model\": {\"preset\": \"brownian\"},\n  \"seed\": 2\n}\n";
    }
    CHECK(load_config(dir / "c.json").seed == 2);
    CHECK_THROWS_AS(load_config(dir / "absent.json"), IoError);
    {
        std::ofstream os(dir / "bad.json");
        os << "{ not json";
    }
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("artifact manifest hashes")
{
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    ArtifactSet a;
    a.add("b.txt", "2");
    a.add("a.txt", "1");
    const json m = json::parse(a.manifest());
    REQUIRE(m["files"].size() == 2);
    CHECK(m["files"][0]["path"] == "a.txt");
    CHECK(m["files"][1]["bytes"] == 1);
}

TEST_CASE("resolve_output_dir honours override and environment")
{
    ExperimentConfig c = parse_config(small_config());
    c.output.directory = "rel";
    CHECK(resolve_output_dir(c, fs::path("/tmp/x")) == fs::path("/tmp/x"));
    ::setenv(kOutputRootEnv, "/tmp/root", 1);
    CHECK(resolve_output_dir(c, std::nullopt) == fs::path("/tmp/root/rel"));
    ::unsetenv(kOutputRootEnv);
    CHECK(resolve_output_dir(c, std::nullopt) == fs::path("rel"));
}

TEST_CASE("solve-mfg on the decoupled model converges in one effective iteration")
{
    const RunResult r = execute("solve-mfg", parse_config(small_config()));
    CHECK(r.exit_code == 0);
    for (const char* f : {"fixed_point.jsonl", "flow.csv", "summary.json", "resolved_config.json"})
        CHECK(r.artifacts.contains(f));
    const json s = json::parse(r.artifacts.content("summary.json"));
    CHECK(s["converged"] == true);
    CHECK(s["effective_iterations"] == 1);
}

TEST_CASE("runs are deterministic and commit atomically")
{
    const ExperimentConfig c = parse_config(small_config());
    const fs::path dir = fs::temp_directory_path() / "mfgabs_unit_runs";
    fs::remove_all(dir);
    run("simulate-nplayer", c, dir / "a");
    run("simulate-nplayer", c, dir / "b");
    std::ifstream ia(dir / "a" / "manifest.json"), ib(dir / "b" / "manifest.json");
    const std::string ma((std::istreambuf_iterator<char>(ia)), {});
    const std::string mb((std::istreambuf_iterator<char>(ib)), {});
    CHECK_FALSE(ma.empty());
    CHECK(ma == mb);
    CHECK_FALSE(fs::exists(dir / "a.staging"));
    CHECK_THROWS_AS(execute("no-such-command", c), ConfigError);
    fs::remove_all(dir);
}
