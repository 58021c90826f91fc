#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "thermodemon/io.hpp"

using namespace thermodemon;
namespace fs = std::filesystem;

namespace
{

struct Run
{
    int code;
    std::string out, err;
};

Run invoke(std::vector<std::string> args)
{
    std::ostringstream o, e;
    const int code = cli::run_cli(args, o, e);
    return {code, o.str(), e.str()};
}

fs::path scratch(const std::string& name)
{
    auto dir = fs::temp_directory_path() / ("thermodemon_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("szilard prints the ideal trace")
{
    const auto r = invoke({"szilard", "--mode", "ideal", "-n", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.find("trace 1,1,1,2,1 bits") != std::string::npos);
    CHECK(r.out.find("audit OK") != std::string::npos);
}

TEST_CASE("strict endemon exits 2")
{
    const auto r = invoke({"endemon", "--mode", "ideal", "-n", "10", "--strict"});
    CHECK(r.code == 2);
    CHECK(r.out.find("-1 bit/cycle") != std::string::npos);
    CHECK(invoke({"endemon", "--mode", "ideal", "-n", "10"}).code == 0);
    CHECK(invoke({"endemon", "-n", "10", "--strict", "--blind-reset", "true"}).code == 0);
}

TEST_CASE("invalid arguments exit 1")
{
    CHECK(invoke({"compress", "--nope"}).code == 1);
    CHECK(invoke({"compress", "--factor", "abc"}).code == 1);
    CHECK(invoke({"szilard", "--mode", "quantum"}).code == 1);
    CHECK(invoke({}).code == 1);
    CHECK(invoke({"tape", "--tape", "012"}).code == 1);
}

TEST_CASE("config files")
{
    CHECK(cli::parse_config("").empty());
    CHECK(cli::parse_config("temperature = 2.0\n# note\n").at("temperature") == "2.0");
    CHECK_THROWS_WITH_AS(cli::parse_config("a = 1\na = 2\n", "f"), "f:2: duplicate key 'a'", std::runtime_error);
    CHECK_THROWS_WITH_AS(cli::parse_config("a = 1\nnonsense\n", "f"), "f:2: expected 'key = value'", std::runtime_error);

    const auto dir = scratch("config");
    io::write_file((dir / "t.cfg").string(), "temperature = 2.0\n");
    const auto r = invoke({"compress", "--config", (dir / "t.cfg").string(), "-n", "10", "--out", (dir / "run").string()});
    REQUIRE(r.code == 0);
    const auto manifest = nlohmann::json::parse(io::read_file((dir / "run.manifest.json").string()));
    CHECK(manifest["parameters"]["temperature"] == "2.0");
    // Flags win over the file.
    CHECK(invoke({"compress", "--config", (dir / "t.cfg").string(), "-n", "10", "--temperature", "3", "--out", (dir / "run2").string()}).code == 0);
    CHECK(nlohmann::json::parse(io::read_file((dir / "run2.manifest.json").string()))["parameters"]["temperature"] == "3");

    io::write_file((dir / "bad.cfg").string(), "temprature = 2\n");
    CHECK(invoke({"compress", "--config", (dir / "bad.cfg").string()}).code == 1);
    io::write_file((dir / "empty.cfg").string(), "");
    CHECK(invoke({"szilard", "--config", (dir / "empty.cfg").string()}).code == 0);
}

TEST_CASE("manifests name every file and reruns are byte-identical")
{
    const auto dir = scratch("rerun");
    const std::vector<std::vector<std::string>> runs = {
        {"compress", "-n", "200", "--seed", "42"},
        {"szilard", "--mode", "physical", "-n", "20", "--seed", "3"},
        {"endemon", "--mode", "physical", "-n", "20", "--p-err", "0.3"},
        {"tape", "--mode", "physical"},
        {"spins", "--ensemble", "product", "--p-one", "0.9"},
        {"trapdoor", "-n", "2", "--events", "20000"},
    };
    for (std::size_t i = 0; i < runs.size(); ++i)
    {
        auto args = runs[i];
        const auto prefix = (dir / ("a" + std::to_string(i))).string();
        args.insert(args.end(), {"--out", prefix});
        REQUIRE(invoke(args).code == 0);
        const auto manifest = nlohmann::json::parse(io::read_file(prefix + ".manifest.json"));
        for (const auto& path : manifest["outputs"]) CHECK(fs::exists(path.get<std::string>()));
        const auto again = (dir / ("b" + std::to_string(i))).string();
        REQUIRE(invoke({"rerun", prefix + ".manifest.json", "--out", again}).code == 0);
        CHECK(io::read_file(prefix + ".csv") == io::read_file(again + ".csv"));
    }
}

TEST_CASE("audit subcommand reads a written ledger")
{
    const auto dir = scratch("audit");
    const auto prefix = (dir / "en").string();
    REQUIRE(invoke({"endemon", "-n", "1", "--out", prefix}).code == 0);
    CHECK(invoke({"audit", "--ledger", prefix + ".ledger.json", "--strict"}).code == 2);
    REQUIRE(invoke({"szilard", "--out", (dir / "sz").string()}).code == 0);
    CHECK(invoke({"audit", "--ledger", (dir / "sz.ledger.json").string(), "--strict"}).code == 0);
    CHECK(invoke({"audit"}).code == 1);
}

TEST_CASE("json output")
{
    const auto dir = scratch("json");
    const auto prefix = (dir / "t").string();
    REQUIRE(invoke({"tape", "--tape", "0110", "--format", "json", "--out", prefix}).code == 0);
    const auto j = nlohmann::json::parse(io::read_file(prefix + ".json"));
    REQUIRE(j.size() == 4);
    CHECK(j[0]["dS_env_bits"] == 1.0);
}
