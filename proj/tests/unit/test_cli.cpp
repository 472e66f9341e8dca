#include <filesystem>
#include <fstream>
#include <sstream>

#include "critheat/commands.hpp"
#include "critheat/config.hpp"
#include "doctest.h"

using namespace critheat;

namespace {
Json base(const std::string& cmd) {
  return {{"command", cmd}, {"domain", {{"kind", "unit-ball"}, {"mode", "radial"}, {"resolution", 256}}}};
}
}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config round trip is bit-identical") {
    auto c = RunConfig::from_json(base("robin"));
    auto again = RunConfig::from_json(Json::parse(c.canonical()));
    CHECK(again.canonical() == c.canonical());
    CHECK(again.hash() == c.hash());
  }

  TEST_CASE("unknown keys and commands are rejected") {
    Json j = base("robin");
    j["nonsense"] = 1;
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json(base("frobnicate")), ConfigError);
  }

  TEST_CASE("overrides") {
    Json j = base("robin");
    apply_override(j, "domain.resolution=512");
    apply_override(j, "q=[0.1,0,0]");
    auto c = RunConfig::from_json(j);
    CHECK(c.domain.resolution == 512);
    CHECK(c.q[0] == 0.1);
    CHECK_THROWS_AS(apply_override(j, "novalue"), ConfigError);
  }

  TEST_CASE("hash ignores output, cache and jobs") {
    Json j = base("eig");
    auto a = RunConfig::from_json(j);
    j["output"] = "/elsewhere";
    j["jobs"] = 4;
    j["cache"] = "off";
    CHECK(RunConfig::from_json(j).hash() == a.hash());
  }

  TEST_CASE("run writes deterministic artifacts and error records") {
    auto dir = std::filesystem::temp_directory_path() / "critheat-unit-cli";
    std::filesystem::remove_all(dir);
    Json j = base("robin");
    j["output"] = dir.string();
    auto c = RunConfig::from_json(j);
    std::ostringstream log;
    REQUIRE(run_command(c, log) == 0);
    auto csv = dir / ("robin-" + c.hash() + ".csv");
    std::ifstream f1(csv);
    std::string first((std::istreambuf_iterator<char>(f1)), {});
    REQUIRE(run_command(c, log) == 0);
    std::ifstream f2(csv);
    std::string second((std::istreambuf_iterator<char>(f2)), {});
    CHECK(first == second);
    CHECK(first.rfind("gamma,robin,closed_form\n", 0) == 0);

    Json bad = base("robin");
    bad["output"] = dir.string();
    bad["gamma"] = 9.8;  // resonant with lambda_1 for the nonlocal kernel
    bad["command"] = "nonlocal";
    auto cb = RunConfig::from_json(bad);
    int code = run_command(cb, log);
    CHECK((code == 2 || code == 3));
    std::ifstream fe(dir / ("nonlocal-" + cb.hash() + ".json"));
    Json err = Json::parse(fe);
    CHECK(err["status"] == "error");
    std::filesystem::remove_all(dir);
  }
}
