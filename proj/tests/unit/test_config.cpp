#include <fstream>

#include "../fixtures.hpp"
#include "disco/common/paths.hpp"
#include "disco/config/config.hpp"
#include "doctest.h"
#include "disco/errors.hpp"

using namespace disco;
using namespace disco::config;

TEST_CASE("defaults point at the shipped data") {
  const auto c = default_config(default_data_dir());
  CHECK_NOTHROW(c.validate());
  CHECK(c.scenario_counts.size() == 7);
  CHECK(c.scenario_counts.at(DomainTag::weather) == 20);
  CHECK(c.simulation.history_window == 6);
  CHECK_FALSE(c.seeds.seed.has_value());
}

TEST_CASE("config JSON") {
  const Json j = Json::parse(R"({
    "backend": {"kind": "http", "endpoint_url": "https://api.example.com/v1", "model_name": "m",
                "auth_token": "${MY_KEY}"},
    "scenarios": {"counts": {"weather": 5}},
    "simulation": {"history_window": 4, "length_schedule": "uniform"},
    "jobs": 3,
    "seeds": {"default": 11, "inject": 12}
  })");
  const auto c = config_from_json(j, ".", default_data_dir());
  CHECK(c.backend.auth_token_env == "MY_KEY");
  CHECK(c.scenario_counts.size() == 1);
  CHECK(c.simulation.history_window == 4);
  CHECK(c.schedule == sim::LengthSchedule::uniform);
  CHECK(c.jobs == 3);
  CHECK(c.seeds.for_stage("inject") == 12u);
  CHECK(c.seeds.for_stage("simulate") == 11u);
  CHECK(to_json(c).dump().find("MY_KEY") != std::string::npos);
}

TEST_CASE("config errors") {
  const auto data = default_data_dir();
  CHECK_THROWS_AS(config_from_json(Json::array(), ".", data), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"backend", {{"auth_token", "sk-literal"}}}}, ".", data), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"backend", {{"endpoint_url", "${HOST}"}}}}, ".", data), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"paths", {{"output_dir", "${HOME}/x"}}}}, ".", data), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"jobs", 0}}, ".", data), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"simulation", {{"history_window", 0}}}}, ".", data), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"scenarios", {{"counts", {{"space", 1}}}}}}, ".", data), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"paths", {{"lexicon_dir", "/no/such/dir"}}}}, ".", data), ConfigError);
  CHECK_THROWS_AS(load_config("/no/such/config.json", data), ConfigError);
}

TEST_CASE("relative paths resolve against the config file") {
  const auto dir = fixtures::temp_dir("config");
  std::filesystem::create_directories(dir / "lex");
  std::filesystem::copy(default_data_dir() / "lexicons", dir / "lex");
  std::ofstream(dir / "c.json") << R"({"paths": {"lexicon_dir": "lex", "output_dir": "out"}, "seed": 5})";
  const auto c = load_config(dir / "c.json", default_data_dir());
  CHECK(c.paths.lexicon_dir == dir / "lex");
  CHECK(c.paths.output_dir == dir / "out");
  CHECK(c.seeds.seed == 5u);
  std::filesystem::remove_all(dir);
}
