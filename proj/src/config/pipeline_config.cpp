#include <cstdlib>
#include <fstream>
#include <regex>

#include "disco/config/config.hpp"

namespace disco::config {
namespace fs = std::filesystem;

namespace {

void reject_interpolation(const Json& j, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>().find("${") != std::string::npos) {
      throw ConfigError(where + ": ${...} is only allowed in backend.auth_token");
    }
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) reject_interpolation(v, where.empty() ? k : where + "." + k);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) reject_interpolation(j[i], where + "[" + std::to_string(i) + "]");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

std::optional<std::uint64_t> Seeds::for_stage(const std::string& stage) const {
  if (const auto it = stages.find(stage); it != stages.end()) return it->second;
  return seed;
}

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

void PipelineConfig::validate() const {
  backend.validate();
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  for (const auto& [domain, n] : scenario_counts) {
    if (n < 0) throw ConfigError("scenario count for " + std::string(to_string(domain)) + " is negative");
  }
  sim::SimulationConfig probe = simulation;
  probe.validate();
  for (const auto& [name, p] : {std::pair{"data_dir", paths.data_dir}, std::pair{"fewshot_dir", paths.fewshot_dir},
                                std::pair{"lexicon_dir", paths.lexicon_dir}, std::pair{"prompts_dir", paths.prompts_dir},
                                std::pair{"metric_sets", paths.metric_sets}}) {
    if (!fs::exists(p)) throw ConfigError(std::string("paths.") + name + " does not exist: " + p.string());
  }
  if (!backend.mock_bank.empty() && !fs::exists(backend.mock_bank)) {
    throw ConfigError("backend.mock_bank does not exist: " + backend.mock_bank.string());
  }
}

PipelineConfig default_config(const fs::path& data_dir) {
  PipelineConfig c;
  c.paths.data_dir = data_dir;
  c.paths.fewshot_dir = data_dir / "fewshot";
  c.paths.lexicon_dir = data_dir / "lexicons";
  c.paths.prompts_dir = data_dir / "prompts";
  c.paths.metric_sets = data_dir / "metric_sets.json";
  for (const auto d : kAllDomains) c.scenario_counts[d] = 20;
  return c;
}

PipelineConfig config_from_json(const Json& j, const fs::path& base_dir, const fs::path& data_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  try {
    fs::path data = data_dir;
    if (j.contains("paths") && j["paths"].contains("data_dir")) {
      data = resolve(base_dir, j["paths"]["data_dir"].get<std::string>());
    }
    c = default_config(data);

    if (j.contains("backend")) {
      Json b = j["backend"];
      if (b.contains("auth_token")) {
        static const std::regex var(R"(^\$\{([A-Za-z_][A-Za-z0-9_]*)\}$)");
        const std::string raw = b["auth_token"].get<std::string>();
        std::smatch m;
        if (!std::regex_match(raw, m, var)) {
          throw ConfigError("backend.auth_token must be an environment reference like ${DISCO_API_KEY}");
        }
        b["auth_token_env"] = m[1].str();
        b.erase("auth_token");
      }
      reject_interpolation(b, "backend");
      c.backend = backend::backend_config_from_json(b);
      if (!c.backend.mock_bank.empty()) c.backend.mock_bank = resolve(base_dir, c.backend.mock_bank.string());
    }
    Json rest = j;
    rest.erase("backend");
    reject_interpolation(rest, "");

    if (j.contains("scenarios")) {
      const auto& s = j["scenarios"];
      if (s.contains("counts")) {
        c.scenario_counts.clear();
        for (const auto& [domain, n] : s["counts"].items()) c.scenario_counts[parse_domain(domain)] = n.get<int>();
      }
    }
    if (j.contains("simulation")) {
      const auto& s = j["simulation"];
      auto& sim = c.simulation;
      sim.history_window = s.value("history_window", sim.history_window);
      sim.driver_temperature = s.value("driver_temperature", sim.driver_temperature);
      sim.ai_temperature = s.value("ai_temperature", sim.ai_temperature);
      sim.driver_max_tokens = s.value("driver_max_tokens", sim.driver_max_tokens);
      sim.ai_max_tokens = s.value("ai_max_tokens", sim.ai_max_tokens);
      if (s.contains("length_schedule")) c.schedule = sim::parse_length_schedule(s["length_schedule"].get<std::string>());
    }
    c.jobs = j.value("jobs", c.jobs);
    if (j.contains("seeds")) {
      for (const auto& [k, v] : j["seeds"].items()) {
        if (k == "default") {
          c.seeds.seed = v.get<std::uint64_t>();
        } else {
          c.seeds.stages[k] = v.get<std::uint64_t>();
        }
      }
    }
    if (j.contains("seed")) c.seeds.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      if (p.contains("fewshot_dir")) c.paths.fewshot_dir = resolve(base_dir, p["fewshot_dir"].get<std::string>());
      if (p.contains("lexicon_dir")) c.paths.lexicon_dir = resolve(base_dir, p["lexicon_dir"].get<std::string>());
      if (p.contains("prompts_dir")) c.paths.prompts_dir = resolve(base_dir, p["prompts_dir"].get<std::string>());
      if (p.contains("metric_sets")) c.paths.metric_sets = resolve(base_dir, p["metric_sets"].get<std::string>());
      if (p.contains("output_dir")) c.paths.output_dir = resolve(base_dir, p["output_dir"].get<std::string>());
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& file, const fs::path& data_dir) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config " + file.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return config_from_json(j, file.has_parent_path() ? file.parent_path() : fs::path("."), data_dir);
}

Json to_json(const PipelineConfig& c) {
  Json counts = Json::object();
  for (const auto& [d, n] : c.scenario_counts) counts[std::string(to_string(d))] = n;
  Json seeds = Json::object();
  if (c.seeds.seed) seeds["default"] = *c.seeds.seed;
  for (const auto& [k, v] : c.seeds.stages) seeds[k] = v;
  return Json{{"backend", backend::to_json(c.backend)},
              {"scenarios", Json{{"counts", counts}}},
              {"simulation", Json{{"history_window", c.simulation.history_window},
                                  {"driver_temperature", c.simulation.driver_temperature},
                                  {"ai_temperature", c.simulation.ai_temperature},
                                  {"driver_max_tokens", c.simulation.driver_max_tokens},
                                  {"ai_max_tokens", c.simulation.ai_max_tokens},
                                  {"length_schedule", sim::to_string(c.schedule)}}},
              {"jobs", c.jobs},
              {"seeds", seeds},
              {"paths", Json{{"data_dir", c.paths.data_dir.string()},
                             {"fewshot_dir", c.paths.fewshot_dir.string()},
                             {"lexicon_dir", c.paths.lexicon_dir.string()},
                             {"prompts_dir", c.paths.prompts_dir.string()},
                             {"metric_sets", c.paths.metric_sets.string()},
                             {"output_dir", c.paths.output_dir.string()}}}};
}

}  // namespace disco::config
