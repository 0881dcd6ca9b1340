#include <atomic>
#include <mutex>
#include <thread>

#include "disco/common/random.hpp"
#include "disco/common/text.hpp"
#include "disco/sim/sim.hpp"

namespace disco::sim {
namespace {

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

std::string complete_with_retry(backend::Backend& backend, const backend::ChatRequest& request) {
  try {
    return clean_utterance(backend.complete(request));
  } catch (const EmptyOutputError&) {
    return clean_utterance(backend.complete(request));
  }
}

}  // namespace

std::string clean_utterance(std::string_view raw) {
  std::string_view s = text::trim(raw);
  for (const std::string_view label : {"driver:", "car ai:", "car_ai:", "ai:", "assistant:"}) {
    if (starts_with_ci(s, label)) {
      s = text::trim(s.substr(label.size()));
      break;
    }
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"' &&
      s.substr(1, s.size() - 2).find('"') == std::string_view::npos) {
    s = text::trim(s.substr(1, s.size() - 2));
  }
  if (s.empty()) throw EmptyOutputError("completion is empty after removing its speaker label");
  return std::string(s);
}

Dialog simulate_dialog(const SimulationConfig& config, backend::Backend& backend, const Scenario& scenario,
                       const disfluency::LexiconSet& lexicons, const PromptTemplates& templates,
                       std::string dialog_id) {
  config.validate();
  if (text::is_blank(scenario.text)) throw ArgumentError("scenario text is empty");

  Dialog d;
  d.id = dialog_id.empty() ? scenario.id : std::move(dialog_id);
  d.domain = scenario.domain;
  d.scenario = scenario;
  d.num_turns = static_cast<std::size_t>(config.num_turns);
  d.extra["template_version"] = templates.version;

  const auto n = static_cast<std::size_t>(config.num_turns);
  for (std::size_t i = 0; i < n; ++i) {
    const bool driver = i % 2 == 0;
    const PromptStage stage = stage_for_turn(i, n);
    backend::ChatRequest request =
        driver ? assemble_driver_prompt(templates, scenario, d.turns, stage, config.history_window)
               : assemble_ai_prompt(templates, d.turns, stage, config.history_window);
    request.temperature = driver ? config.driver_temperature : config.ai_temperature;
    request.max_tokens = driver ? config.driver_max_tokens : config.ai_max_tokens;
    request.seed = static_cast<std::int64_t>(derive_seed(config.seed, i) >> 1);

    Turn turn;
    turn.speaker = driver ? Speaker::driver : Speaker::car_ai;
    turn.turn_index = i;
    try {
      turn.text = complete_with_retry(backend, request);
    } catch (const Error& e) {
      Dialog partial = d;
      partial.num_turns = partial.turns.size();
      throw SimulationAborted("dialog " + d.id + " aborted at turn " + std::to_string(i) + ": " + e.what(),
                              e.category(), std::move(partial), i);
    }
    if (driver) turn.disfluency_spans = disfluency::tag_disfluencies(turn.text, lexicons);
    d.turns.push_back(std::move(turn));
  }
  return d;
}

std::string_view to_string(LengthSchedule s) noexcept {
  return s == LengthSchedule::stratified ? "stratified" : "uniform";
}

LengthSchedule parse_length_schedule(std::string_view s) {
  if (s == "stratified") return LengthSchedule::stratified;
  if (s == "uniform") return LengthSchedule::uniform;
  throw ConfigError("unknown length schedule \"" + std::string(s) + "\"");
}

std::vector<int> assign_lengths(std::span<const Scenario> scenarios, LengthSchedule schedule, std::uint64_t seed) {
  std::vector<int> lengths(scenarios.size(), 0);
  if (schedule == LengthSchedule::uniform) {
    Rng rng(derive_seed(seed, "lengths"));
    for (auto& l : lengths) l = kTurnLengths[rng.uniform_index(kTurnLengths.size())];
    return lengths;
  }
  for (const auto domain : kAllDomains) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      if (scenarios[i].domain == domain) members.push_back(i);
    }
    if (members.empty()) continue;
    Rng rng(derive_seed(seed, to_string(domain)));
    std::vector<int> pool;
    for (std::size_t k = 0; k < members.size() / kTurnLengths.size(); ++k) {
      pool.insert(pool.end(), kTurnLengths.begin(), kTurnLengths.end());
    }
    std::vector<int> extra(kTurnLengths.begin(), kTurnLengths.end());
    rng.shuffle(extra);
    pool.insert(pool.end(), extra.begin(), extra.begin() + static_cast<std::ptrdiff_t>(members.size() % kTurnLengths.size()));
    rng.shuffle(pool);
    for (std::size_t k = 0; k < members.size(); ++k) lengths[members[k]] = pool[k];
  }
  return lengths;
}

GenerationResult generate_corpus(const GenerationPlan& plan, backend::Backend& backend,
                                 const disfluency::LexiconSet& lexicons, const PromptTemplates& templates) {
  if (plan.jobs < 1) throw ConfigError("jobs must be at least 1");
  {
    SimulationConfig probe = plan.simulation;
    probe.num_turns = plan.fixed_length.value_or(6);
    probe.validate();
  }
  const auto& scenarios = plan.scenarios;
  std::vector<int> lengths;
  if (plan.fixed_length) {
    lengths.assign(scenarios.size(), *plan.fixed_length);
  } else {
    lengths = assign_lengths(scenarios, plan.schedule, plan.seed);
  }

  std::vector<std::optional<Dialog>> dialogs(scenarios.size());
  std::vector<std::optional<GenerationFailure>> failures(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      SimulationConfig cfg = plan.simulation;
      cfg.num_turns = lengths[i];
      cfg.seed = derive_seed(plan.seed, scenarios[i].id);
      try {
        dialogs[i] = simulate_dialog(cfg, backend, scenarios[i], lexicons, templates);
      } catch (const SimulationAborted& e) {
        failures[i] = GenerationFailure{i, scenarios[i].id, e.what(), e.partial()};
      } catch (const Error& e) {
        failures[i] = GenerationFailure{i, scenarios[i].id, e.what(), {}};
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(plan.jobs), scenarios.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  GenerationResult result;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (dialogs[i]) result.corpus.dialogs.push_back(std::move(*dialogs[i]));
    if (failures[i]) result.failures.push_back(std::move(*failures[i]));
  }
  result.corpus.provenance = Json{{"generator", "disco-sim"},
                                  {"seed", plan.seed},
                                  {"backend", backend.id()},
                                  {"template_version", templates.version},
                                  {"history_window", plan.simulation.history_window},
                                  {"driver_temperature", plan.simulation.driver_temperature},
                                  {"ai_temperature", plan.simulation.ai_temperature},
                                  {"length_schedule", plan.fixed_length ? std::string("fixed") : std::string(to_string(plan.schedule))},
                                  {"disfluency_spans", "heuristic"},
                                  {"failures", result.failures.size()}};
  return result;
}

Json to_json(const GenerationFailure& f) {
  Json j{{"index", f.index}, {"scenario_id", f.scenario_id}, {"message", f.message}};
  if (!f.partial.id.empty()) j["partial"] = to_json(f.partial);
  return j;
}

}  // namespace disco::sim
