#include <map>
#include <set>
#include <sstream>

#include "../support.hpp"
#include "disco/common/paths.hpp"
#include "disco/sim/sim.hpp"
#include "doctest.h"
#include "disco/errors.hpp"

using namespace disco;
using namespace disco::sim;

namespace {

const disfluency::LexiconSet& lex() {
  static const auto l = disfluency::load_lexicons(default_data_dir() / "lexicons");
  return l;
}

Scenario scen(const std::string& id, DomainTag d) { return {id, d, "The driver wants a quiet route home.", {}}; }

std::vector<Scenario> scenarios(std::size_t per_domain) {
  std::vector<Scenario> out;
  for (const auto d : kAllDomains) {
    for (std::size_t i = 0; i < per_domain; ++i) out.push_back(scen(std::string(to_string(d)) + "-" + std::to_string(i), d));
  }
  return out;
}

/// Fails with an empty completion on chosen call numbers.
struct Flaky final : backend::Backend {
  std::shared_ptr<backend::Backend> inner = std::make_shared<backend::MockBackend>(2);
  std::set<int> empty_on;
  std::set<int> down_on;
  int calls = 0;
  std::string complete(const backend::ChatRequest& r) override {
    const int n = calls++;
    if (empty_on.count(n)) throw EmptyOutputError("empty");
    if (down_on.count(n)) throw BackendUnavailableError("down");
    return inner->complete(r);
  }
  std::string id() const override { return "flaky"; }
};

std::string dump(const Corpus& c) {
  std::ostringstream os;
  write_corpus(c, os);
  return os.str();
}

}  // namespace

TEST_CASE("stage and window helpers") {
  CHECK(stage_for_turn(0, 6) == PromptStage::opening);
  CHECK(stage_for_turn(1, 6) == PromptStage::regular);
  CHECK(stage_for_turn(3, 6) == PromptStage::regular);
  CHECK(stage_for_turn(4, 6) == PromptStage::concluding);
  CHECK(stage_for_turn(5, 6) == PromptStage::concluding);

  std::vector<Turn> h(9);
  CHECK(window_history(h, 6).size() == 6);
  CHECK(window_history(std::span<const Turn>(h.data(), 2), 6).size() == 2);
  CHECK_THROWS_AS(window_history(h, 0), ArgumentError);

  Turn a{Speaker::driver, "hi\nthere", {}, 0, Json::object()};
  Turn b{Speaker::car_ai, "hello", {}, 1, Json::object()};
  CHECK(render_history(std::vector<Turn>{a, b}) == "Driver: hi there\nCar AI: hello\n");
}

TEST_CASE("prompt assembly") {
  const auto& t = default_templates();
  const auto s = scen("x", DomainTag::weather);
  const auto open = assemble_driver_prompt(t, s, {}, PromptStage::opening);
  CHECK(open.messages[0].content == t.driver_regular);
  CHECK(open.messages[1].content.find(s.text) != std::string::npos);
  std::vector<Turn> h = {{Speaker::driver, "a", {}, 0, Json::object()}, {Speaker::car_ai, "b", {}, 1, Json::object()}};
  CHECK(assemble_driver_prompt(t, s, h, PromptStage::concluding).messages[0].content == t.driver_concluding);
  CHECK(assemble_ai_prompt(t, h, PromptStage::concluding).messages[0].content == t.ai_concluding);
  CHECK(assemble_ai_prompt(t, h, PromptStage::regular).messages[0].content == t.ai_regular);
  CHECK(t.driver_regular.find("um") != std::string::npos);
}

TEST_CASE("utterance cleaning") {
  CHECK(clean_utterance("Driver: \"Where is the exit?\"") == "Where is the exit?");
  CHECK(clean_utterance("  Car AI: Take exit 4. ") == "Take exit 4.");
  CHECK_THROWS_AS(clean_utterance("Driver:   "), EmptyOutputError);
}

TEST_CASE("simulated dialogs are valid and respect the window and stages") {
  fixtures::RecordingBackend rec(std::make_shared<backend::MockBackend>(3));
  for (const int n : kTurnLengths) {
    SimulationConfig cfg;
    cfg.num_turns = n;
    cfg.seed = 9;
    const auto before = rec.calls().size();
    const auto d = simulate_dialog(cfg, rec, scen("s", DomainTag::navigation), lex(), default_templates());
    CHECK(validate_dialog(d).ok());
    const auto calls = rec.calls();
    REQUIRE(calls.size() - before == static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const auto& c = calls[before + static_cast<std::size_t>(i)];
      CHECK(c.history_lines <= 6);
      CHECK(c.history_lines == std::min(i, 6));
      const bool concluding = c.kind == backend::RequestKind::driver_concluding || c.kind == backend::RequestKind::ai_concluding;
      CHECK(concluding == (i >= n - 2));
    }
  }
}

TEST_CASE("one empty completion is retried, backend failure aborts with the partial dialog") {
  SimulationConfig cfg;
  Flaky once;
  once.empty_on = {2};
  CHECK(simulate_dialog(cfg, once, scen("s", DomainTag::weather), lex(), default_templates()).turns.size() == 6);

  Flaky twice;
  twice.empty_on = {2, 3};
  CHECK_THROWS_AS(simulate_dialog(cfg, twice, scen("s", DomainTag::weather), lex(), default_templates()), SimulationAborted);

  Flaky down;
  down.down_on = {3};
  try {
    simulate_dialog(cfg, down, scen("s", DomainTag::weather), lex(), default_templates());
    FAIL("expected SimulationAborted");
  } catch (const SimulationAborted& e) {
    CHECK(e.turn() == 3);
    CHECK(e.partial().turns.size() == 3);
    CHECK(e.category() == ErrorCategory::backend);
  }
  cfg.num_turns = 7;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("stratified length assignment balances each domain") {
  const auto s = scenarios(12);
  const auto lengths = assign_lengths(s, LengthSchedule::stratified, 4);
  for (const auto d : kAllDomains) {
    std::map<int, int> count;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i].domain == d) ++count[lengths[i]];
    }
    for (const int n : kTurnLengths) {
      CHECK(count[n] >= 2);
      CHECK(count[n] <= 3);
    }
  }
  CHECK(assign_lengths(s, LengthSchedule::stratified, 4) == lengths);
  CHECK_THROWS_AS(parse_length_schedule("random"), ConfigError);
}

TEST_CASE("corpus generation is independent of the number of jobs") {
  GenerationPlan plan;
  plan.scenarios = scenarios(3);
  plan.seed = 77;
  backend::MockBackend mock(77);
  plan.jobs = 1;
  const auto a = generate_corpus(plan, mock, lex(), default_templates());
  plan.jobs = 4;
  const auto b = generate_corpus(plan, mock, lex(), default_templates());
  CHECK(a.failures.empty());
  CHECK(a.corpus.dialogs.size() == plan.scenarios.size());
  CHECK(dump(a.corpus) == dump(b.corpus));
  CHECK(a.corpus.provenance["disfluency_spans"] == "heuristic");

  Flaky down;
  down.down_on = {0};
  plan.jobs = 1;
  const auto f = generate_corpus(plan, down, lex(), default_templates());
  CHECK(f.failures.size() == 1);
  CHECK(f.corpus.dialogs.size() == plan.scenarios.size() - 1);
}
