#include <sstream>

#include "../fixtures.hpp"
#include "disco/corpus/corpus.hpp"
#include "doctest.h"
#include "disco/errors.hpp"

using namespace disco;

namespace {

bool has_code(const ValidationReport& r, const std::string& code) {
  for (const auto& v : r.violations) {
    if (v.code == code) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("domain, speaker and span enums round-trip") {
  for (const auto d : kAllDomains) CHECK(parse_domain(to_string(d)) == d);
  CHECK(display_name(DomainTag::maintenance_diagnostics) == "Car Maintenance and Diagnostics");
  CHECK_THROWS_AS(parse_domain("banking"), ParseError);
  CHECK(parse_speaker("car_ai") == Speaker::car_ai);
  CHECK(parse_disfluency_type("false_start") == DisfluencyType::false_start);
}

TEST_CASE("corpus JSONL round trip keeps provenance and unknown fields") {
  Corpus c;
  c.provenance = Json{{"generator", "test"}, {"seed", 3}};
  auto d = fixtures::make_dialog("nav-1", DomainTag::navigation, 6);
  d.extra["services"] = Json::array({"navigation"});
  d.turns[0].extra["audio"] = "none";
  d.turns[0].disfluency_spans.push_back({DisfluencyType::filler, 0, 6, SpanSource::tagged});
  c.dialogs.push_back(d);

  std::stringstream ss;
  write_corpus(c, ss);
  const Corpus back = read_corpus(ss);
  CHECK(back == c);

  std::stringstream again;
  write_corpus(back, again);
  std::stringstream first;
  write_corpus(c, first);
  CHECK(again.str() == first.str());
}

TEST_CASE("reading rejects malformed lines and duplicate ids") {
  std::stringstream bad("{\"id\": 1}\n");
  CHECK_THROWS_AS(read_corpus(bad), ParseError);
  std::stringstream broken("not json\n");
  try {
    read_corpus(broken);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
  Corpus c;
  c.dialogs = {fixtures::make_dialog("x", DomainTag::weather, 6), fixtures::make_dialog("x", DomainTag::weather, 6)};
  CHECK_THROWS_AS(check_unique_ids(c), IntegrityError);
  std::stringstream dup;
  dup << to_json(c.dialogs[0]).dump() << "\n" << to_json(c.dialogs[1]).dump() << "\n";
  CHECK_THROWS_AS(read_corpus(dup), IntegrityError);
}

TEST_CASE("well-formed dialogs validate clean") {
  for (const int n : kTurnLengths) {
    CHECK(validate_dialog(fixtures::make_dialog("d", DomainTag::entertainment, static_cast<std::size_t>(n))).ok());
  }
}

TEST_CASE("validation rules fire") {
  auto d = fixtures::make_dialog("d", DomainTag::navigation, 6);
  SUBCASE("alternation") {
    d.turns[2].speaker = Speaker::car_ai;
    CHECK(has_code(validate_dialog(d), "ALTERNATION"));
  }
  SUBCASE("final speaker") {
    d.turns.pop_back();
    d.num_turns = 5;
    const auto r = validate_dialog(d);
    CHECK(has_code(r, "FINAL_SPEAKER"));
    CHECK(has_code(r, "TURN_LENGTH"));
  }
  SUBCASE("num_turns mismatch") {
    d.num_turns = 8;
    CHECK(has_code(validate_dialog(d), "NUM_TURNS_MISMATCH"));
  }
  SUBCASE("empty text") {
    d.turns[1].text = "  ";
    CHECK(has_code(validate_dialog(d), "EMPTY_TEXT"));
  }
  SUBCASE("span bounds and overlap") {
    d.turns[0].disfluency_spans = {{DisfluencyType::filler, 0, 500, SpanSource::tagged}};
    CHECK(has_code(validate_dialog(d), "SPAN_BOUNDS"));
    d.turns[0].disfluency_spans = {{DisfluencyType::filler, 0, 4, SpanSource::tagged},
                                   {DisfluencyType::pause, 2, 6, SpanSource::tagged}};
    CHECK(has_code(validate_dialog(d), "SPAN_OVERLAP"));
  }
  SUBCASE("turn index") {
    d.turns[3].turn_index = 7;
    CHECK(has_code(validate_dialog(d), "TURN_INDEX"));
  }
  SUBCASE("scenario domain") {
    d.scenario.domain = DomainTag::weather;
    CHECK(has_code(validate_dialog(d), "SCENARIO_DOMAIN"));
  }
}

TEST_CASE("lenient policy downgrades only the length rule") {
  auto d = fixtures::make_dialog("kv", DomainTag::navigation, 4);
  CHECK_FALSE(validate_dialog(d).ok());
  const auto lenient = validate_dialog(d, ValidationPolicy{false});
  CHECK(lenient.ok());
  REQUIRE(lenient.warnings.size() == 1);
  CHECK(lenient.warnings[0].code == "TURN_LENGTH");
}

TEST_CASE("scenario files round trip") {
  const auto dir = fixtures::temp_dir("scenarios");
  std::vector<Scenario> s = {{"navigation-0001", DomainTag::navigation, "The driver is lost.", Json::object()},
                             {"weather-0001", DomainTag::weather, "The driver expects fog.", Json{{"tag", 1}}}};
  write_scenarios(s, dir / "s.jsonl");
  CHECK(read_scenarios(dir / "s.jsonl") == s);
  std::filesystem::remove_all(dir);
}
