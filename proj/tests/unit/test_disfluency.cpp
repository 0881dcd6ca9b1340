#include <algorithm>
#include <sstream>

#include "../fixtures.hpp"
#include "disco/common/paths.hpp"
#include "disco/common/text.hpp"
#include "disco/disfluency/disfluency.hpp"
#include "doctest.h"
#include "disco/errors.hpp"

using namespace disco;
using namespace disco::disfluency;

namespace {

const LexiconSet& lex() {
  static const LexiconSet l = load_lexicons(default_data_dir() / "lexicons");
  return l;
}

bool has_kind(const std::vector<DisfluencySpan>& spans, DisfluencyType k) {
  return std::any_of(spans.begin(), spans.end(), [&](const auto& s) { return s.kind == k; });
}

std::string slice(std::string_view text, const DisfluencySpan& s) {
  const auto b = text::byte_offset(text, s.start);
  const auto e = text::byte_offset(text, s.end);
  return std::string(text.substr(b, e - b));
}

}  // namespace

TEST_CASE("lexicons load lowercase and symmetric") {
  const auto& l = lex();
  CHECK_NOTHROW(l.validate());
  CHECK(l.covers("closest"));
  CHECK(l.covers("nearest"));
  CHECK_FALSE(l.covers("zebra"));
  LexiconSet bad = l;
  bad.fillers.push_back("Um");
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("tagger examples") {
  const auto um = tag_disfluencies("Can you, um, check the tire pressure?", lex());
  REQUIRE(um.size() == 1);
  CHECK(um[0].kind == DisfluencyType::filler);
  CHECK(slice("Can you, um, check the tire pressure?", um[0]) == "um");

  const std::string pause_text = "I think we’ll be there... um, soon.";
  const auto pause = tag_disfluencies(pause_text, lex());
  CHECK(pause.size() == 2);
  CHECK(has_kind(pause, DisfluencyType::pause));
  CHECK(has_kind(pause, DisfluencyType::filler));

  CHECK(tag_disfluencies("Turn left at the signal.", lex()).empty());

  const std::string rep = "I think, I think we should take the next exit.";
  const auto r = tag_disfluencies(rep, lex());
  REQUIRE(r.size() == 1);
  CHECK(r[0].kind == DisfluencyType::repetition);
  CHECK(slice(rep, r[0]).find("I think") != std::string::npos);

  for (const auto& ex : fixtures::tagger_examples()) {
    INFO(ex.text);
    CHECK(has_kind(tag_disfluencies(ex.text, lex()), ex.kind));
  }
  for (const auto& s : fixtures::fluent_control()) {
    INFO(s);
    CHECK(tag_disfluencies(s, lex()).empty());
  }
}

TEST_CASE("tagged spans are sorted and disjoint") {
  const std::string t = "Um, so, I mean, the the road... uh—actually, let's go.";
  const auto spans = tag_disfluencies(t, lex());
  REQUIRE_FALSE(spans.empty());
  for (std::size_t i = 1; i < spans.size(); ++i) CHECK(spans[i - 1].end <= spans[i].start);
  for (const auto& s : spans) CHECK(s.end <= text::codepoint_length(t));
}

TEST_CASE("repetition fixture") {
  const std::string src = "will it be raining in the next 7 days.";
  const auto out = apply_repetition(src, {7, 2});
  CHECK(out.text == "will it be raining in the next 7 days 7 days.");
  CHECK(invert_trace(out.trace, out.text) == src);
  REQUIRE(out.spans.size() == 1);
  CHECK(has_kind(tag_disfluencies(out.text, lex()), DisfluencyType::repetition));

  Rng rng(1);
  CHECK(inject_repetition("stop", rng).text == "stop stop");
  CHECK_THROWS_AS(inject_repetition("", rng), ArgumentError);
  CHECK_THROWS_AS(inject_repetition(" ?! ", rng), ArgumentError);
}

TEST_CASE("replacement fixture") {
  const std::string src = "show me the closest location where i can get chinese food.";
  ReplacementChoice c;
  c.piece = 6;
  c.substitute = "the nearest restaurant";
  c.cue = "no sorry";
  c.retrace = 1;
  const auto out = apply_replacement(src, c);
  CHECK(out.text == "show me the closest location where the nearest restaurant no sorry where i can get chinese food.");
  CHECK(invert_trace(out.trace, out.text) == src);
  CHECK(has_kind(tag_disfluencies(out.text, lex()), DisfluencyType::correction));

  const auto flipped = apply_replacement(src, c, CueOrder::cue_then_substitute);
  CHECK(flipped.text == "show me the closest location where no sorry the nearest restaurant where i can get chinese food.");

  Rng rng(3);
  CHECK_THROWS_AS(inject_replacement("zebra zebra.", lex(), rng), NotApplicableError);
}

TEST_CASE("restart fixture") {
  const std::string s1 = "Set a reminder that I have a lab appointment with my aunt next Wednesday at 1pm.";
  const std::string s2 = "Check to see if it will be windy in brentwood the next few days.";
  const auto out = apply_restart(s1, s2, {5});
  CHECK(out.text == "Set a reminder that I Check to see if it will be windy in brentwood the next few days.");
  CHECK(invert_trace(out.trace, out.text) == s1);

  Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    CHECK(inject_restart("go home", "turn around.", rng).text == "go turn around.");
  }
  CHECK_THROWS_AS(inject_restart("", "x", rng), ArgumentError);
  CHECK_THROWS_AS(inject_restart("go home", "", rng), ArgumentError);
}

TEST_CASE("seeded injections invert and align with the tagger") {
  const std::vector<std::string> texts = {
      "show me the closest location where i can get chinese food.",
      "Find the fastest route to the station, please.",
      "Is it going to be cold and windy tonight?",
      "Check  the tire pressure\tbefore we leave  ",
      "Play “road trip” songs… loudly!",
  };
  for (int trial = 0; trial < 300; ++trial) {
    Rng rng(static_cast<std::uint64_t>(trial));
    const auto& t = texts[static_cast<std::size_t>(trial) % texts.size()];
    const auto rep = inject_repetition(t, rng);
    CHECK(invert_trace(rep.trace, rep.text) == t);
    CHECK(apply_trace(rep.trace) == rep.text);
    CHECK(has_kind(tag_disfluencies(rep.text, lex()), DisfluencyType::repetition));
    const auto rst = inject_restart(t, texts[(static_cast<std::size_t>(trial) + 1) % texts.size()], rng);
    CHECK(invert_trace(rst.trace, rst.text) == t);
    try {
      const auto rpl = inject_replacement(t, lex(), rng);
      CHECK(invert_trace(rpl.trace, rpl.text) == t);
    } catch (const NotApplicableError&) {
    }
  }
}

TEST_CASE("trace JSON round trip and mismatch detection") {
  const auto out = apply_repetition("will it rain", {1, 2});
  CHECK(trace_from_json(to_json(out.trace)) == out.trace);
  CHECK_THROWS_AS(invert_trace(out.trace, "something else entirely"), ValidationError);
}

namespace {

Corpus driver_corpus(std::size_t n) {
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    auto d = fixtures::make_dialog("d" + std::to_string(i), kAllDomains[i % 7], 6);
    d.turns[0].text = "Find the closest restaurant near the station.";
    d.turns[2].text = "Is it going to be windy on the road tomorrow?";
    d.turns[4].text = "Thanks, that is all.";
    c.dialogs.push_back(d);
  }
  return c;
}

std::string dump(const Corpus& c) {
  std::ostringstream os;
  write_corpus(c, os);
  return os.str();
}

}  // namespace

TEST_CASE("corpus injection") {
  const auto base = driver_corpus(100);

  SUBCASE("rate zero leaves the corpus alone") {
    InjectionPlan plan;
    plan.rate = 0.0;
    const auto r = inject_corpus(base, plan, lex(), 1);
    CHECK(r.modified == 0);
    CHECK(r.corpus.dialogs == base.dialogs);
  }
  SUBCASE("rate one with repetition only touches every driver turn and no car turn") {
    InjectionPlan plan;
    plan.rate = 1.0;
    plan.weights = {1, 0, 0};
    const auto r = inject_corpus(base, plan, lex(), 5);
    CHECK(r.modified == 300);
    for (std::size_t i = 0; i < base.dialogs.size(); ++i) {
      for (std::size_t t = 0; t < 6; ++t) {
        const bool changed = r.corpus.dialogs[i].turns[t].text != base.dialogs[i].turns[t].text;
        CHECK(changed == (t % 2 == 0));
      }
    }
  }
  SUBCASE("mixed injection inverts byte-identically and is deterministic") {
    InjectionPlan plan;
    plan.rate = 0.7;
    const auto a = inject_corpus(base, plan, lex(), 42);
    const auto b = inject_corpus(base, plan, lex(), 42);
    CHECK(dump(a.corpus) == dump(b.corpus));
    CHECK(a.corpus.provenance.contains("edit_traces"));
    CHECK(dump(invert_corpus(a.corpus)) == dump(base));
    for (const auto& d : a.corpus.dialogs) CHECK(validate_dialog(d).ok());
    CHECK_THROWS_AS(inject_corpus(a.corpus, plan, lex(), 1), ArgumentError);
  }
  SUBCASE("bad plans") {
    InjectionPlan plan;
    plan.rate = 1.5;
    CHECK_THROWS_AS(inject_corpus(base, plan, lex(), 1), ArgumentError);
    CHECK_THROWS_AS(parse_injection_op("shuffle"), ArgumentError);
  }
}

TEST_CASE("tag_corpus tags driver turns only") {
  auto c = driver_corpus(2);
  c.dialogs[0].turns[0].text = "Can you, um, find a station?";
  c.dialogs[0].turns[1].text = "Sure, um, one moment.";
  tag_corpus(c, lex());
  CHECK(c.dialogs[0].turns[0].disfluency_spans.size() == 1);
  CHECK(c.dialogs[0].turns[1].disfluency_spans.empty());
}
