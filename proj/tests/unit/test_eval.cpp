#include <cmath>
#include <fstream>
#include <sstream>

#include "../fixtures.hpp"
#include "disco/common/paths.hpp"
#include "disco/eval/eval.hpp"
#include "doctest.h"
#include "disco/errors.hpp"

using namespace disco;
using namespace disco::eval;

namespace {

RatingRecord likert(const std::string& ev, const std::string& item, const std::string& metric, int v) {
  RatingRecord r;
  r.evaluator_id = ev;
  r.item_id = item;
  r.metric_name = metric;
  r.likert = v;
  return r;
}

RatingRecord choice(const std::string& ev, const std::string& item, const std::string& metric, Choice c) {
  RatingRecord r;
  r.evaluator_id = ev;
  r.item_id = item;
  r.metric_name = metric;
  r.choice = c;
  return r;
}

void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream(p) << body;
}

}  // namespace

TEST_CASE("metric registry and metric set file agree") {
  CHECK(metric_names(EvalMode::pairwise).size() == 5);
  CHECK(is_registered_metric(EvalMode::intrinsic, "coherence"));
  CHECK_FALSE(is_registered_metric(EvalMode::intrinsic, "overall"));
  const auto req = required_metrics(EvalMode::intrinsic);
  CHECK(std::find(req.begin(), req.end(), "disfluency_realism") == req.end());
  const auto sets = load_metric_sets(default_data_dir() / "metric_sets.json");
  CHECK(sets["intrinsic"][0]["anchors"].contains("1"));
  CHECK(parse_eval_mode("disfluency_integration") == EvalMode::disfluency_integration);
  CHECK_THROWS_AS(parse_eval_mode("vibes"), ArgumentError);
}

TEST_CASE("rating records") {
  auto r = likert("e1", "d1", "naturalness", 4);
  r.session_id = "s";
  r.timestamp = "2024-01-01T00:00:00Z";
  CHECK(rating_from_json(to_json(r)) == r);
  const auto c = choice("e1", "pair-0001", "overall", Choice::B);
  CHECK(rating_from_json(to_json(c)) == c);
  CHECK(rating_from_json(Json{{"evaluator_id", "e"}, {"dialog_id", "d"}, {"metric_name", "m"}, {"value", 2}}).item_id == "d");
  CHECK_THROWS_AS(rating_from_json(Json{{"evaluator_id", "e"}, {"item_id", "d"}, {"metric_name", "m"}, {"value", 2.5}}),
                  ValidationError);

  CHECK_NOTHROW(validate_rating(r, EvalMode::intrinsic));
  CHECK_THROWS_AS(validate_rating(likert("e", "d", "naturalness", 6), EvalMode::intrinsic), ValidationError);
  CHECK_THROWS_AS(validate_rating(likert("e", "d", "naturalness", 0), EvalMode::intrinsic), ValidationError);
  CHECK_THROWS_AS(validate_rating(likert("e", "d", "charm", 3), EvalMode::intrinsic), ValidationError);
  CHECK_THROWS_AS(validate_rating(likert("e", "d", "overall", 3), EvalMode::pairwise), ValidationError);
  CHECK_NOTHROW(validate_rating(c, EvalMode::pairwise));
}

TEST_CASE("rating log with an interrupted final line") {
  std::stringstream ok;
  ok << to_json(likert("e", "d", "naturalness", 3)).dump() << "\n" << R"({"evaluator_id":"e","item)";
  CHECK_THROWS_AS(read_ratings(ok), ParseError);
  ok.clear();
  ok.seekg(0);
  CHECK(read_ratings(ok, true).size() == 1);

  std::stringstream mid;
  mid << "garbage\n" << to_json(likert("e", "d", "naturalness", 3)).dump() << "\n";
  CHECK_THROWS_AS(read_ratings(mid, true), ParseError);
}

TEST_CASE("Likert aggregation matches hand-computed fixtures") {
  for (const auto& f : fixtures::likert_fixtures()) {
    std::vector<RatingRecord> recs;
    for (std::size_t i = 0; i < f.values.size(); ++i) recs.push_back(likert("e" + std::to_string(i), "d", "naturalness", f.values[i]));
    const auto agg = aggregate_likert(recs);
    const auto& s = agg.at("naturalness");
    const double hw = 1.96 * std::sqrt(f.variance) / std::sqrt(static_cast<double>(f.values.size()));
    CHECK(std::abs(s.mean - f.mean) < 1e-9);
    CHECK(std::abs(s.half_width - hw) < 1e-9);
    CHECK(s.render() == f.rendered);
  }
  std::vector<RatingRecord> one = {likert("e", "d", "coherence", 3)};
  CHECK_THROWS_AS(aggregate_likert(one), InsufficientDataError);
  const auto partial = aggregate_likert_partial(one);
  CHECK(partial.metrics.empty());
  CHECK(partial.insufficient == std::vector<std::string>{"coherence"});
  AggregationParams bad;
  bad.ci_z = 0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("pairwise counts, majority and unblinding") {
  std::vector<RatingRecord> recs = {
      choice("e1", "p1", "overall", Choice::A), choice("e2", "p1", "overall", Choice::A),
      choice("e1", "p2", "overall", Choice::B), choice("e2", "p2", "overall", Choice::A),
      choice("e1", "p1", "engagement", Choice::B),
  };
  const auto counts = aggregate_pairwise(recs);
  CHECK(counts.at("overall") == PairwiseCounts{3, 1});
  CHECK(counts.at("overall").total() + counts.at("engagement").total() == recs.size());
  const auto maj = pairwise_majority(recs);
  CHECK(maj.at("overall") == MajorityCounts{1, 0, 1});

  const std::vector<BlindPair> pairs = {{"p1", {"ours", "d1"}, {"kvret", "k1"}}, {"p2", {"kvret", "k2"}, {"ours", "d2"}}};
  const auto u = unblind_pairwise(recs, pairs);
  CHECK(u.at("overall").at("ours") == 3);
  CHECK(u.at("overall").at("kvret") == 1);
  std::vector<RatingRecord> stray = {choice("e", "p9", "overall", Choice::A)};
  CHECK_THROWS_AS(unblind_pairwise(stray, pairs), IntegrityError);
}

TEST_CASE("stratified DiscoDrive sample") {
  const auto corpus = fixtures::stratified_corpus(6);
  const auto s = sample_discodrive(corpus, 1);
  REQUIRE(s.size() == 140);
  std::map<DomainTag, int> per_domain;
  std::map<std::pair<DomainTag, std::size_t>, int> per_stratum;
  std::set<std::string> ids;
  for (const auto& d : s) {
    ++per_domain[d.domain];
    ++per_stratum[{d.domain, d.num_turns}];
    ids.insert(d.id);
  }
  CHECK(ids.size() == 140);
  for (const auto& [d, n] : per_domain) CHECK(n == 20);
  for (const auto& [k, n] : per_stratum) CHECK(n == 4);
  CHECK(sample_discodrive(corpus, 1) == s);
  CHECK(sample_discodrive(corpus, 2) != s);

  auto thin = fixtures::stratified_corpus(4);
  thin.erase(std::remove_if(thin.begin(), thin.end(), [](const Dialog& d) { return d.id == "weather-10-003"; }), thin.end());
  try {
    sample_discodrive(thin, 1);
    FAIL("expected UnderstockedError");
  } catch (const UnderstockedError& e) {
    CHECK(e.stratum() == "weather, 10");
    CHECK(e.available() == 3);
  }
}

TEST_CASE("external sample") {
  ExternalSplits sp;
  for (int i = 0; i < 150; ++i) sp.train.push_back(fixtures::make_dialog("tr" + std::to_string(i), DomainTag::weather, 4));
  for (int i = 0; i < 30; ++i) sp.valid.push_back(fixtures::make_dialog("va" + std::to_string(i), DomainTag::weather, 4));
  for (int i = 0; i < 25; ++i) sp.test.push_back(fixtures::make_dialog("te" + std::to_string(i), DomainTag::weather, 4));
  const auto s = sample_external(sp, {}, 3);
  REQUIRE(s.size() == 140);
  CHECK(std::count_if(s.begin(), s.end(), [](const Dialog& d) { return d.id.rfind("tr", 0) == 0; }) == 100);
  CHECK(std::count_if(s.begin(), s.end(), [](const Dialog& d) { return d.id.rfind("va", 0) == 0; }) == 20);
  CHECK(std::count_if(s.begin(), s.end(), [](const Dialog& d) { return d.id.rfind("te", 0) == 0; }) == 20);
  sp.valid.resize(19);
  try {
    sample_external(sp, {}, 3);
    FAIL("expected UnderstockedError");
  } catch (const UnderstockedError& e) {
    CHECK(e.stratum() == "valid");
  }
}

TEST_CASE("blind pairing") {
  std::vector<Dialog> a, b;
  for (int i = 0; i < 40; ++i) {
    a.push_back(fixtures::make_dialog("a" + std::to_string(i), DomainTag::weather, 6));
    b.push_back(fixtures::make_dialog("b" + std::to_string(i), DomainTag::weather, 4));
  }
  const auto pairs = pair_for_comparison(a, b, 5, "ours", "kvret");
  REQUIRE(pairs.size() == 40);
  CHECK(pairs[0].pair_id == "pair-0001");
  int ours_on_a = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    CHECK(p.a.source != p.b.source);
    const auto& ours = p.a.source == "ours" ? p.a : p.b;
    const auto& theirs = p.a.source == "ours" ? p.b : p.a;
    CHECK(ours.dialog_id == a[i].id);
    CHECK(theirs.dialog_id == b[i].id);
    ours_on_a += p.a.source == "ours";
    CHECK(pair_from_json(to_json(p)) == p);
  }
  CHECK(ours_on_a > 5);
  CHECK(ours_on_a < 35);
  CHECK_THROWS_AS(pair_for_comparison(a, std::span<const Dialog>(b.data(), 3), 5), ArgumentError);
  CHECK_THROWS_AS(pair_for_comparison(a, b, 5, "x", "x"), ArgumentError);
}

TEST_CASE("in-car subset filter and fractional split") {
  std::vector<Dialog> pool;
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> svc = {i % 2 ? "navigation" : "hotel"};
    if (i % 3 == 0) svc.push_back("weather");
    pool.push_back(fixtures::labeled("q" + std::to_string(i), svc));
  }
  for (int i = 0; i < 50; ++i) pool.push_back(fixtures::labeled("x" + std::to_string(i), {"hotel", "train"}));
  for (int i = 0; i < 5; ++i) pool.push_back(fixtures::make_dialog("u" + std::to_string(i), DomainTag::weather, 4));

  const auto r = filter_incar_subset(pool, default_service_whitelist(), 220, 8);
  CHECK(r.qualifying == 300);
  CHECK(r.excluded == 50);
  CHECK(r.unlabeled == 5);
  CHECK(r.dialogs.size() == 220);
  const auto wl = default_service_whitelist();
  for (const auto& d : r.dialogs) {
    for (const auto& s : service_labels(d)) CHECK(wl.count(s) == 1);
  }
  CHECK(filter_incar_subset(pool, wl, 220, 8, false).qualifying == 350);

  std::vector<Dialog> big;
  for (int i = 0; i < 2424; ++i) big.push_back(fixtures::make_dialog("m" + std::to_string(i), DomainTag::weather, 4));
  const auto part = split_fraction(big, 0.1, 4);
  CHECK(part.size() == 242);
  for (std::size_t i = 1; i < part.size(); ++i) CHECK(std::stoi(part[i - 1].id.substr(1)) < std::stoi(part[i].id.substr(1)));
  CHECK(split_fraction(big, 1.0, 4).size() == 2424);
  CHECK_THROWS_AS(split_fraction(big, 0.0, 4), ArgumentError);
  CHECK_THROWS_AS(split_fraction(big, 1.5, 4), ArgumentError);
}

TEST_CASE("external dataset adapters") {
  CHECK(normalize_service("Hotels_1") == "hotel");
  CHECK(normalize_service("Restaurants_2") == "restaurant");
  CHECK(normalize_service("Travel_1") == "attraction");
  CHECK(normalize_service("taxi") == "taxi");
  CHECK(domain_for_services({"weather"}) == DomainTag::weather);
  CHECK(domain_for_services({"schedule"}) == DomainTag::car_functions);

  const auto dir = fixtures::temp_dir("adapters");
  write_file(dir / "kvret.json", R"([
    {"dialogue": [{"turn": "driver", "data": {"utterance": "where is the nearest gas station"}},
                  {"turn": "assistant", "data": {"utterance": "Valero is 4 miles away."}}],
     "scenario": {"task": {"intent": "navigate"}, "uuid": "abc"}},
    {"dialogue": [{"turn": "driver", "data": {"utterance": "will it rain"}},
                  {"turn": "assistant", "data": {"utterance": "No rain this week."}}],
     "scenario": {"task": {"intent": "weather"}}}
  ])");
  const auto kv = read_kvret(dir / "kvret.json", "test");
  REQUIRE(kv.dialogs.size() == 2);
  CHECK(kv.dialogs[0].id == "kvret-abc");
  CHECK(service_labels(kv.dialogs[0]) == std::vector<std::string>{"navigation"});
  CHECK(kv.dialogs[0].domain == DomainTag::navigation);
  CHECK(kv.dialogs[1].domain == DomainTag::weather);
  CHECK(kv.dialogs[0].turns[0].speaker == Speaker::driver);
  CHECK(validate_dialog(kv.dialogs[0], ValidationPolicy{false}).ok());

  std::filesystem::create_directories(dir / "sgd" / "train");
  write_file(dir / "sgd" / "train" / "dialogues_001.json", R"([
    {"dialogue_id": "1_00000", "services": ["Hotels_1", "Restaurants_2"],
     "turns": [{"speaker": "USER", "utterance": "Find a hotel."}, {"speaker": "SYSTEM", "utterance": "Where?"}]}
  ])");
  write_file(dir / "sgd" / "train" / "schema.json", R"([{"service_name": "Hotels_1"}])");
  const auto sgd = read_sgd(dir / "sgd", "train");
  REQUIRE(sgd.dialogs.size() == 1);
  CHECK(service_labels(sgd.dialogs[0]) == std::vector<std::string>{"hotel", "restaurant"});
  CHECK(sgd.dialogs[0].turns.size() == 2);

  write_file(dir / "mwoz.json", R"([{"dialogue_id": "PMUL0001.json", "services": ["taxi"],
    "turns": [{"speaker": "USER", "utterance": "Book a taxi."}, {"speaker": "SYSTEM", "utterance": "Done."}]}])");
  const auto mw = read_multiwoz(dir / "mwoz.json");
  REQUIRE(mw.dialogs.size() == 1);
  CHECK(mw.dialogs[0].id.find("PMUL0001") != std::string::npos);
  CHECK(mw.dialogs[0].id.find(".json") == std::string::npos);
  CHECK(filter_incar_subset(mw.dialogs, default_service_whitelist(), 10, 1).dialogs.empty());

  write_file(dir / "broken.json", "{");
  CHECK_THROWS_AS(read_kvret(dir / "broken.json"), ParseError);
  std::filesystem::remove_all(dir);
}
