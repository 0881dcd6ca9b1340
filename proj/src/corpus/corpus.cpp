#include "disco/corpus/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "disco/common/text.hpp"
#include "disco/errors.hpp"

namespace disco {
namespace {

constexpr std::array<std::string_view, 7> kDomainNames = {
    "navigation",    "maintenance_diagnostics", "safety_emergency", "entertainment",
    "local_attractions", "car_functions",       "weather",
};

constexpr std::array<std::string_view, 7> kDomainDisplay = {
    "Navigation",
    "Car Maintenance and Diagnostics",
    "Safety and Emergency Assistance",
    "Entertainment",
    "Local and On-Route Attractions and Activities",
    "Car Functions",
    "Weather",
};

constexpr std::array<std::string_view, 7> kDisfluencyNames = {
    "repetition", "false_start", "filler", "pause", "correction", "replacement", "restart",
};

Json take_extra(const Json& j, std::initializer_list<std::string_view> known) {
  Json extra = Json::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool is_known = false;
    for (auto k : known) {
      if (it.key() == k) {
        is_known = true;
        break;
      }
    }
    if (!is_known) extra[it.key()] = it.value();
  }
  return extra;
}

void merge_extra(Json& out, const Json& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it) {
    if (!out.contains(it.key())) out[it.key()] = it.value();
  }
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object()) throw ParseError("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field \"") + key + "\"");
  return *it;
}

std::string require_string(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_string()) throw ParseError(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::size_t require_index(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ParseError(std::string("field \"") + key + "\" must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

std::string_view to_string(DomainTag d) noexcept { return kDomainNames[static_cast<int>(d)]; }

DomainTag parse_domain(std::string_view s) {
  for (std::size_t i = 0; i < kDomainNames.size(); ++i) {
    if (kDomainNames[i] == s) return static_cast<DomainTag>(i);
  }
  throw ParseError("unknown domain \"" + std::string(s) + "\"");
}

std::string_view display_name(DomainTag d) noexcept { return kDomainDisplay[static_cast<int>(d)]; }

std::string_view to_string(Speaker s) noexcept {
  return s == Speaker::driver ? "driver" : "car_ai";
}

Speaker parse_speaker(std::string_view s) {
  if (s == "driver") return Speaker::driver;
  if (s == "car_ai") return Speaker::car_ai;
  throw ParseError("unknown speaker \"" + std::string(s) + "\"");
}

std::string_view to_string(DisfluencyType t) noexcept {
  return kDisfluencyNames[static_cast<int>(t)];
}

DisfluencyType parse_disfluency_type(std::string_view s) {
  for (std::size_t i = 0; i < kDisfluencyNames.size(); ++i) {
    if (kDisfluencyNames[i] == s) return static_cast<DisfluencyType>(i);
  }
  throw ParseError("unknown disfluency type \"" + std::string(s) + "\"");
}

std::string_view to_string(SpanSource s) noexcept {
  return s == SpanSource::tagged ? "tagged" : "injected";
}

SpanSource parse_span_source(std::string_view s) {
  if (s == "tagged") return SpanSource::tagged;
  if (s == "injected") return SpanSource::injected;
  throw ParseError("unknown span source \"" + std::string(s) + "\"");
}

Json to_json(const DisfluencySpan& s) {
  return Json{{"kind", to_string(s.kind)},
              {"start", s.start},
              {"end", s.end},
              {"source", to_string(s.source)}};
}

Json to_json(const Turn& t) {
  Json spans = Json::array();
  for (const auto& s : t.disfluency_spans) spans.push_back(to_json(s));
  Json j{{"turn_index", t.turn_index},
         {"speaker", to_string(t.speaker)},
         {"text", t.text},
         {"disfluency_spans", std::move(spans)}};
  merge_extra(j, t.extra);
  return j;
}

Json to_json(const Scenario& s) {
  Json j{{"id", s.id}, {"domain", to_string(s.domain)}, {"text", s.text}};
  merge_extra(j, s.extra);
  return j;
}

Json to_json(const Dialog& d) {
  Json turns = Json::array();
  for (const auto& t : d.turns) turns.push_back(to_json(t));
  Json j{{"id", d.id},
         {"domain", to_string(d.domain)},
         {"scenario", to_json(d.scenario)},
         {"num_turns", d.num_turns},
         {"turns", std::move(turns)}};
  merge_extra(j, d.extra);
  return j;
}

DisfluencySpan span_from_json(const Json& j) {
  DisfluencySpan s;
  s.kind = parse_disfluency_type(require_string(j, "kind"));
  s.start = require_index(j, "start");
  s.end = require_index(j, "end");
  s.source = j.contains("source") ? parse_span_source(require_string(j, "source"))
                                  : SpanSource::tagged;
  return s;
}

Turn turn_from_json(const Json& j) {
  Turn t;
  t.speaker = parse_speaker(require_string(j, "speaker"));
  t.text = require_string(j, "text");
  t.turn_index = require_index(j, "turn_index");
  if (j.contains("disfluency_spans")) {
    const Json& spans = j.at("disfluency_spans");
    if (!spans.is_array()) throw ParseError("\"disfluency_spans\" must be an array");
    for (const auto& s : spans) t.disfluency_spans.push_back(span_from_json(s));
  }
  t.extra = take_extra(j, {"speaker", "text", "turn_index", "disfluency_spans"});
  return t;
}

Scenario scenario_from_json(const Json& j) {
  Scenario s;
  s.id = require_string(j, "id");
  s.domain = parse_domain(require_string(j, "domain"));
  s.text = require_string(j, "text");
  s.extra = take_extra(j, {"id", "domain", "text"});
  return s;
}

Dialog dialog_from_json(const Json& j) {
  Dialog d;
  d.id = require_string(j, "id");
  d.domain = parse_domain(require_string(j, "domain"));
  d.scenario = scenario_from_json(require(j, "scenario"));
  const Json& turns = require(j, "turns");
  if (!turns.is_array()) throw ParseError("\"turns\" must be an array");
  for (const auto& t : turns) d.turns.push_back(turn_from_json(t));
  d.num_turns = j.contains("num_turns") ? require_index(j, "num_turns") : d.turns.size();
  d.extra = take_extra(j, {"id", "domain", "scenario", "num_turns", "turns"});
  return d;
}

void check_unique_ids(const Corpus& corpus) {
  std::unordered_set<std::string> seen;
  for (const auto& d : corpus.dialogs) {
    if (!seen.insert(d.id).second) {
      throw IntegrityError("duplicate dialog id \"" + d.id + "\"");
    }
  }
}

Corpus read_corpus(std::istream& in) {
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (j.is_object() && j.size() == 1 && j.contains("corpus")) {
      const Json& header = j["corpus"];
      if (header.contains("provenance")) corpus.provenance = header["provenance"];
      continue;
    }
    Dialog d;
    try {
      d = dialog_from_json(j);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!seen.insert(d.id).second) {
      throw IntegrityError("duplicate dialog id \"" + d.id + "\" at line " +
                           std::to_string(line_no));
    }
    corpus.dialogs.push_back(std::move(d));
  }
  return corpus;
}

Corpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file " + path.string());
  return read_corpus(in);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  check_unique_ids(corpus);
  out << Json{{"corpus", Json{{"provenance", corpus.provenance}}}}.dump() << '\n';
  for (const auto& d : corpus.dialogs) out << to_json(d).dump() << '\n';
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write corpus file " + path.string());
  write_corpus(corpus, out);
}

std::vector<Scenario> read_scenarios(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::vector<Scenario> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    try {
      out.push_back(scenario_from_json(Json::parse(line)));
    } catch (const Json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

void write_scenarios(const std::vector<Scenario>& scenarios, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write scenario file " + path.string());
  for (const auto& s : scenarios) out << to_json(s).dump() << '\n';
}

}  // namespace disco
