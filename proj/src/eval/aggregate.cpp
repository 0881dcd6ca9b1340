#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "disco/common/text.hpp"
#include "disco/eval/eval.hpp"

namespace disco::eval {
namespace {

constexpr std::array<std::string_view, 3> kModeNames = {"intrinsic", "pairwise", "disfluency_integration"};

bool is_optional_metric(EvalMode mode, std::string_view metric) {
  return mode == EvalMode::intrinsic && metric == "disfluency_realism";
}

}  // namespace

std::string_view to_string(EvalMode m) noexcept { return kModeNames[static_cast<int>(m)]; }

EvalMode parse_eval_mode(std::string_view s) {
  for (std::size_t i = 0; i < kModeNames.size(); ++i) {
    if (kModeNames[i] == s) return static_cast<EvalMode>(i);
  }
  throw ArgumentError("unknown evaluation mode \"" + std::string(s) + "\"");
}

const std::vector<std::string>& metric_names(EvalMode mode) {
  static const std::vector<std::string> intrinsic = {"naturalness", "coherence", "engagement",
                                                     "consistency", "on_topic",  "disfluency_realism"};
  static const std::vector<std::string> pairwise = {"overall", "naturalness", "task_effectiveness",
                                                    "human_likeness", "engagement"};
  static const std::vector<std::string> integration = {"naturalness", "appropriateness", "clarity"};
  switch (mode) {
    case EvalMode::intrinsic:
      return intrinsic;
    case EvalMode::pairwise:
      return pairwise;
    case EvalMode::disfluency_integration:
      return integration;
  }
  return intrinsic;
}

bool is_registered_metric(EvalMode mode, std::string_view metric) {
  const auto& names = metric_names(mode);
  return std::find(names.begin(), names.end(), metric) != names.end();
}

std::vector<std::string> required_metrics(EvalMode mode) {
  std::vector<std::string> out;
  for (const auto& m : metric_names(mode)) {
    if (!is_optional_metric(mode, m)) out.push_back(m);
  }
  return out;
}

Json load_metric_sets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open metric sets " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  for (const auto mode : {EvalMode::intrinsic, EvalMode::pairwise, EvalMode::disfluency_integration}) {
    const std::string key(to_string(mode));
    if (!j.contains(key) || !j[key].is_array()) throw ValidationError("metric sets lack mode " + key);
    std::vector<std::string> names;
    for (const auto& m : j[key]) names.push_back(m.at("name").get<std::string>());
    if (names != metric_names(mode)) {
      throw ValidationError("metric set for " + key + " does not match the registered metrics");
    }
    for (auto& m : j[key]) m["optional"] = is_optional_metric(mode, m["name"].get<std::string>());
  }
  return j;
}

std::string_view to_string(Choice c) noexcept { return c == Choice::A ? "A" : "B"; }

Choice parse_choice(std::string_view s) {
  if (s == "A" || s == "a") return Choice::A;
  if (s == "B" || s == "b") return Choice::B;
  throw ValidationError("pairwise choice must be A or B, got \"" + std::string(s) + "\"");
}

Json to_json(const RatingRecord& r) {
  Json j;
  if (!r.session_id.empty()) j["session_id"] = r.session_id;
  j["evaluator_id"] = r.evaluator_id;
  j["item_id"] = r.item_id;
  j["metric_name"] = r.metric_name;
  if (r.likert) {
    j["value"] = *r.likert;
  } else if (r.choice) {
    j["value"] = to_string(*r.choice);
  } else {
    j["value"] = nullptr;
  }
  j["timestamp"] = r.timestamp;
  return j;
}

RatingRecord rating_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("rating record must be a JSON object");
  RatingRecord r;
  try {
    r.session_id = j.value("session_id", std::string());
    r.evaluator_id = j.at("evaluator_id").get<std::string>();
    if (j.contains("item_id")) {
      r.item_id = j.at("item_id").get<std::string>();
    } else if (j.contains("dialog_id")) {
      r.item_id = j.at("dialog_id").get<std::string>();
    } else {
      r.item_id = j.at("pair_id").get<std::string>();
    }
    r.metric_name = j.at("metric_name").get<std::string>();
    r.timestamp = j.value("timestamp", std::string());
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("rating record: ") + e.what());
  }
  const Json& v = j.contains("value") ? j.at("value") : Json();
  if (v.is_number_integer()) {
    r.likert = v.get<int>();
  } else if (v.is_number()) {
    throw ValidationError("Likert value must be an integer");
  } else if (v.is_string()) {
    r.choice = parse_choice(v.get<std::string>());
  } else {
    throw ValidationError("rating record needs a value");
  }
  return r;
}

std::vector<RatingRecord> read_ratings(std::istream& in, bool tolerate_partial_tail) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  while (!lines.empty() && text::is_blank(lines.back())) lines.pop_back();

  std::vector<RatingRecord> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::is_blank(lines[i])) continue;
    try {
      out.push_back(rating_from_json(Json::parse(lines[i])));
    } catch (const std::exception& e) {
      if (tolerate_partial_tail && i + 1 == lines.size()) break;
      throw ParseError(std::string("bad rating record: ") + e.what(), i + 1);
    }
  }
  return out;
}

std::vector<RatingRecord> read_ratings(const std::filesystem::path& path, bool tolerate_partial_tail) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open rating log " + path.string());
  return read_ratings(in, tolerate_partial_tail);
}

void write_ratings(std::span<const RatingRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw NotFoundError("cannot write " + path.string());
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

void validate_rating(const RatingRecord& r, EvalMode mode) {
  if (r.evaluator_id.empty()) throw ValidationError("rating has no evaluator id");
  if (r.item_id.empty()) throw ValidationError("rating has no item id");
  if (!is_registered_metric(mode, r.metric_name)) {
    throw ValidationError("metric \"" + r.metric_name + "\" is not registered for " + std::string(to_string(mode)) +
                          " evaluation");
  }
  if (mode == EvalMode::pairwise) {
    if (!r.choice) throw ValidationError("pairwise rating needs a choice of A or B");
  } else {
    if (!r.likert) throw ValidationError("Likert rating needs an integer value");
    if (*r.likert < 1 || *r.likert > 5) {
      throw ValidationError("Likert value " + std::to_string(*r.likert) + " is outside 1..5");
    }
  }
}

void AggregationParams::validate() const {
  if (!(ci_z > 0.0)) throw ArgumentError("ci_z must be positive");
}

std::string render_likert(double mean, double half_width) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f (\xC2\xB1%.2f)", mean, half_width);
  return buf;
}

std::string LikertSummary::render() const { return render_likert(mean, half_width); }

LikertSummary summarize_likert(std::span<const double> values, const AggregationParams& params,
                               std::string_view metric) {
  params.validate();
  if (values.size() < 2) {
    throw InsufficientDataError("metric " + std::string(metric) + " has " + std::to_string(values.size()) +
                                " value(s); at least 2 are needed");
  }
  LikertSummary s;
  s.n = values.size();
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (const double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  s.half_width = params.ci_z * s.sd / std::sqrt(static_cast<double>(s.n));
  return s;
}

PartialLikert aggregate_likert_partial(std::span<const RatingRecord> records, const AggregationParams& params) {
  params.validate();
  std::map<std::string, std::vector<double>> values;
  for (const auto& r : records) {
    if (r.likert) values[r.metric_name].push_back(static_cast<double>(*r.likert));
  }
  PartialLikert out;
  for (const auto& [metric, v] : values) {
    if (v.size() < 2) {
      out.insufficient.push_back(metric);
    } else {
      out.metrics[metric] = summarize_likert(v, params, metric);
    }
  }
  return out;
}

std::map<std::string, LikertSummary> aggregate_likert(std::span<const RatingRecord> records,
                                                      const AggregationParams& params) {
  auto partial = aggregate_likert_partial(records, params);
  if (!partial.insufficient.empty()) {
    throw InsufficientDataError("metric " + partial.insufficient.front() + " has fewer than 2 values");
  }
  return std::move(partial.metrics);
}

std::map<std::string, PairwiseCounts> aggregate_pairwise(std::span<const RatingRecord> records) {
  std::map<std::string, PairwiseCounts> out;
  for (const auto& r : records) {
    if (!r.choice) continue;
    auto& c = out[r.metric_name];
    (*r.choice == Choice::A ? c.a : c.b) += 1;
  }
  return out;
}

std::map<std::string, MajorityCounts> pairwise_majority(std::span<const RatingRecord> records) {
  std::map<std::string, std::map<std::string, PairwiseCounts>> per_item;
  for (const auto& r : records) {
    if (!r.choice) continue;
    auto& c = per_item[r.metric_name][r.item_id];
    (*r.choice == Choice::A ? c.a : c.b) += 1;
  }
  std::map<std::string, MajorityCounts> out;
  for (const auto& [metric, items] : per_item) {
    auto& m = out[metric];
    for (const auto& [item, c] : items) {
      if (c.a > c.b) {
        ++m.a;
      } else if (c.b > c.a) {
        ++m.b;
      } else {
        ++m.ties;
      }
    }
  }
  return out;
}

std::map<std::string, std::map<std::string, std::size_t>> unblind_pairwise(std::span<const RatingRecord> records,
                                                                           std::span<const BlindPair> pairs) {
  std::map<std::string, const BlindPair*> by_id;
  for (const auto& p : pairs) by_id[p.pair_id] = &p;
  std::map<std::string, std::map<std::string, std::size_t>> out;
  for (const auto& r : records) {
    if (!r.choice) continue;
    const auto it = by_id.find(r.item_id);
    if (it == by_id.end()) throw IntegrityError("rating names unknown pair \"" + r.item_id + "\"");
    const auto& ref = *r.choice == Choice::A ? it->second->a : it->second->b;
    auto& counts = out[r.metric_name];
    counts.try_emplace(it->second->a.source, 0);
    counts.try_emplace(it->second->b.source, 0);
    ++counts[ref.source];
  }
  return out;
}

}  // namespace disco::eval
