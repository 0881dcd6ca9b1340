#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>

#include "disco/annotation/annotation.hpp"
#include "disco/common/random.hpp"
#include "disco/common/text.hpp"

namespace disco::annotation {
namespace fs = std::filesystem;

namespace {

bool valid_session_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isalnum(c) || c == '-' || c == '_'; });
}

void write_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NotFoundError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw NotFoundError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

Json turn_payload(const Turn& t) {
  Json spans = Json::array();
  for (const auto& s : t.disfluency_spans) spans.push_back(to_json(s));
  return Json{{"speaker", to_string(t.speaker)}, {"text", t.text}, {"disfluency_spans", spans}};
}

}  // namespace

void ItemLibrary::add(const std::string& source, const Corpus& corpus) {
  auto& dialogs = sources_[source];
  for (const auto& d : corpus.dialogs) dialogs.insert_or_assign(d.id, d);
}

const Dialog* ItemLibrary::find(const std::string& source, const std::string& id) const {
  const auto s = sources_.find(source);
  if (s == sources_.end()) return nullptr;
  const auto d = s->second.find(id);
  return d == s->second.end() ? nullptr : &d->second;
}

const Dialog* ItemLibrary::find_any(const std::string& id) const {
  for (const auto& [source, dialogs] : sources_) {
    if (const auto d = dialogs.find(id); d != dialogs.end()) return &d->second;
  }
  return nullptr;
}

SessionRequest session_request_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("session request must be a JSON object");
  SessionRequest r;
  try {
    r.id = j.value("id", std::string());
    r.mode = eval::parse_eval_mode(j.at("mode").get<std::string>());
    if (j.contains("items")) r.items = j["items"].get<std::vector<std::string>>();
    if (j.contains("pairs")) {
      for (const auto& p : j["pairs"]) r.pairs.push_back(eval::pair_from_json(p));
    }
    r.evaluators = j.at("evaluators").get<std::vector<std::string>>();
    if (j.contains("seed") && !j["seed"].is_null()) r.seed = j["seed"].get<std::uint64_t>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("session request: ") + e.what());
  }
  return r;
}

std::vector<std::size_t> evaluator_order(std::size_t n, std::uint64_t seed, const std::string& evaluator) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, evaluator));
  rng.shuffle(order);
  return order;
}

Json to_json(const Session& s) {
  Json j{{"id", s.id}, {"mode", eval::to_string(s.mode)}, {"seed", s.seed}, {"evaluators", s.evaluators}};
  if (s.mode == eval::EvalMode::pairwise) {
    Json pairs = Json::array();
    for (const auto& p : s.pairs) pairs.push_back(eval::to_json(p));
    j["pairs"] = std::move(pairs);
  } else {
    j["items"] = s.items;
  }
  return j;
}

Session session_from_json(const Json& j) {
  Session s;
  try {
    s.id = j.at("id").get<std::string>();
    s.mode = eval::parse_eval_mode(j.at("mode").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    s.evaluators = j.at("evaluators").get<std::vector<std::string>>();
    if (s.mode == eval::EvalMode::pairwise) {
      for (const auto& p : j.at("pairs")) {
        s.pairs.push_back(eval::pair_from_json(p));
        s.items.push_back(s.pairs.back().pair_id);
      }
    } else {
      s.items = j.at("items").get<std::vector<std::string>>();
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("session manifest: ") + e.what());
  }
  for (const auto& e : s.evaluators) s.order[e] = evaluator_order(s.items.size(), s.seed, e);
  return s;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

AnnotationStore::AnnotationStore(fs::path dir, ItemLibrary library, Json metric_sets, Clock clock)
    : dir_(std::move(dir)), library_(std::move(library)), metric_sets_(std::move(metric_sets)), clock_(std::move(clock)) {
  fs::create_directories(dir_ / "sessions");
  replay();
}

void AnnotationStore::replay() {
  std::vector<fs::path> manifests;
  for (const auto& e : fs::directory_iterator(dir_ / "sessions")) {
    if (e.is_regular_file() && e.path().extension() == ".json") manifests.push_back(e.path());
  }
  std::sort(manifests.begin(), manifests.end());
  for (const auto& path : manifests) {
    std::ifstream in(path);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    Session s = session_from_json(j);
    const std::string id = s.id;
    sessions_[id].session = std::move(s);
  }

  const fs::path log = log_path();
  if (!fs::exists(log)) return;
  std::string content;
  {
    std::ifstream in(log, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    content = ss.str();
  }
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::size_t good = 0;
  bool repair = false;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const std::size_t end = terminated ? nl : content.size();
    const std::string_view line(content.data() + pos, end - pos);
    const bool last = !terminated || end + 1 >= content.size();
    ++line_no;
    pos = terminated ? end + 1 : end;
    if (text::is_blank(line)) {
      if (terminated) good = pos;
      continue;
    }
    eval::RatingRecord r;
    try {
      r = eval::rating_from_json(Json::parse(line));
    } catch (const std::exception& e) {
      if (!last) throw ParseError(std::string("rating log: ") + e.what(), line_no);
      repair = true;
      break;
    }
    if (!terminated) repair = true;
    good = terminated ? pos : content.size();
    const auto it = sessions_.find(r.session_id);
    if (it == sessions_.end()) throw IntegrityError("rating log names unknown session \"" + r.session_id + "\"");
    it->second.keys.emplace(r.evaluator_id, r.item_id, r.metric_name);
    it->second.ratings.push_back(std::move(r));
  }
  if (repair) {
    fs::resize_file(log, good);
    if (good > 0 && content[good - 1] != '\n') {
      std::ofstream out(log, std::ios::binary | std::ios::app);
      out << '\n';
    }
  }
}

const AnnotationStore::SessionState& AnnotationStore::state_of(const std::string& id) const {
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("no session \"" + id + "\"");
  return it->second;
}

bool AnnotationStore::item_complete(const SessionState& s, const std::string& evaluator,
                                    const std::string& item) const {
  for (const auto& m : eval::required_metrics(s.session.mode)) {
    if (!s.keys.contains({evaluator, item, m})) return false;
  }
  return true;
}

std::size_t AnnotationStore::completed_items(const SessionState& s, const std::string& evaluator) const {
  std::size_t n = 0;
  for (const auto& item : s.session.items) n += item_complete(s, evaluator, item) ? 1 : 0;
  return n;
}

Session AnnotationStore::create_session(const SessionRequest& request) {
  std::unique_lock lock(mutex_);
  Session s;
  s.mode = request.mode;
  if (request.mode == eval::EvalMode::pairwise) {
    if (!request.items.empty()) throw ArgumentError("pairwise sessions take pairs, not items");
    s.pairs = request.pairs;
    for (const auto& p : s.pairs) s.items.push_back(p.pair_id);
  } else {
    if (!request.pairs.empty()) throw ArgumentError(std::string(eval::to_string(request.mode)) + " sessions take items, not pairs");
    s.items = request.items;
  }
  if (s.items.empty()) throw ArgumentError("session manifest is empty");
  if (std::set<std::string>(s.items.begin(), s.items.end()).size() != s.items.size()) {
    throw ArgumentError("session manifest repeats an item");
  }
  if (request.evaluators.empty()) throw ArgumentError("session needs at least one evaluator");
  std::set<std::string> seen;
  for (const auto& e : request.evaluators) {
    if (text::is_blank(e)) throw ArgumentError("evaluator id is empty");
    if (!seen.insert(e).second) throw ArgumentError("duplicate evaluator id \"" + e + "\"");
  }
  s.evaluators = request.evaluators;
  for (const auto& p : s.pairs) {
    for (const auto* side : {&p.a, &p.b}) {
      if (!library_.find(side->source, side->dialog_id)) {
        throw ArgumentError("pair " + p.pair_id + " names unknown dialog " + side->source + "/" + side->dialog_id);
      }
    }
  }
  if (s.mode != eval::EvalMode::pairwise) {
    for (const auto& item : s.items) {
      if (!library_.find_any(item)) throw ArgumentError("unknown dialog \"" + item + "\"");
    }
  }

  if (request.id.empty()) {
    for (std::size_t n = sessions_.size() + 1;; ++n) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "session-%04zu", n);
      if (!sessions_.contains(buf)) {
        s.id = buf;
        break;
      }
    }
  } else {
    if (!valid_session_id(request.id)) throw ArgumentError("session id may hold only letters, digits, '-' and '_'");
    if (sessions_.contains(request.id)) throw ConflictError("session \"" + request.id + "\" already exists");
    s.id = request.id;
  }
  s.seed = request.seed.value_or(fnv1a64(s.id));
  for (const auto& e : s.evaluators) s.order[e] = evaluator_order(s.items.size(), s.seed, e);

  write_atomically(dir_ / "sessions" / (s.id + ".json"), to_json(s).dump(2) + "\n");
  sessions_[s.id].session = s;
  return s;
}

Session AnnotationStore::session(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return state_of(id).session;
}

std::vector<std::string> AnnotationStore::session_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

Json AnnotationStore::form(eval::EvalMode mode) const {
  const std::string key(eval::to_string(mode));
  if (metric_sets_.is_object() && metric_sets_.contains(key)) return Json{{"mode", key}, {"metrics", metric_sets_[key]}};
  const auto required = eval::required_metrics(mode);
  Json metrics = Json::array();
  for (const auto& m : eval::metric_names(mode)) {
    const bool optional = std::find(required.begin(), required.end(), m) == required.end();
    metrics.push_back(Json{{"name", m}, {"optional", optional}});
  }
  return Json{{"mode", key}, {"metrics", metrics}};
}

Json AnnotationStore::transcript(const Dialog& d, bool blind) const {
  Json turns = Json::array();
  for (const auto& t : d.turns) turns.push_back(turn_payload(t));
  Json j{{"num_turns", d.turns.size()}, {"turns", turns}};
  if (!blind) {
    j["dialog_id"] = d.id;
    j["domain"] = to_string(d.domain);
    j["scenario"] = d.scenario.text;
  }
  return j;
}

Json AnnotationStore::next_item(const std::string& session_id, const std::string& evaluator) const {
  std::shared_lock lock(mutex_);
  const auto& st = state_of(session_id);
  const auto& s = st.session;
  const auto order = s.order.find(evaluator);
  if (order == s.order.end()) {
    throw ValidationError("evaluator \"" + evaluator + "\" is not enrolled in session " + session_id);
  }
  const std::size_t done = completed_items(st, evaluator);
  for (std::size_t k = 0; k < order->second.size(); ++k) {
    const std::size_t idx = order->second[k];
    const auto& item = s.items[idx];
    if (item_complete(st, evaluator, item)) continue;
    Json rated = Json::array();
    for (const auto& m : eval::metric_names(s.mode)) {
      if (st.keys.contains({evaluator, item, m})) rated.push_back(m);
    }
    Json payload{{"done", false},           {"session_id", s.id}, {"evaluator_id", evaluator},
                 {"mode", eval::to_string(s.mode)}, {"item_id", item}, {"position", k},
                 {"completed", done},      {"total", s.items.size()}, {"rated_metrics", rated},
                 {"form", form(s.mode)}};
    if (s.mode == eval::EvalMode::pairwise) {
      const auto& pair = s.pairs[idx];
      const Dialog* a = library_.find(pair.a.source, pair.a.dialog_id);
      const Dialog* b = library_.find(pair.b.source, pair.b.dialog_id);
      if (!a || !b) throw NotFoundError("dialogs of pair " + pair.pair_id + " are not loaded");
      payload["A"] = transcript(*a, true);
      payload["B"] = transcript(*b, true);
    } else {
      const Dialog* d = library_.find_any(item);
      if (!d) throw NotFoundError("dialog " + item + " is not loaded");
      payload["dialog"] = transcript(*d, false);
    }
    return payload;
  }
  return Json{{"done", true}, {"session_id", s.id}, {"evaluator_id", evaluator}, {"completed", done},
              {"total", s.items.size()}};
}

std::vector<eval::RatingRecord> AnnotationStore::submit(const std::string& session_id,
                                                        std::vector<eval::RatingRecord> records) {
  if (records.empty()) throw ValidationError("no ratings submitted");
  std::unique_lock lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("no session \"" + session_id + "\"");
  auto& st = it->second;
  const auto& s = st.session;
  std::set<std::tuple<std::string, std::string, std::string>> batch;
  for (auto& r : records) {
    if (!r.session_id.empty() && r.session_id != session_id) {
      throw ValidationError("record belongs to session \"" + r.session_id + "\"");
    }
    r.session_id = session_id;
    if (std::find(s.evaluators.begin(), s.evaluators.end(), r.evaluator_id) == s.evaluators.end()) {
      throw ValidationError("evaluator \"" + r.evaluator_id + "\" is not enrolled in session " + session_id);
    }
    if (std::find(s.items.begin(), s.items.end(), r.item_id) == s.items.end()) {
      throw ValidationError("item \"" + r.item_id + "\" is not in session " + session_id);
    }
    eval::validate_rating(r, s.mode);
    std::tuple<std::string, std::string, std::string> key{r.evaluator_id, r.item_id, r.metric_name};
    if (st.keys.contains(key) || !batch.insert(key).second) {
      throw ConflictError(r.evaluator_id + " already rated " + r.metric_name + " for " + r.item_id);
    }
    if (r.timestamp.empty()) r.timestamp = clock_();
  }

  std::string lines;
  for (const auto& r : records) lines += eval::to_json(r).dump() + "\n";
  {
    std::ofstream out(log_path(), std::ios::binary | std::ios::app);
    if (!out) throw NotFoundError("cannot append to " + log_path().string());
    out << lines;
    out.flush();
    if (!out) throw NotFoundError("append to " + log_path().string() + " failed");
  }
  for (const auto& r : records) {
    st.keys.emplace(r.evaluator_id, r.item_id, r.metric_name);
    st.ratings.push_back(r);
  }
  return records;
}

std::vector<eval::RatingRecord> AnnotationStore::ratings(const std::string& session_id) const {
  std::shared_lock lock(mutex_);
  return state_of(session_id).ratings;
}

Json AnnotationStore::summary(const std::string& session_id, const eval::AggregationParams& params) const {
  std::shared_lock lock(mutex_);
  const auto& st = state_of(session_id);
  const auto& s = st.session;
  std::size_t done = 0;
  Json progress = Json::object();
  for (const auto& e : s.evaluators) {
    const std::size_t n = completed_items(st, e);
    progress[e] = Json{{"completed", n}, {"total", s.items.size()}};
    done += n;
  }
  const std::size_t expected = s.expected_judgments();
  Json j{{"session_id", s.id},
         {"mode", eval::to_string(s.mode)},
         {"ratings", st.ratings.size()},
         {"judgments_completed", done},
         {"judgments_expected", expected},
         {"completion", expected == 0 ? 0.0 : static_cast<double>(done) / static_cast<double>(expected)},
         {"evaluators", progress}};
  if (s.mode == eval::EvalMode::pairwise) {
    Json raw = Json::object();
    for (const auto& [metric, c] : eval::aggregate_pairwise(st.ratings)) raw[metric] = Json{{"A", c.a}, {"B", c.b}};
    Json majority = Json::object();
    for (const auto& [metric, c] : eval::pairwise_majority(st.ratings)) {
      majority[metric] = Json{{"A", c.a}, {"B", c.b}, {"ties", c.ties}};
    }
    j["pairwise"] = raw;
    j["majority"] = majority;
    j["by_source"] = eval::unblind_pairwise(st.ratings, s.pairs);
  } else {
    const auto agg = eval::aggregate_likert_partial(st.ratings, params);
    Json metrics = Json::object();
    for (const auto& [metric, m] : agg.metrics) {
      metrics[metric] = Json{{"n", m.n}, {"mean", m.mean}, {"sd", m.sd}, {"half_width", m.half_width},
                             {"rendered", m.render()}};
    }
    j["likert"] = metrics;
    j["insufficient"] = agg.insufficient;
  }
  return j;
}

Json AnnotationStore::state() const {
  std::shared_lock lock(mutex_);
  Json out = Json::object();
  for (const auto& [id, st] : sessions_) {
    Json cursors = Json::object();
    for (const auto& e : st.session.evaluators) cursors[e] = completed_items(st, e);
    Json ratings = Json::array();
    for (const auto& r : st.ratings) ratings.push_back(eval::to_json(r));
    Json order = Json::object();
    for (const auto& [e, o] : st.session.order) order[e] = o;
    out[id] = Json{{"manifest", to_json(st.session)}, {"order", order}, {"cursors", cursors}, {"ratings", ratings}};
  }
  return out;
}

}  // namespace disco::annotation
