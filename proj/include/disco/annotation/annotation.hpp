#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "disco/corpus/corpus.hpp"
#include "disco/eval/eval.hpp"

namespace disco::annotation {

/// Dialogs the service can show, grouped by source corpus name.
class ItemLibrary {
 public:
  void add(const std::string& source, const Corpus& corpus);
  const Dialog* find(const std::string& source, const std::string& id) const;
  /// First match over sources in name order.
  const Dialog* find_any(const std::string& id) const;
  bool empty() const noexcept { return sources_.empty(); }

 private:
  std::map<std::string, std::map<std::string, Dialog>> sources_;
};

struct SessionRequest {
  std::string id;  // generated when empty
  eval::EvalMode mode = eval::EvalMode::intrinsic;
  std::vector<std::string> items;     // dialog ids (intrinsic, disfluency_integration)
  std::vector<eval::BlindPair> pairs;  // pairwise
  std::vector<std::string> evaluators;
  std::optional<std::uint64_t> seed;
};

SessionRequest session_request_from_json(const Json& j);

struct Session {
  std::string id;
  eval::EvalMode mode = eval::EvalMode::intrinsic;
  std::uint64_t seed = 0;
  std::vector<std::string> items;
  std::vector<eval::BlindPair> pairs;
  std::vector<std::string> evaluators;
  std::map<std::string, std::vector<std::size_t>> order;  // per evaluator, derived from seed

  std::size_t expected_judgments() const noexcept { return items.size() * evaluators.size(); }
};

/// Manifest as persisted; `order` is recomputed on load.
Json to_json(const Session& s);
Session session_from_json(const Json& j);

/// Item presentation order for one evaluator.
std::vector<std::size_t> evaluator_order(std::size_t n, std::uint64_t seed, const std::string& evaluator);

using Clock = std::function<std::string()>;
/// ISO-8601 UTC wall clock.
std::string utc_now();

/// Session manifests under <dir>/sessions plus one append-only <dir>/ratings.jsonl.
/// Opening replays the log; an interrupted final append is cut off.
class AnnotationStore {
 public:
  AnnotationStore(std::filesystem::path dir, ItemLibrary library, Json metric_sets = Json(), Clock clock = utc_now);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path log_path() const { return dir_ / "ratings.jsonl"; }

  Session create_session(const SessionRequest& request);
  Session session(const std::string& id) const;
  std::vector<std::string> session_ids() const;

  /// Payload of the evaluator's first incomplete item, or {"done": true}.
  Json next_item(const std::string& session_id, const std::string& evaluator) const;

  /// Validates and appends all records or none. Returns the stored records.
  std::vector<eval::RatingRecord> submit(const std::string& session_id, std::vector<eval::RatingRecord> records);

  std::vector<eval::RatingRecord> ratings(const std::string& session_id) const;
  Json summary(const std::string& session_id, const eval::AggregationParams& params = {}) const;

  /// Everything a restart must reproduce: manifests, cursors and ratings.
  Json state() const;
  const Json& metric_sets() const noexcept { return metric_sets_; }

 private:
  struct SessionState {
    Session session;
    std::vector<eval::RatingRecord> ratings;
    std::set<std::tuple<std::string, std::string, std::string>> keys;  // evaluator, item, metric
  };

  const SessionState& state_of(const std::string& id) const;
  std::size_t completed_items(const SessionState& s, const std::string& evaluator) const;
  bool item_complete(const SessionState& s, const std::string& evaluator, const std::string& item) const;
  Json form(eval::EvalMode mode) const;
  Json transcript(const Dialog& d, bool blind) const;
  void replay();

  std::filesystem::path dir_;
  ItemLibrary library_;
  Json metric_sets_;
  Clock clock_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, SessionState> sessions_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path static_dir;
};

/// JSON-over-HTTP front end of a store.
class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, ServerOptions options);
  ~AnnotationServer();

  /// Binds and returns the port; then serve() blocks until stop().
  int bind();
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace disco::annotation
