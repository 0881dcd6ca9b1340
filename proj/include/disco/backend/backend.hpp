#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "json.hpp"

namespace disco::backend {

using Json = nlohmann::json;

enum class Role { system, user, assistant };
std::string_view to_string(Role r) noexcept;
Role parse_role(std::string_view s);

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
  int max_tokens = 256;
  std::optional<std::int64_t> seed;

  /// Throws ArgumentError: no messages, first message not system, empty
  /// content, negative temperature or non-positive max_tokens.
  void validate() const;

  friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

/// Canonical serialization (stable key order, no model name).
Json to_json(const ChatRequest& request);
ChatRequest request_from_json(const Json& j);

enum class BackendKind { http, mock };

struct BackendConfig {
  BackendKind kind = BackendKind::mock;
  std::string endpoint_url;  // e.g. https://api.example.com/v1
  std::string model_name = "mock";
  std::string auth_token_env = "DISCO_API_KEY";
  double timeout = 60.0;  // seconds
  int max_retries = 3;
  int max_in_flight = 4;

  // retry schedule
  double backoff_base = 0.5;
  double backoff_cap = 30.0;
  bool backoff_jitter = true;

  // mock only
  std::uint64_t mock_seed = 0;
  std::filesystem::path mock_bank;  // empty: bundled bank

  /// Throws ConfigError on an invalid combination.
  void validate() const;
};

Json to_json(const BackendConfig& config);
/// Missing keys keep their defaults.
BackendConfig backend_config_from_json(const Json& j);

class Backend {
 public:
  virtual ~Backend() = default;
  /// Assistant text with surrounding whitespace removed.
  virtual std::string complete(const ChatRequest& request) = 0;
  /// Identifier recorded in corpus provenance, e.g. "mock:seed=7".
  virtual std::string id() const = 0;
};

/// Builds the backend described by `config`, wrapped in a limiter that
/// enforces max_in_flight.
std::shared_ptr<Backend> make_backend(const BackendConfig& config);

/// One-shot convenience over make_backend.
std::string complete(const BackendConfig& config, const ChatRequest& request);

/// Caps the number of concurrent complete() calls on the wrapped backend.
class LimitedBackend final : public Backend {
 public:
  LimitedBackend(std::shared_ptr<Backend> inner, int max_in_flight);

  std::string complete(const ChatRequest& request) override;
  std::string id() const override { return inner_->id(); }

 private:
  std::shared_ptr<Backend> inner_;
  std::counting_semaphore<1024> slots_;
};

/// Delay before retry number `attempt` (0-based): base * 2^attempt, capped,
/// then scaled by a factor in [0.8, 1.2] when jitter is on.
double backoff_delay(const BackendConfig& config, int attempt, double jitter_unit);

/// Trims and rejects blank completions with EmptyOutputError.
std::string clean_completion(std::string_view text);

// -- HTTP -------------------------------------------------------------------

class HttpBackend final : public Backend {
 public:
  using Sleeper = std::function<void(double seconds)>;

  /// Resolves the auth token immediately; throws ConfigError when the
  /// environment variable is unset or empty.
  explicit HttpBackend(BackendConfig config, Sleeper sleeper = {});
  ~HttpBackend() override;

  std::string complete(const ChatRequest& request) override;
  std::string id() const override;

 private:
  struct Impl;
  BackendConfig config_;
  std::string token_;
  Sleeper sleeper_;
  std::unique_ptr<Impl> impl_;
};

/// Request body sent to {endpoint}/chat/completions.
Json wire_request(const ChatRequest& request, const std::string& model);
/// Extracts choices[0].message.content; throws EmptyOutputError when absent.
std::string parse_wire_response(const Json& body);

// -- mock -------------------------------------------------------------------

/// Prompt family a request belongs to, detected from its system message.
enum class RequestKind { driver_regular, driver_concluding, ai_regular, ai_concluding, scenario };
std::string_view to_string(RequestKind k) noexcept;
RequestKind detect_request_kind(const ChatRequest& request);

/// Slot-filled template bank behind the mock backend.
struct MockBank {
  std::string version;
  std::map<std::string, std::vector<std::string>> slots;
  std::map<RequestKind, std::vector<std::string>> templates;
  std::map<std::string, std::vector<std::string>> scenario_templates;  // by domain tag

  /// Throws ValidationError on empty families or undefined slots.
  void validate() const;
};

MockBank load_mock_bank(const std::filesystem::path& path);
/// The bank shipped in the data directory, loaded once.
const MockBank& default_mock_bank();

/// Which template a mock completion uses, plus the rendered text.
struct MockSelection {
  RequestKind kind = RequestKind::ai_regular;
  std::size_t template_index = 0;
  std::string text;
};

MockSelection mock_select(std::uint64_t seed, const ChatRequest& request, const MockBank& bank);
/// Deterministic function of (seed, canonical request JSON).
std::string mock_complete(std::uint64_t seed, const ChatRequest& request, const MockBank& bank);
std::string mock_complete(std::uint64_t seed, const ChatRequest& request);

class MockBackend final : public Backend {
 public:
  explicit MockBackend(std::uint64_t seed, std::shared_ptr<const MockBank> bank = nullptr);

  std::string complete(const ChatRequest& request) override;
  std::string id() const override;

 private:
  std::uint64_t seed_;
  std::shared_ptr<const MockBank> bank_;
};

}  // namespace disco::backend
