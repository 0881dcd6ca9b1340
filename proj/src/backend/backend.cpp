#include <algorithm>
#include <cmath>

#include "disco/backend/backend.hpp"
#include "disco/common/text.hpp"
#include "disco/errors.hpp"

namespace disco::backend {
namespace {

constexpr std::array<std::string_view, 3> kRoleNames = {"system", "user", "assistant"};

}  // namespace

std::string_view to_string(Role r) noexcept { return kRoleNames[static_cast<int>(r)]; }

Role parse_role(std::string_view s) {
  for (std::size_t i = 0; i < kRoleNames.size(); ++i) {
    if (kRoleNames[i] == s) return static_cast<Role>(i);
  }
  throw ParseError("unknown chat role \"" + std::string(s) + "\"");
}

void ChatRequest::validate() const {
  if (messages.empty()) throw ArgumentError("chat request has no messages");
  if (messages.front().role != Role::system) {
    throw ArgumentError("first chat message must have role system");
  }
  for (const auto& m : messages) {
    if (text::is_blank(m.content)) throw ArgumentError("chat message content is empty");
  }
  if (!(temperature >= 0.0)) throw ArgumentError("temperature must be non-negative");
  if (max_tokens <= 0) throw ArgumentError("max_tokens must be positive");
}

Json to_json(const ChatRequest& request) {
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    messages.push_back(Json{{"role", to_string(m.role)}, {"content", m.content}});
  }
  Json j{{"messages", std::move(messages)},
         {"temperature", request.temperature},
         {"max_tokens", request.max_tokens}};
  if (request.seed) j["seed"] = *request.seed;
  return j;
}

ChatRequest request_from_json(const Json& j) {
  ChatRequest r;
  for (const auto& m : j.at("messages")) {
    r.messages.push_back({parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
  }
  r.temperature = j.value("temperature", r.temperature);
  r.max_tokens = j.value("max_tokens", r.max_tokens);
  if (j.contains("seed") && !j.at("seed").is_null()) r.seed = j.at("seed").get<std::int64_t>();
  return r;
}

void BackendConfig::validate() const {
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
  if (max_in_flight > 1024) throw ConfigError("max_in_flight must not exceed 1024");
  if (!(timeout > 0.0)) throw ConfigError("timeout must be positive");
  if (max_retries < 0) throw ConfigError("max_retries must be non-negative");
  if (!(backoff_base >= 0.0) || !(backoff_cap >= 0.0)) throw ConfigError("backoff values must be non-negative");
  if (kind == BackendKind::http) {
    if (endpoint_url.empty()) throw ConfigError("http backend needs endpoint_url");
    if (endpoint_url.rfind("http://", 0) != 0 && endpoint_url.rfind("https://", 0) != 0) {
      throw ConfigError("endpoint_url must start with http:// or https://");
    }
    if (auth_token_env.empty()) throw ConfigError("http backend needs auth_token_env");
    if (model_name.empty()) throw ConfigError("http backend needs model_name");
  }
}

Json to_json(const BackendConfig& c) {
  Json j{{"kind", c.kind == BackendKind::http ? "http" : "mock"},
         {"endpoint_url", c.endpoint_url},
         {"model_name", c.model_name},
         {"auth_token_env", c.auth_token_env},
         {"timeout", c.timeout},
         {"max_retries", c.max_retries},
         {"max_in_flight", c.max_in_flight},
         {"backoff_base", c.backoff_base},
         {"backoff_cap", c.backoff_cap},
         {"backoff_jitter", c.backoff_jitter},
         {"mock_seed", c.mock_seed}};
  if (!c.mock_bank.empty()) j["mock_bank"] = c.mock_bank.string();
  return j;
}

BackendConfig backend_config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("backend config must be a JSON object");
  BackendConfig c;
  try {
    const std::string kind = j.value("kind", std::string("mock"));
    if (kind == "http") {
      c.kind = BackendKind::http;
    } else if (kind == "mock") {
      c.kind = BackendKind::mock;
    } else {
      throw ConfigError("unknown backend kind \"" + kind + "\"");
    }
    c.endpoint_url = j.value("endpoint_url", c.endpoint_url);
    c.model_name = j.value("model_name", c.model_name);
    c.auth_token_env = j.value("auth_token_env", c.auth_token_env);
    c.timeout = j.value("timeout", c.timeout);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.backoff_base = j.value("backoff_base", c.backoff_base);
    c.backoff_cap = j.value("backoff_cap", c.backoff_cap);
    c.backoff_jitter = j.value("backoff_jitter", c.backoff_jitter);
    c.mock_seed = j.value("mock_seed", c.mock_seed);
    if (j.contains("mock_bank")) c.mock_bank = j.at("mock_bank").get<std::string>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad backend config: ") + e.what());
  }
  return c;
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
  config.validate();
  std::shared_ptr<Backend> inner;
  if (config.kind == BackendKind::http) {
    inner = std::make_shared<HttpBackend>(config);
  } else {
    std::shared_ptr<const MockBank> bank;
    if (!config.mock_bank.empty()) bank = std::make_shared<const MockBank>(load_mock_bank(config.mock_bank));
    inner = std::make_shared<MockBackend>(config.mock_seed, std::move(bank));
  }
  return std::make_shared<LimitedBackend>(std::move(inner), config.max_in_flight);
}

std::string complete(const BackendConfig& config, const ChatRequest& request) {
  return make_backend(config)->complete(request);
}

LimitedBackend::LimitedBackend(std::shared_ptr<Backend> inner, int max_in_flight)
    : inner_(std::move(inner)), slots_(std::clamp(max_in_flight, 1, 1024)) {
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
}

std::string LimitedBackend::complete(const ChatRequest& request) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return inner_->complete(request);
}

double backoff_delay(const BackendConfig& config, int attempt, double jitter_unit) {
  double d = config.backoff_base * std::pow(2.0, attempt);
  d = std::min(d, config.backoff_cap);
  if (config.backoff_jitter) d *= 0.8 + 0.4 * std::clamp(jitter_unit, 0.0, 1.0);
  return d;
}

std::string clean_completion(std::string_view text_in) {
  const auto t = text::trim(text_in);
  if (t.empty()) throw EmptyOutputError("backend returned an empty completion");
  return std::string(t);
}

}  // namespace disco::backend
