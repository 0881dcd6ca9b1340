#include <chrono>
#include <mutex>
#include <cstdlib>
#include <random>
#include <thread>

#include "disco/backend/backend.hpp"
#include "disco/common/random.hpp"
#include "disco/errors.hpp"
#include "httplib.h"

namespace disco::backend {
namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint_url has no scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl p;
  p.origin = url.substr(0, path_start);
  p.prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!p.prefix.empty() && p.prefix.back() == '/') p.prefix.pop_back();
  return p;
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  if (body.size() <= kMax) return body;
  // Do not cut inside a UTF-8 sequence.
  std::size_t n = kMax;
  while (n > 0 && (static_cast<unsigned char>(body[n]) & 0xC0) == 0x80) --n;
  return body.substr(0, n) + "...";
}

}  // namespace

struct HttpBackend::Impl {
  ParsedUrl url;
  std::mutex rng_mutex;
  Rng jitter{std::random_device{}()};
};

Json wire_request(const ChatRequest& request, const std::string& model) {
  Json j = to_json(request);
  j["model"] = model;
  return j;
}

std::string parse_wire_response(const Json& body) {
  const auto choices = body.find("choices");
  if (choices == body.end() || !choices->is_array() || choices->empty()) {
    throw EmptyOutputError("backend response has no choices");
  }
  const Json& first = choices->front();
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    throw EmptyOutputError("backend response has no message content");
  }
  return clean_completion(first["message"]["content"].get<std::string>());
}

HttpBackend::HttpBackend(BackendConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)), impl_(std::make_unique<Impl>()) {
  config_.validate();
  const char* token = std::getenv(config_.auth_token_env.c_str());
  if (token == nullptr || *token == '\0') {
    throw ConfigError("environment variable " + config_.auth_token_env + " holding the API token is not set");
  }
  token_ = token;
  impl_->url = parse_url(config_.endpoint_url);
  if (!sleeper_) {
    sleeper_ = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
  }
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::id() const { return "http:" + config_.model_name + "@" + config_.endpoint_url; }

std::string HttpBackend::complete(const ChatRequest& request) {
  request.validate();
  const std::string body = wire_request(request, config_.model_name).dump();
  const std::string path = impl_->url.prefix + "/chat/completions";
  const httplib::Headers headers = {{"Authorization", "Bearer " + token_}};

  std::string last_failure;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      double unit = 0.5;
      {
        std::lock_guard lock(impl_->rng_mutex);
        unit = impl_->jitter.uniform01();
      }
      sleeper_(backoff_delay(config_, attempt - 1, unit));
    }
    httplib::Client client(impl_->url.origin);
    const auto secs = static_cast<time_t>(config_.timeout);
    const auto usecs = static_cast<time_t>((config_.timeout - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    const auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_failure = "network error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400) throw RequestRejectedError(res->status, excerpt(res->body));
    if (res->status < 200 || res->status >= 300) {
      last_failure = "unexpected HTTP " + std::to_string(res->status);
      continue;
    }
    Json parsed;
    try {
      parsed = Json::parse(res->body);
    } catch (const Json::parse_error&) {
      throw EmptyOutputError("backend response is not JSON: " + excerpt(res->body));
    }
    return parse_wire_response(parsed);
  }
  throw BackendUnavailableError("backend at " + config_.endpoint_url + " unavailable after " +
                                std::to_string(config_.max_retries + 1) + " attempts (" + last_failure + ")");
}

}  // namespace disco::backend
