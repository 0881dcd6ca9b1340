#include <atomic>
#include <cstdlib>
#include <set>
#include <thread>

#include "../support.hpp"
#include "disco/backend/backend.hpp"
#include "disco/errors.hpp"
#include "doctest.h"
#include "httplib.h"

using namespace disco;
using namespace disco::backend;

namespace {

ChatRequest request(const std::string& system, const std::string& user) {
  ChatRequest r;
  r.messages = {{Role::system, system}, {Role::user, user}};
  return r;
}

/// Local chat-completions endpoint that replays a fixed list of statuses.
struct FakeEndpoint {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};
  std::vector<int> statuses;
  std::string last_auth;
  std::string last_model;

  explicit FakeEndpoint(std::vector<int> s) : statuses(std::move(s)) {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int i = hits++;
      const int status = statuses[std::min<std::size_t>(static_cast<std::size_t>(i), statuses.size() - 1)];
      last_auth = req.get_header_value("Authorization");
      last_model = Json::parse(req.body).value("model", "");
      res.status = status;
      if (status == 200) {
        res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"  Sure thing.  "}}]})",
                        "application/json");
      } else {
        res.set_content(R"({"error":"nope"})", "application/json");
      }
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeEndpoint() {
    server.stop();
    thread.join();
  }

  BackendConfig config() const {
    BackendConfig c;
    c.kind = BackendKind::http;
    c.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    c.model_name = "test-model";
    c.auth_token_env = "DISCO_TEST_TOKEN";
    c.timeout = 5.0;
    c.max_retries = 2;
    return c;
  }
};

const char* kToken = "tok-5ecret-value";

}  // namespace

TEST_CASE("request validation and canonical JSON") {
  ChatRequest r;
  CHECK_THROWS_AS(r.validate(), ArgumentError);
  r.messages = {{Role::user, "hi"}};
  CHECK_THROWS_AS(r.validate(), ArgumentError);
  r = request("sys", "hi");
  r.max_tokens = 0;
  CHECK_THROWS_AS(r.validate(), ArgumentError);
  r = request("sys", "hi");
  r.seed = 7;
  CHECK(request_from_json(to_json(r)) == r);
  CHECK(wire_request(r, "m")["model"] == "m");
  CHECK_FALSE(to_json(r).contains("model"));
}

TEST_CASE("backend config validation") {
  BackendConfig c;
  CHECK_NOTHROW(c.validate());
  c.kind = BackendKind::http;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.endpoint_url = "ftp://x";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.endpoint_url = "https://api.example.com/v1";
  CHECK_NOTHROW(c.validate());
  const auto back = backend_config_from_json(to_json(c));
  CHECK(back.endpoint_url == c.endpoint_url);
  CHECK(back.kind == BackendKind::http);
  CHECK_THROWS_AS(backend_config_from_json(Json{{"kind", "carrier-pigeon"}}), ConfigError);
}

TEST_CASE("backoff schedule") {
  BackendConfig c;
  c.backoff_base = 0.5;
  c.backoff_cap = 3.0;
  c.backoff_jitter = false;
  CHECK(backoff_delay(c, 0, 0.3) == 0.5);
  CHECK(backoff_delay(c, 2, 0.3) == 2.0);
  CHECK(backoff_delay(c, 5, 0.3) == 3.0);
  c.backoff_jitter = true;
  CHECK(backoff_delay(c, 0, 0.0) == doctest::Approx(0.4));
  CHECK(backoff_delay(c, 0, 1.0) == doctest::Approx(0.6));
}

TEST_CASE("wire response parsing") {
  CHECK(parse_wire_response(Json::parse(R"({"choices":[{"message":{"content":" ok "}}]})")) == "ok");
  CHECK_THROWS_AS(parse_wire_response(Json::parse(R"({"choices":[]})")), EmptyOutputError);
  CHECK_THROWS_AS(parse_wire_response(Json::parse(R"({"choices":[{"message":{"content":"   "}}]})")),
                  EmptyOutputError);
}

TEST_CASE("mock backend is deterministic and role aware") {
  const auto& t = default_mock_bank();
  CHECK_NOTHROW(t.validate());
  const auto driver = request("You are a human driver interacting with a car AI system. Ask a question.", "go");
  const auto wrap = request("You are a human driver interacting with a car AI system. Your task is to casually wrap up.", "go");
  const auto ai = request("You are a car AI system. Help.", "go");
  const auto ai_end = request("You are a car AI system. When the driver concludes the conversation, respond.", "go");
  CHECK(detect_request_kind(driver) == RequestKind::driver_regular);
  CHECK(detect_request_kind(wrap) == RequestKind::driver_concluding);
  CHECK(detect_request_kind(ai) == RequestKind::ai_regular);
  CHECK(detect_request_kind(ai_end) == RequestKind::ai_concluding);

  CHECK(mock_complete(1, driver) == mock_complete(1, driver));
  MockBackend m(1);
  CHECK(m.complete(driver) == mock_complete(1, driver));
  std::set<std::string> outputs;
  for (std::uint64_t s = 0; s < 20; ++s) outputs.insert(mock_complete(s, driver));
  CHECK(outputs.size() > 1);
}

TEST_CASE("mock scenario batches honor the requested count") {
  const auto r = request("You write short in-car conversation scenarios.\n\nDomain: Weather\n\nGenerate 7 new scenarios.",
                         "Examples");
  CHECK(detect_request_kind(r) == RequestKind::scenario);
  const auto out = mock_complete(3, r);
  CHECK(std::count(out.begin(), out.end(), '\n') == 6);
  CHECK(out.find("7. ") != std::string::npos);
  CHECK(out.rfind("1. ", 0) == 0);
}

TEST_CASE("limited backend caps concurrency") {
  struct Slow final : Backend {
    std::atomic<int> active{0};
    std::atomic<int> peak{0};
    std::string complete(const ChatRequest&) override {
      const int now = ++active;
      int p = peak.load();
      while (now > p && !peak.compare_exchange_weak(p, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      --active;
      return "x";
    }
    std::string id() const override { return "slow"; }
  };
  auto slow = std::make_shared<Slow>();
  LimitedBackend limited(slow, 2);
  std::vector<std::thread> ts;
  for (int i = 0; i < 8; ++i) ts.emplace_back([&] { limited.complete(request("s", "u")); });
  for (auto& t : ts) t.join();
  CHECK(slow->peak.load() <= 2);
  CHECK_THROWS_AS(LimitedBackend(slow, 0), ConfigError);
}

TEST_CASE("http backend") {
  ::setenv("DISCO_TEST_TOKEN", kToken, 1);
  std::vector<double> sleeps;
  auto sleeper = [&](double s) { sleeps.push_back(s); };

  SUBCASE("success sends bearer token and model") {
    FakeEndpoint ep({200});
    HttpBackend b(ep.config(), sleeper);
    CHECK(b.complete(request("sys", "hi")) == "Sure thing.");
    CHECK(ep.last_auth == std::string("Bearer ") + kToken);
    CHECK(ep.last_model == "test-model");
    CHECK(b.id().find(kToken) == std::string::npos);
  }
  SUBCASE("429 then success retries with backoff") {
    FakeEndpoint ep({429, 503, 200});
    HttpBackend b(ep.config(), sleeper);
    CHECK(b.complete(request("sys", "hi")) == "Sure thing.");
    CHECK(ep.hits.load() == 3);
    CHECK(sleeps.size() == 2);
  }
  SUBCASE("400 is rejected immediately") {
    FakeEndpoint ep({400});
    HttpBackend b(ep.config(), sleeper);
    try {
      b.complete(request("sys", "hi"));
      FAIL("expected RequestRejectedError");
    } catch (const RequestRejectedError& e) {
      CHECK(e.status() == 400);
      CHECK(e.body_excerpt().find("nope") != std::string::npos);
    }
    CHECK(ep.hits.load() == 1);
  }
  SUBCASE("persistent 500 exhausts retries without leaking the token") {
    FakeEndpoint ep({500});
    HttpBackend b(ep.config(), sleeper);
    try {
      b.complete(request("sys", "hi"));
      FAIL("expected BackendUnavailableError");
    } catch (const BackendUnavailableError& e) {
      CHECK(std::string(e.what()).find(kToken) == std::string::npos);
      CHECK(e.category() == ErrorCategory::backend);
    }
    CHECK(ep.hits.load() == 3);
  }
  SUBCASE("unreachable endpoint") {
    BackendConfig c;
    c.kind = BackendKind::http;
    c.endpoint_url = "http://127.0.0.1:1/v1";
    c.auth_token_env = "DISCO_TEST_TOKEN";
    c.max_retries = 1;
    c.timeout = 1.0;
    HttpBackend b(c, sleeper);
    CHECK_THROWS_AS(b.complete(request("sys", "hi")), BackendUnavailableError);
  }
  SUBCASE("missing token") {
    BackendConfig c;
    c.kind = BackendKind::http;
    c.endpoint_url = "http://127.0.0.1:1/v1";
    c.auth_token_env = "DISCO_TEST_TOKEN_UNSET";
    ::unsetenv("DISCO_TEST_TOKEN_UNSET");
    CHECK_THROWS_AS(HttpBackend(c, sleeper), ConfigError);
  }
}

TEST_CASE("recording wrapper counts history lines") {
  fixtures::RecordingBackend rec(std::make_shared<MockBackend>(1));
  rec.complete(request("You are a car AI system.", "Conversation so far:\nDriver: hi\nCar AI: hello\nDriver: x\n"));
  REQUIRE(rec.calls().size() == 1);
  CHECK(rec.calls()[0].history_lines == 3);
}
