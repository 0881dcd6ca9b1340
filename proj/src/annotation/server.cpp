#include "httplib.h"

#include "disco/annotation/annotation.hpp"

namespace disco::annotation {
namespace {

int status_for(const Error& e) {
  if (e.code() == "not_found") return 404;
  if (e.code() == "conflict") return 409;
  if (e.category() == ErrorCategory::backend) return 502;
  return 400;
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  send_json(res, status, Json{{"error", Json{{"code", code}, {"message", message}}}});
}

Json public_view(const Session& s) {
  return Json{{"id", s.id},
              {"mode", eval::to_string(s.mode)},
              {"seed", s.seed},
              {"items", s.items},
              {"evaluators", s.evaluators},
              {"pending", s.expected_judgments()}};
}

Json parse_body(const httplib::Request& req) {
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("request body is not JSON: ") + e.what());
  }
}

template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, status_for(e), e.code(), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

struct AnnotationServer::Impl {
  Impl(AnnotationStore& s, ServerOptions o) : store(s), options(std::move(o)) {}

  AnnotationStore& store;
  ServerOptions options;
  httplib::Server server;
};

AnnotationServer::AnnotationServer(AnnotationStore& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
  auto& svr = impl_->server;
  auto& st = impl_->store;

  svr.Post("/sessions", guarded([&st](const httplib::Request& req, httplib::Response& res) {
             const Session s = st.create_session(session_request_from_json(parse_body(req)));
             send_json(res, 201, public_view(s));
           }));

  svr.Get(R"(/sessions/([A-Za-z0-9_-]+))", guarded([&st](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, public_view(st.session(req.matches[1])));
          }));

  svr.Get(R"(/sessions/([A-Za-z0-9_-]+)/next)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
            if (!req.has_param("evaluator")) throw ValidationError("missing evaluator query parameter");
            send_json(res, 200, st.next_item(req.matches[1], req.get_param_value("evaluator")));
          }));

  svr.Post(R"(/sessions/([A-Za-z0-9_-]+)/ratings)",
           guarded([&st](const httplib::Request& req, httplib::Response& res) {
             const Json body = parse_body(req);
             const Json& list = body.is_object() && body.contains("ratings") ? body["ratings"] : body;
             std::vector<eval::RatingRecord> records;
             if (list.is_array()) {
               for (const auto& r : list) records.push_back(eval::rating_from_json(r));
             } else {
               records.push_back(eval::rating_from_json(list));
             }
             const auto stored = st.submit(req.matches[1], std::move(records));
             Json out = Json::array();
             for (const auto& r : stored) out.push_back(eval::to_json(r));
             send_json(res, 201, Json{{"accepted", stored.size()}, {"ratings", out}});
           }));

  svr.Get(R"(/sessions/([A-Za-z0-9_-]+)/summary)",
          guarded([&st](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, st.summary(req.matches[1]));
          }));

  svr.Get("/metric-sets", guarded([&st](const httplib::Request&, httplib::Response& res) {
            if (!st.metric_sets().is_null()) {
              send_json(res, 200, st.metric_sets());
              return;
            }
            Json out = Json::object();
            for (const auto mode : {eval::EvalMode::intrinsic, eval::EvalMode::pairwise,
                                    eval::EvalMode::disfluency_integration}) {
              Json metrics = Json::array();
              for (const auto& m : eval::metric_names(mode)) metrics.push_back(Json{{"name", m}});
              out[std::string(eval::to_string(mode))] = metrics;
            }
            send_json(res, 200, out);
          }));

  const auto& static_dir = impl_->options.static_dir;
  if (!static_dir.empty()) {
    if (!std::filesystem::is_directory(static_dir)) {
      throw ConfigError("static directory " + static_dir.string() + " does not exist");
    }
    svr.set_mount_point("/", static_dir.string());
  }
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    const int port = impl_->server.bind_to_any_port(o.host);
    if (port < 0) throw ConfigError("cannot bind " + o.host);
    o.port = port;
  } else if (!impl_->server.bind_to_port(o.host, o.port)) {
    throw ConfigError("cannot bind " + o.host + ":" + std::to_string(o.port));
  }
  return o.port;
}

void AnnotationServer::serve() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace disco::annotation
