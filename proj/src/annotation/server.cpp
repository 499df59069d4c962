#include "recipemem/annotation/server.hpp"

#include <httplib.h>

#include <thread>

#include "recipemem/core/error.hpp"

namespace recipemem::annotation {

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, Json{{"error", message}});
}

}  // namespace

struct AnnotationServer::Impl {
  AnnotationService& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(AnnotationService& s) : service(s) {}
};

AnnotationServer::AnnotationServer(AnnotationService& service, std::string static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  auto& svc = impl_->service;

  srv.Get("/api/pending", [&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string annotator = req.get_param_value("annotator");
    if (annotator.empty()) return send_error(res, 400, "annotator parameter is required");
    if (!svc.has_annotator(annotator)) return send_error(res, 404, "unknown annotator '" + annotator + "'");
    auto item = svc.next_pending_json(annotator);
    if (!item) {
      res.status = 204;
      return;
    }
    send_json(res, 200, *item);
  });

  srv.Post("/api/record", [&svc](const httplib::Request& req, httplib::Response& res) {
    AnnotationRecord record;
    try {
      Json j = Json::parse(req.body);
      if (j.is_object() && !j.contains("timestamp")) j["timestamp"] = "1970-01-01T00:00:00.000Z";
      record = record_from_json(j);
    } catch (const Json::exception& e) {
      return send_error(res, 400, std::string("malformed JSON: ") + e.what());
    } catch (const FormatError& e) {
      return send_error(res, 400, e.what());
    }
    const auto outcome = svc.record(record);
    switch (outcome.status) {
      case RecordStatus::Stored:
        return send_json(res, 200, Json{{"status", "stored"}, {"record", record_to_json(*outcome.record)}});
      case RecordStatus::Conflict:
        return send_json(res, 409, Json{{"status", "conflict"}, {"existing", record_to_json(*outcome.record)}});
      case RecordStatus::Invalid:
        return send_error(res, 400, outcome.message);
    }
  });

  srv.Get("/api/export", [&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string study = req.get_param_value("study");
    if (study != svc.study_id()) return send_error(res, 404, "unknown study '" + study + "'");
    res.set_content(svc.export_text(), "application/x-ndjson");
  });

  srv.Get("/api/progress", [&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string annotator = req.get_param_value("annotator");
    if (!svc.has_annotator(annotator)) return send_error(res, 404, "unknown annotator '" + annotator + "'");
    const auto p = svc.progress(annotator);
    send_json(res, 200, Json{{"annotator", annotator}, {"total", p.total}, {"recorded", p.recorded},
                             {"auto_resolved", p.auto_resolved}, {"pending", p.pending}});
  });

  if (!static_dir.empty() && !srv.set_mount_point("/", static_dir)) {
    throw ConfigError("static directory " + static_dir + " does not exist");
  }
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void AnnotationServer::listen() { impl_->server.listen_after_bind(); }

void AnnotationServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void AnnotationServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace recipemem::annotation
