// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/service/http.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

#include <httplib.h>
#include <sys/socket.h>

#include "evomon/common/error.hpp"
#include "evomon/common/fs.hpp"
#include "evomon/ingest/snapshot.hpp"
#include "evomon/metrics/series.hpp"

namespace fs = std::filesystem;

namespace evomon::service {

nlohmann::json run_summary(const RunView& view) {
  nlohmann::json j = {{"run_id", view.manifest.run_id},
                      {"status", to_string(view.status)},
                      {"version", view.version()},
                      {"ingest_errors", view.ingest_errors},
                      {"control", view.control},
                      {"cadence_n", view.manifest.cadence_n},
                      {"label_columns", view.manifest.label_columns}};
  j["error"] = view.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(view.error);
  j["last_iteration"] = view.versions.empty() ? nlohmann::json(nullptr)
                                              : nlohmann::json(view.versions.back().training_iteration);
  return j;
}

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::optional<std::uint64_t> number_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  auto text = req.get_param_value(name);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ValidationError(std::string("query parameter '") + name + "' must be a nonnegative integer");
  return v;
}

bool safe_component(const std::string& s) {
  if (s.empty() || s == "." || s == "..") return false;
  return s.find_first_of("/\\") == std::string::npos;
}

}  // namespace

struct HttpServer::Impl {
  MonitorService& service;
  std::chrono::milliseconds max_long_poll;
  httplib::Server server;
  bool bound = false;

  Impl(MonitorService& s, std::chrono::milliseconds max_poll) : service(s), max_long_poll(max_poll) {
    // SO_REUSEPORT (httplib's default) would let a second server share a busy port.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const ValidationError& e) {
        send_json(res, 400, {{"error", e.what()}});
      } catch (const ConfigError& e) {
        send_json(res, 400, {{"error", e.what()}});
      } catch (const NotFoundError& e) {
        send_json(res, 404, {{"error", e.what()}});
      } catch (const ConflictError& e) {
        send_json(res, 409, {{"error", e.what()}});
      } catch (const nlohmann::json::exception& e) {
        send_json(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
      } catch (const std::exception& e) {
        send_json(res, 500, {{"error", e.what()}});
      } catch (...) {
        send_json(res, 500, {{"error", "unknown error"}});
      }
    });
    routes();
  }

  void routes() {
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"ok", true}}); });

    server.Post("/runs", [this](const httplib::Request& req, httplib::Response& res) {
      auto manifest = ingest::parse_manifest(req.body);
      auto id = service.create_run(std::move(manifest));
      send_json(res, 201, {{"run_id", id}});
    });

    server.Get("/runs", [this](const httplib::Request&, httplib::Response& res) {
      auto runs = nlohmann::json::array();
      for (const auto& id : service.run_ids()) runs.push_back(run_summary(*service.run(id)->view()));
      send_json(res, 200, {{"runs", std::move(runs)}});
    });

    server.Get(R"(/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, run_summary(*service.run(req.matches[1])->view()));
    });

    server.Post(R"(/runs/([^/]+)/snapshots/notify)", [this](const httplib::Request& req, httplib::Response& res) {
      service.run(req.matches[1])->notify();
      send_json(res, 202, {{"queued", true}});
    });

    server.Get(R"(/runs/([^/]+)/layout)", [this](const httplib::Request& req, httplib::Response& res) {
      auto view = service.run(req.matches[1])->view();
      LayoutQuery q;
      if (auto v = number_param(req, "from")) q.from_band = *v;
      if (auto v = number_param(req, "to")) q.to_band = *v;
      if (auto v = number_param(req, "version")) q.version = *v;
      if (req.has_param("filter")) q.filter = parse_filter(req.get_param_value("filter"));
      send_json(res, 200, query_layout(*view, q));
    });

    server.Get(R"(/runs/([^/]+)/metrics)", [this](const httplib::Request& req, httplib::Response& res) {
      auto view = service.run(req.matches[1])->view();
      send_json(res, 200, metrics::metrics_to_json(*view->metrics));
    });

    server.Get(R"(/runs/([^/]+)/metrics\.csv)", [this](const httplib::Request& req, httplib::Response& res) {
      auto view = service.run(req.matches[1])->view();
      res.set_content(metrics::metrics_to_csv(*view->metrics), "text/csv");
    });

    server.Get(R"(/runs/([^/]+)/control)", [this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, service.run(req.matches[1])->view()->control);
    });

    server.Post(R"(/runs/([^/]+)/control)", [this](const httplib::Request& req, httplib::Response& res) {
      auto run = service.run(req.matches[1]);
      auto body = nlohmann::json::parse(req.body);
      if (!body.is_object() || !body.contains("desired_state") || !body["desired_state"].is_string())
        throw ValidationError("body must be {\"desired_state\": \"paused\"|\"running\", \"note\": \"\"}");
      auto desired = ingest::desired_state_from_string(body["desired_state"].get<std::string>());
      auto note = body.value("note", std::string());
      send_json(res, 200, run->set_control(desired, std::move(note)));
    });

    server.Get(R"(/runs/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
      auto run = service.run(req.matches[1]);
      const auto after = number_param(req, "after").value_or(0);
      auto timeout = std::chrono::milliseconds(number_param(req, "timeout_ms").value_or(0));
      if (timeout > max_long_poll) timeout = max_long_poll;
      auto records = run->events().after(after, timeout);
      auto events = nlohmann::json::array();
      for (const auto& r : records) events.push_back(to_json(r));
      send_json(res, 200, {{"events", std::move(events)}, {"last_seq", run->events().last_seq()}});
    });

    server.Get(R"(/runs/([^/]+)/thumbs/(\d+)/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto run = service.run(req.matches[1]);
      const std::string iter_text = req.matches[2], id = req.matches[3];
      if (!safe_component(id) || iter_text.size() > 9) throw NotFoundError("no such thumbnail");
      auto path = ingest::snapshot_dir(run->dir(), std::stoll(iter_text)) / "thumbs" / (id + ".png");
      if (!fs::is_regular_file(path)) throw NotFoundError("no thumbnail for '" + id + "' at iteration " + iter_text);
      res.set_content(read_file(path), "image/png");
    });
  }
};

HttpServer::HttpServer(MonitorService& service, std::chrono::milliseconds max_long_poll)
    : impl_(std::make_unique<Impl>(service, max_long_poll)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw std::runtime_error("cannot bind " + host + ":0");
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port) + " (address in use?)");
  }
  impl_->bound = true;
  return bound;
}

void HttpServer::listen() {
  if (!impl_->bound) throw std::logic_error("HttpServer::listen before bind");
  impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace evomon::service
