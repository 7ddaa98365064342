#include <charconv>
#include <thread>

#include "httplib.h"
#include "stylefactor/log.hpp"
#include "stylefactor/service.hpp"

namespace stylefactor {
namespace {

constexpr const char* kJson = "application/json";

std::size_t QueryCount(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const auto text = req.get_param_value(key);
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string("query parameter '") + key + "' must be a non-negative integer");
  }
  return value;
}

template <typename Fn>
httplib::Server::Handler Wrap(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      res.set_content(fn(req), kJson);
      res.status = 200;
    } catch (const Error& e) {
      res.status = HttpStatusFor(e.kind());
      res.set_content(ErrorPayload(e), kJson);
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(ErrorPayload(Error(ErrorKind::kIo, e.what())), kJson);
    }
  };
}

}  // namespace

struct HttpServer::Impl {
  explicit Impl(const StyleService& s) : service(s) {}

  void Routes() {
    server.Get("/health", Wrap([this](const httplib::Request&) { return service.Health(); }));
    server.Get("/styles", Wrap([this](const httplib::Request&) { return service.Styles(); }));
    server.Get(R"(/docs/(.+))", Wrap([this](const httplib::Request& req) {
                 return service.Document(req.matches[1].str());
               }));
    server.Post("/retrieve", Wrap([this](const httplib::Request& req) {
                  return service.Retrieve(ParseRetrieveRequest(req.body));
                }));
    server.Post("/mix", Wrap([this](const httplib::Request& req) {
                  return service.Mix(ParseMixRequest(req.body));
                }));
    server.Post("/traverse", Wrap([this](const httplib::Request& req) {
                  return service.Traverse(ParseTraverseRequest(req.body));
                }));
    server.Get("/summary", Wrap([this](const httplib::Request& req) {
                 SummaryRequest r;
                 r.top = QueryCount(req, "top", r.top);
                 r.exemplars = QueryCount(req, "exemplars", r.exemplars);
                 return service.Summary(r);
               }));
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      const auto kind = res.status == 404 ? ErrorKind::kNotFound : ErrorKind::kInvalidArgument;
      res.set_content(ErrorPayload(Error(kind, "no such endpoint or method")), kJson);
    });
  }

  const StyleService& service;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(const StyleService& service) : impl_(std::make_unique<Impl>(service)) { impl_->Routes(); }

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorKind::kIo, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  log::Info("serving on " + host + ":" + std::to_string(bound));
  return bound;
}

void HttpServer::Run(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorKind::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  log::Info("serving on " + host + ":" + std::to_string(port));
  impl_->server.listen_after_bind();
}

void HttpServer::Stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace stylefactor
