#include <algorithm>
#include <cctype>

#include <httplib.h>

#include "hatewatch/error.hpp"
#include "hatewatch/service.hpp"

namespace hatewatch {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

void dispatch(Service& service, const httplib::Request& in, httplib::Response& out) {
  HttpRequest req;
  req.method = in.method;
  req.path = in.path;
  req.body = in.body;
  for (const auto& [k, v] : in.params) req.query.emplace(k, v);
  for (const auto& [k, v] : in.headers) req.headers.emplace(lower(k), v);
  HttpResponse resp = service.handle(req);
  out.status = resp.status;
  for (const auto& [k, v] : resp.headers) out.set_header(k, v);
  if (resp.status != 304) out.set_content(resp.body, resp.content_type);
}

}  // namespace

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>()) {
  auto handler = [&service](const httplib::Request& in, httplib::Response& out) {
    dispatch(service, in, out);
  };
  impl_->server.Get("/api/.*", handler);
  impl_->server.Post("/api/.*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port, bool allow_remote) {
  if (!allow_remote && !is_loopback_host(host)) {
    throw Error(ErrorCode::kInvalidArgument,
                "refusing to bind to non-loopback address " + host + " without --allow-remote");
  }
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace hatewatch
