#pragma once

#include <cctype>
#include <string>

#include "httplib.h"
#include "plugwatt/service.hpp"

namespace plugwatt::service {

inline Request from_httplib(const httplib::Request& in) {
  Request r;
  r.method = in.method;
  r.path = in.path;
  r.body = in.body;
  for (const auto& [k, v] : in.params) r.query[k] = v;
  for (const auto& [k, v] : in.headers) {
    std::string low;
    for (char c : k) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    r.headers[low] = v;
  }
  return r;
}

/// Routes every /v1 request on `server` through `svc`.
inline void mount(Service& svc, httplib::Server& server) {
  auto forward = [&svc](const httplib::Request& in, httplib::Response& out) {
    Response r = svc.handle(from_httplib(in));
    out.status = r.status;
    for (const auto& [k, v] : r.headers)
      if (k != "Content-Type") out.set_header(k, v);
    if (!r.body.empty()) out.set_content(r.body, "application/json");
  };
  server.Get(R"(/v1/.*)", forward);
  server.Post(R"(/v1/.*)", forward);
}

/// Blocks serving `svc` on host:port.
inline bool serve(Service& svc, const std::string& host, int port) {
  httplib::Server server;
  mount(svc, server);
  return server.listen(host, port);
}

/// Splits "host:port"; a bare port binds all interfaces.
inline std::pair<std::string, int> parse_bind(const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos) return {"0.0.0.0", std::stoi(addr)};
  return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
}

}  // namespace plugwatt::service
