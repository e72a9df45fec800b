#pragma once

#include <string>

#include "error.hpp"
#include "service.hpp"

// After Eigen: <resolv.h> defines a `_res` macro that breaks Eigen's headers.
#include <httplib.h>

namespace nlpfspl {

/// Serves a Service over HTTP/1.1.
class HttpServer {
  public:
    explicit HttpServer(Service& service) : m_service(service)
    {
        auto handler = [this](const httplib::Request& req, httplib::Response& res) {
            auto r = m_service.handle(req.method, req.path, req.body);
            res.status = r.status;
            res.set_content(r.body, r.content_type);
        };
        m_server.Get(".*", handler);
        m_server.Post(".*", handler);
        m_server.Put(".*", handler);
        m_server.Delete(".*", handler);
        m_server.Patch(".*", handler);
    }

    /// Binds without serving; port 0 picks an ephemeral port. Returns the port.
    int bind(const std::string& host, int port)
    {
        int bound = port == 0 ? m_server.bind_to_any_port(host) : (m_server.bind_to_port(host, port) ? port : -1);
        if (bound < 0) {
            throw IoError("cannot bind " + host + ":" + std::to_string(port));
        }
        return bound;
    }

    /// Blocks until stop().
    bool listen() { return m_server.listen_after_bind(); }

    void stop() { m_server.stop(); }

    void wait_until_ready() const { m_server.wait_until_ready(); }

  private:
    Service& m_service;
    httplib::Server m_server;
};

}  // namespace nlpfspl
