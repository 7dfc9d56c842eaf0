#pragma once

#include <memory>
#include <optional>
#include <string>

// Eigen must come first: httplib pulls in <resolv.h>, whose _res macro clashes with Eigen.
#include "service.hpp"

#include "httplib.h"

namespace kgraph::service {

namespace detail {

inline void reply(httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

inline std::optional<std::string> query(const httplib::Request& req, const char* key) {
    if (!req.has_param(key)) return std::nullopt;
    return req.get_param_value(key);
}

} // namespace detail

/// HTTP routes over an ExplorerService. The service must outlive the server.
inline std::unique_ptr<httplib::Server> make_http_server(ExplorerService& svc) {
    auto server = std::make_unique<httplib::Server>();
    server->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                 {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                                 {"Access-Control-Allow-Headers", "Content-Type"}});
    server->Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server->Get("/api/runs", [&svc](const httplib::Request&, httplib::Response& res) {
        detail::reply(res, svc.runs());
    });
    server->Get(R"(/api/runs/([^/]+)/graph)", [&svc](const httplib::Request& req, httplib::Response& res) {
        detail::reply(res, svc.graph(req.matches[1], detail::query(req, "lambda"), detail::query(req, "gamma")));
    });
    server->Get(R"(/api/runs/([^/]+)/node/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
        detail::reply(res, svc.node(req.matches[1], req.matches[2]));
    });
    server->Get(R"(/api/runs/([^/]+)/clusters)", [&svc](const httplib::Request& req, httplib::Response& res) {
        detail::reply(res, svc.clusters(req.matches[1]));
    });
    server->Get(R"(/api/runs/([^/]+)/underhood)", [&svc](const httplib::Request& req, httplib::Response& res) {
        detail::reply(res, svc.underhood(req.matches[1]));
    });
    server->set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        detail::reply(res, error(500, what));
    });
    return server;
}

} // namespace kgraph::service
