#pragma once

#include "resto/service.hpp"

#include <httplib.h>

#include <string>

namespace resto::service {

inline Request to_request(const httplib::Request& req) {
    Request out{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) out.query.emplace(k, v);
    return out;
}

/// Every request goes through Service::handle.
inline void bind(httplib::Server& server, Service& service) {
    auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
        const Response r = service.handle(to_request(req));
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.Get(R"(/.*)", handler);
    server.Post(R"(/.*)", handler);
    server.Put(R"(/.*)", handler);
    server.Delete(R"(/.*)", handler);
    server.Patch(R"(/.*)", handler);
}

} // namespace resto::service
