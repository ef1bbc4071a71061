#pragma once

// Mounts a StudioService on an httplib server.

#include <algorithm>
#include <cctype>
#include <string>

#include "httplib.h"
#include "ubsr/studio/service.hpp"

namespace ubsr::studio {

inline void mount(httplib::Server& server, StudioService& service) {
    auto adapt = [&service](const httplib::Request& hreq, httplib::Response& hres) {
        Request req;
        req.method = hreq.method;
        req.path = hreq.path;
        req.body = hreq.body;
        for (const auto& [k, v] : hreq.headers) {
            std::string key = k;
            std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
            req.headers[key] = v;
        }
        auto res = service.handle(req);
        hres.status = res.status;
        for (const auto& [k, v] : res.headers) hres.set_header(k, v);
        if (res.status != 204) hres.set_content(res.body.dump(), "application/json");
    };
    const std::string any = R"(/.*)";
    server.Get(any, adapt);
    server.Post(any, adapt);
    server.Options(any, adapt);
}

}  // namespace ubsr::studio
