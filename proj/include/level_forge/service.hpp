#pragma once

#include <functional>
#include <memory>
#include <string>

#include <httplib.h>

#include "level_forge/external_generator.hpp"
#include "level_forge/project.hpp"

namespace level_forge {

/// HTTP status for an error code.
inline int http_status(const std::string& code) {
    if (code == "not_found") return 404;
    if (code == "conflict") return 409;
    if (code == "timeout") return 504;
    if (code == "protocol_violation" || code == "generator_error") return 502;
    if (code == "io_error" || code == "spawn_failed") return 500;
    return 400;
}

inline Json error_body(const std::string& code, const std::string& message) {
    return Json{{"code", code}, {"message", message}};
}

struct ServiceConfig {
    std::filesystem::path workspace = default_workspace();
    std::string generator = default_generator_endpoint();
    std::chrono::milliseconds generator_timeout = std::chrono::seconds(120);
    DetectorConfig detector;
    MoveModel model;
};

/// Request handlers shared by the HTTP server. Each handler takes a parsed
/// JSON body and returns a JSON body, throwing Error on failure.
class Service {
public:
    explicit Service(ServiceConfig cfg)
        : cfg_(std::move(cfg)), store_(cfg_.workspace), generator_(make_generator(cfg_.generator, cfg_.generator_timeout)) {}

    Json concepts() const { return grammar_json(); }

    Json caption(const Json& body) const {
        const auto scene = grid_from_json(require(body, "scene"));
        const auto report = detect(scene, cfg_.detector);
        return Json{{"regular", render(report, CaptionStyle::Regular).text()},
                    {"absence", render(report, CaptionStyle::Absence).text()},
                    {"negative", render(report, CaptionStyle::Negative).text()},
                    {"report", to_json(report)}};
    }

    Json score(const Json& body) const {
        const auto prompt = parse_caption(string_field(body, "prompt"));
        Caption actual;
        if (body.contains("scene")) {
            actual = render(detect(grid_from_json(body.at("scene")), cfg_.detector));
        } else {
            actual = parse_caption(string_field(body, "caption"));
        }
        Json j = to_json(c_score(prompt, actual));
        j["caption"] = actual.text();
        return j;
    }

    Json generate(const Json& body) {
        const GenRequest req = request_from_json(body);
        std::optional<Caption> prompt;
        try {
            prompt = parse_caption(req.prompt);
        } catch (const Error&) {
            // external generators may take free text; the built-in one may not
            if (generator_->describe() == "builtin") throw;
        }
        const GenResponse resp = generate_external(*generator_, req);
        const auto grids = validate_response(req, resp);
        Json scenes = Json::array();
        for (const auto& g : grids) {
            Json item{{"scene", rows_json(g)}};
            if (prompt) {
                const auto a = annotate(g, *prompt, cfg_.detector);
                item["caption"] = a.caption.text();
                item["breakdown"] = to_json(a.breakdown);
                item["c_score"] = a.breakdown.c_score;
            } else {
                item["caption"] = render(detect(g, cfg_.detector)).text();
            }
            scenes.push_back(item);
        }
        return Json{{"id", resp.id}, {"generator", generator_->describe()}, {"scenes", scenes}};
    }

    /// Solves the level formed by the given scenes side by side.
    Json solve(const Json& body) const {
        std::vector<TileGrid> parts;
        if (body.contains("scenes")) {
            const auto& arr = body.at("scenes");
            if (!arr.is_array() || arr.empty()) throw Error("bad_request", "\"scenes\" must be a non-empty array");
            for (const auto& s : arr) parts.push_back(grid_from_json(s));
        } else {
            parts.push_back(grid_from_json(require(body, "scene")));
        }
        const auto level = concatenate(parts);
        Json j = to_json(solvable(level, cfg_.model));
        j["width"] = level.width();
        return j;
    }

    ProjectStore& projects() { return store_; }
    SceneGenerator& generator() { return *generator_; }

private:
    ServiceConfig cfg_;
    ProjectStore store_;
    std::unique_ptr<SceneGenerator> generator_;

    static const Json& require(const Json& body, const char* name) {
        if (!body.is_object() || !body.contains(name)) throw Error("bad_request", std::string("missing field \"") + name + "\"");
        return body.at(name);
    }

    static std::string string_field(const Json& body, const char* name) {
        const auto& v = require(body, name);
        if (!v.is_string()) throw Error("bad_request", std::string("field \"") + name + "\" must be a string");
        return v.get<std::string>();
    }
};

namespace detail {

inline void send_json(httplib::Response& res, const Json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline Json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    try {
        return Json::parse(req.body);
    } catch (const Json::exception& e) {
        throw Error("bad_json", std::string("request body is not valid JSON: ") + e.what());
    }
}

inline std::optional<std::uint64_t> expected_version(const Json& body) {
    if (body.contains("expected_version") && !body.at("expected_version").is_null()) {
        return body.at("expected_version").get<std::uint64_t>();
    }
    return std::nullopt;
}

inline std::size_t index_param(const std::string& s) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw Error("bad_request", "scene index must be a non-negative integer");
    }
}

} // namespace detail

/// Registers every route of the API on `server`.
inline void install_routes(httplib::Server& server, Service& svc) {
    using detail::parse_body;
    using detail::send_json;
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    auto guarded = [](Handler h) {
        return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
            try {
                h(req, res);
            } catch (const Error& e) {
                send_json(res, error_body(e.code(), e.what()), http_status(e.code()));
            } catch (const Json::exception& e) {
                send_json(res, error_body("bad_request", e.what()), 400);
            } catch (const std::exception& e) {
                send_json(res, error_body("internal", e.what()), 500);
            }
        };
    };

    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/concepts", guarded([&](const auto&, auto& res) { send_json(res, svc.concepts()); }));
    server.Post("/caption", guarded([&](const auto& req, auto& res) { send_json(res, svc.caption(parse_body(req))); }));
    server.Post("/score", guarded([&](const auto& req, auto& res) { send_json(res, svc.score(parse_body(req))); }));
    server.Post("/generate", guarded([&](const auto& req, auto& res) { send_json(res, svc.generate(parse_body(req))); }));
    server.Post("/solve", guarded([&](const auto& req, auto& res) { send_json(res, svc.solve(parse_body(req))); }));

    server.Get("/projects", guarded([&](const auto&, auto& res) { send_json(res, Json{{"projects", svc.projects().list()}}); }));
    server.Post("/projects", guarded([&](const auto& req, auto& res) {
                    const auto body = parse_body(req);
                    std::optional<std::string> id;
                    if (body.contains("id") && !body.at("id").is_null()) id = body.at("id").template get<std::string>();
                    send_json(res, to_json(svc.projects().create(id)), 201);
                }));
    server.Get(R"(/projects/([^/]+))", guarded([&](const auto& req, auto& res) {
                   send_json(res, to_json(svc.projects().get(req.matches[1])));
               }));
    server.Delete(R"(/projects/([^/]+))", guarded([&](const auto& req, auto& res) {
                      svc.projects().remove(req.matches[1]);
                      send_json(res, Json{{"deleted", std::string(req.matches[1])}});
                  }));
    server.Get(R"(/projects/([^/]+)/export)", guarded([&](const auto& req, auto& res) {
                   res.set_content(svc.projects().get(req.matches[1]).export_ascii(), "text/plain");
               }));
    server.Post(R"(/projects/([^/]+)/scenes)", guarded([&](const auto& req, auto& res) {
                    const auto body = parse_body(req);
                    if (!body.contains("scene")) throw Error("bad_request", "missing field \"scene\"");
                    const auto p = svc.projects().append(req.matches[1], grid_from_json(body.at("scene")),
                                                         detail::expected_version(body));
                    send_json(res, to_json(p), 201);
                }));
    server.Post(R"(/projects/([^/]+)/scenes/(\d+)/move)", guarded([&](const auto& req, auto& res) {
                    const auto body = parse_body(req);
                    if (!body.contains("to")) throw Error("bad_request", "missing field \"to\"");
                    const auto to = body.at("to").template get<std::size_t>();
                    send_json(res, to_json(svc.projects().move(req.matches[1], detail::index_param(req.matches[2]), to,
                                                               detail::expected_version(body))));
                }));
    server.Delete(R"(/projects/([^/]+)/scenes/(\d+))", guarded([&](const auto& req, auto& res) {
                      const auto body = parse_body(req);
                      send_json(res, to_json(svc.projects().erase(req.matches[1], detail::index_param(req.matches[2]),
                                                                  detail::expected_version(body))));
                  }));
}

} // namespace level_forge
