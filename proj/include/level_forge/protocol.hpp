#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "level_forge/json_io.hpp"

namespace level_forge {

/// Generation request sent to any scene generator, one JSON object per line.
struct GenRequest {
    std::string id;
    std::string prompt;
    std::optional<std::string> negative_prompt;
    std::uint64_t seed = 0;
    int num_samples = 1;
    int width = kSceneWidth;
    std::optional<int> steps;
    std::optional<double> guidance_scale;
};

struct GenError {
    std::string code;
    std::string message;
};

struct GenResponse {
    std::string id;
    std::vector<std::vector<std::string>> scenes;
    std::optional<GenError> error;
};

class ProtocolViolation : public Error {
public:
    explicit ProtocolViolation(const std::string& detail) : Error("protocol_violation", detail) {}
};

class GeneratorError : public Error {
public:
    GeneratorError(const std::string& generator_code, const std::string& message)
        : Error("generator_error", generator_code + ": " + message), generator_code_(generator_code) {}
    const std::string& generator_code() const { return generator_code_; }

private:
    std::string generator_code_;
};

class GeneratorTimeout : public Error {
public:
    explicit GeneratorTimeout(const std::string& detail) : Error("timeout", detail) {}
};

inline Json to_json(const GenRequest& r) {
    Json j{{"id", r.id}, {"prompt", r.prompt}, {"seed", r.seed}, {"num_samples", r.num_samples}, {"width", r.width}};
    if (r.negative_prompt) j["negative_prompt"] = *r.negative_prompt;
    if (r.steps) j["steps"] = *r.steps;
    if (r.guidance_scale) j["guidance_scale"] = *r.guidance_scale;
    return j;
}

inline Json to_json(const GenResponse& r) {
    Json j{{"id", r.id}, {"scenes", r.scenes}};
    if (r.error) j["error"] = Json{{"code", r.error->code}, {"message", r.error->message}};
    return j;
}

namespace detail {

template <class T>
T field(const Json& j, const char* name, const char* what) {
    if (!j.contains(name)) throw Error("bad_request", std::string(what) + " is missing \"" + name + "\"");
    try {
        return j.at(name).get<T>();
    } catch (const Json::exception&) {
        throw Error("bad_request", std::string(what) + " field \"" + name + "\" has the wrong type");
    }
}

template <class T>
std::optional<T> optional_field(const Json& j, const char* name, const char* what) {
    if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
    return field<T>(j, name, what);
}

} // namespace detail

/// Parses and validates a request. Throws Error("bad_request") on malformed input.
inline GenRequest request_from_json(const Json& j) {
    if (!j.is_object()) throw Error("bad_request", "request must be a JSON object");
    GenRequest r;
    r.id = j.contains("id") ? detail::field<std::string>(j, "id", "request") : std::string{};
    r.prompt = detail::field<std::string>(j, "prompt", "request");
    r.negative_prompt = detail::optional_field<std::string>(j, "negative_prompt", "request");
    r.seed = detail::optional_field<std::uint64_t>(j, "seed", "request").value_or(0);
    r.num_samples = detail::optional_field<int>(j, "num_samples", "request").value_or(1);
    r.width = detail::optional_field<int>(j, "width", "request").value_or(kSceneWidth);
    r.steps = detail::optional_field<int>(j, "steps", "request");
    r.guidance_scale = detail::optional_field<double>(j, "guidance_scale", "request");
    if (r.num_samples < 1) throw Error("bad_request", "num_samples must be positive");
    if (r.width < kSceneWidth) throw Error("bad_request", "width must be at least 16");
    return r;
}

inline GenResponse response_from_json(const Json& j) {
    if (!j.is_object()) throw ProtocolViolation("response is not a JSON object");
    GenResponse r;
    try {
        r.id = j.at("id").get<std::string>();
        if (j.contains("error") && !j.at("error").is_null()) {
            const auto& e = j.at("error");
            r.error = GenError{e.value("code", std::string("unknown")), e.value("message", std::string{})};
        }
        if (j.contains("scenes") && !j.at("scenes").is_null()) {
            r.scenes = j.at("scenes").get<std::vector<std::vector<std::string>>>();
        }
    } catch (const Json::exception& e) {
        throw ProtocolViolation(std::string("malformed response: ") + e.what());
    }
    return r;
}

/// Checks a response against its request: id echo, sample count, 16 rows of
/// the requested width, closed tile alphabet. Returns the decoded scenes.
inline std::vector<TileGrid> validate_response(const GenRequest& req, const GenResponse& resp) {
    if (resp.id != req.id) throw ProtocolViolation("response id \"" + resp.id + "\" does not echo request id \"" + req.id + "\"");
    if (resp.error) throw GeneratorError(resp.error->code, resp.error->message);
    if (static_cast<int>(resp.scenes.size()) != req.num_samples) {
        throw ProtocolViolation("expected " + std::to_string(req.num_samples) + " scenes, got " +
                                std::to_string(resp.scenes.size()));
    }
    std::vector<TileGrid> out;
    for (std::size_t i = 0; i < resp.scenes.size(); ++i) {
        const auto& rows = resp.scenes[i];
        const std::string where = "scene " + std::to_string(i) + ": ";
        if (static_cast<int>(rows.size()) != kSceneHeight) {
            throw ProtocolViolation(where + "expected 16 rows, got " + std::to_string(rows.size()));
        }
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (static_cast<int>(rows[r].size()) != req.width) {
                throw ProtocolViolation(where + "row " + std::to_string(r) + " has width " + std::to_string(rows[r].size()) +
                                        ", expected " + std::to_string(req.width));
            }
            for (std::size_t c = 0; c < rows[r].size(); ++c) {
                if (!tile_from_symbol(rows[r][c])) {
                    throw ProtocolViolation(where + "unknown tile symbol '" + std::string(1, rows[r][c]) + "' at row " +
                                            std::to_string(r) + ", column " + std::to_string(c));
                }
            }
        }
        out.push_back(grid_from_rows(rows));
    }
    return out;
}

} // namespace level_forge
