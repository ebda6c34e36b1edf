#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "level_forge/dataset.hpp"

namespace level_forge {

/// An ordered list of 16-row scenes that concatenate into one level.
struct LevelProject {
    std::string id;
    std::vector<TileGrid> scenes;
    std::int64_t created = 0;  // unix seconds
    std::int64_t modified = 0;
    std::uint64_t version = 0; // bumped by every mutation

    int width() const {
        int w = 0;
        for (const auto& s : scenes) w += s.width();
        return w;
    }

    /// The whole level as ASCII rows; empty string for an empty project.
    std::string export_ascii() const {
        if (scenes.empty()) return {};
        return serialize(concatenate(scenes)) + "\n";
    }
};

class Conflict : public Error {
public:
    explicit Conflict(const std::string& detail) : Error("conflict", detail) {}
};

class NotFound : public Error {
public:
    explicit NotFound(const std::string& detail) : Error("not_found", detail) {}
};

inline Json to_json(const LevelProject& p) {
    Json scenes = Json::array();
    for (const auto& s : p.scenes) scenes.push_back(rows_json(s));
    return Json{{"id", p.id},
                {"version", p.version},
                {"created", p.created},
                {"modified", p.modified},
                {"width", p.width()},
                {"scenes", scenes}};
}

/// Projects stored one file per project in a workspace directory. The first
/// line of a file is a header; each following line is a scene record in the
/// dataset format, in level order.
class ProjectStore {
public:
    explicit ProjectStore(std::filesystem::path workspace) : dir_(std::move(workspace)) {
        std::filesystem::create_directories(dir_);
    }

    const std::filesystem::path& workspace() const { return dir_; }

    LevelProject create(std::optional<std::string> id = std::nullopt) {
        std::lock_guard registry(registry_mu_);
        std::string name = id ? *id : fresh_id();
        check_id(name);
        if (std::filesystem::exists(path_of(name))) throw Conflict("project " + name + " already exists");
        LevelProject p;
        p.id = name;
        p.created = p.modified = now();
        save(p);
        return p;
    }

    LevelProject get(const std::string& id) const {
        check_id(id);
        const auto path = path_of(id);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw NotFound("no project named " + id);
        std::string line;
        if (!std::getline(in, line)) throw Error("bad_record", path.string() + ": missing header");
        LevelProject p;
        try {
            const auto h = Json::parse(line);
            p.id = h.at("project").get<std::string>();
            p.version = h.at("version").get<std::uint64_t>();
            p.created = h.at("created").get<std::int64_t>();
            p.modified = h.at("modified").get<std::int64_t>();
        } catch (const Json::exception& e) {
            throw Error("bad_record", path.string() + ": bad header: " + e.what());
        }
        for (const auto& rec : read_records(in, false)) p.scenes.push_back(rec.grid());
        return p;
    }

    std::vector<std::string> list() const {
        std::vector<std::string> ids;
        for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
            if (entry.path().extension() == ".jsonl") ids.push_back(entry.path().stem().string());
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    }

    void remove(const std::string& id) {
        auto lock = lock_project(id);
        if (!std::filesystem::remove(path_of(id))) throw NotFound("no project named " + id);
    }

    /// Adds a scene at the end. Existing scenes are left as they are.
    LevelProject append(const std::string& id, const TileGrid& scene, std::optional<std::uint64_t> expected = {}) {
        if (scene.height() != kSceneHeight) {
            throw Error("bad_height", "project scenes must have 16 rows, got " + std::to_string(scene.height()));
        }
        return mutate(id, expected, [&](LevelProject& p) { p.scenes.push_back(scene); });
    }

    /// Moves the scene at `from` so that it ends up at index `to`.
    LevelProject move(const std::string& id, std::size_t from, std::size_t to, std::optional<std::uint64_t> expected = {}) {
        return mutate(id, expected, [&](LevelProject& p) {
            check_index(p, from);
            check_index(p, to);
            auto scene = p.scenes[from];
            p.scenes.erase(p.scenes.begin() + static_cast<std::ptrdiff_t>(from));
            p.scenes.insert(p.scenes.begin() + static_cast<std::ptrdiff_t>(to), std::move(scene));
        });
    }

    LevelProject erase(const std::string& id, std::size_t index, std::optional<std::uint64_t> expected = {}) {
        return mutate(id, expected, [&](LevelProject& p) {
            check_index(p, index);
            p.scenes.erase(p.scenes.begin() + static_cast<std::ptrdiff_t>(index));
        });
    }

    /// Holds the project's mutation lock; used by tests to provoke conflicts.
    std::unique_lock<std::mutex> lock_project(const std::string& id) {
        check_id(id);
        std::unique_lock lock(mutex_for(id), std::try_to_lock);
        if (!lock.owns_lock()) throw Conflict("project " + id + " is being modified; retry");
        return lock;
    }

private:
    std::filesystem::path dir_;
    mutable std::mutex registry_mu_;
    std::map<std::string, std::unique_ptr<std::mutex>> locks_;
    std::uint64_t counter_ = 0;

    static std::int64_t now() {
        return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
    }

    static void check_id(const std::string& id) {
        const bool ok = !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
        });
        if (!ok) throw Error("bad_request", "project ids use letters, digits, '-' and '_' (at most 64)");
    }

    static void check_index(const LevelProject& p, std::size_t i) {
        if (i >= p.scenes.size()) {
            throw Error("bad_request", "scene index " + std::to_string(i) + " out of range for " +
                                           std::to_string(p.scenes.size()) + " scenes");
        }
    }

    std::filesystem::path path_of(const std::string& id) const { return dir_ / (id + ".jsonl"); }

    std::string fresh_id() {
        while (true) {
            std::string id = "project-" + std::to_string(++counter_);
            if (!std::filesystem::exists(path_of(id))) return id;
        }
    }

    std::mutex& mutex_for(const std::string& id) {
        std::lock_guard registry(registry_mu_);
        auto& slot = locks_[id];
        if (!slot) slot = std::make_unique<std::mutex>();
        return *slot;
    }

    template <class Fn>
    LevelProject mutate(const std::string& id, std::optional<std::uint64_t> expected, Fn fn) {
        auto lock = lock_project(id);
        LevelProject p = get(id);
        if (expected && *expected != p.version) {
            throw Conflict("project " + id + " is at version " + std::to_string(p.version) + ", not " +
                           std::to_string(*expected) + "; reload and retry");
        }
        fn(p);
        ++p.version;
        p.modified = now();
        save(p);
        return p;
    }

    // write-then-rename
    void save(const LevelProject& p) const {
        const auto path = path_of(p.id);
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("io_error", "cannot write " + tmp.string());
            out << Json{{"project", p.id}, {"version", p.version}, {"created", p.created}, {"modified", p.modified}}.dump()
                << '\n';
            for (std::size_t i = 0; i < p.scenes.size(); ++i) {
                out << to_json(make_record(p.scenes[i], RecordSource{p.id, static_cast<int>(i)})).dump() << '\n';
            }
        }
        std::filesystem::rename(tmp, path);
    }
};

/// Workspace named by LEVEL_FORGE_WORKSPACE, else ./workspace.
inline std::filesystem::path default_workspace() {
    const char* env = std::getenv("LEVEL_FORGE_WORKSPACE");
    return env ? std::filesystem::path(env) : std::filesystem::path("workspace");
}

} // namespace level_forge
