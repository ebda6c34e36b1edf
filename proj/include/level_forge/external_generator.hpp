#pragma once

#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>

#include <httplib.h>

#include "level_forge/generator.hpp"
#include "level_forge/protocol.hpp"

namespace level_forge {

/// Anything that answers generation requests.
class SceneGenerator {
public:
    virtual ~SceneGenerator() = default;
    /// Raw response; callers validate it with validate_response.
    virtual GenResponse generate(const GenRequest& request) = 0;
    virtual std::string describe() const = 0;
};

/// The constructive generator behind the wire interface. Sample i uses seed + i.
class InTreeGenerator : public SceneGenerator {
public:
    explicit InTreeGenerator(GeneratorConfig cfg = {}) : cfg_(cfg) {}

    GenResponse generate(const GenRequest& request) override {
        GenResponse resp;
        resp.id = request.id;
        Caption prompt;
        try {
            prompt = parse_caption(request.prompt);
            if (request.negative_prompt) parse_caption(*request.negative_prompt, CaptionStyle::Negative);
        } catch (const Error& e) {
            resp.error = GenError{e.code(), e.what()};
            return resp;
        }
        for (int i = 0; i < request.num_samples; ++i) {
            const auto result = generate_constructive(prompt, request.seed + static_cast<std::uint64_t>(i), request.width, cfg_);
            resp.scenes.push_back(to_rows(result.grid));
        }
        return resp;
    }

    std::string describe() const override { return "builtin"; }

private:
    GeneratorConfig cfg_;
};

/// A child process speaking newline-delimited JSON on stdin/stdout. The
/// process is started lazily and reused; requests are serialized.
class ProcessGenerator : public SceneGenerator {
public:
    explicit ProcessGenerator(std::string command, std::chrono::milliseconds timeout = std::chrono::seconds(120))
        : command_(std::move(command)), timeout_(timeout) {}

    ~ProcessGenerator() override { shutdown(); }

    ProcessGenerator(const ProcessGenerator&) = delete;
    ProcessGenerator& operator=(const ProcessGenerator&) = delete;

    GenResponse generate(const GenRequest& request) override {
        std::lock_guard lock(mu_);
        if (pid_ <= 0) spawn();
        std::string line = to_json(request).dump();
        line.push_back('\n');
        if (!write_all(line)) {
            shutdown();
            throw ProtocolViolation("generator process closed its input");
        }
        const std::string reply = read_line();
        Json j;
        try {
            j = Json::parse(reply);
        } catch (const Json::exception&) {
            throw ProtocolViolation("generator reply is not JSON: " + reply.substr(0, 120));
        }
        return response_from_json(j);
    }

    std::string describe() const override { return "exec:" + command_; }

private:
    std::string command_;
    std::chrono::milliseconds timeout_;
    std::mutex mu_;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string pending_;

    void spawn() {
        ::signal(SIGPIPE, SIG_IGN);
        int in_pipe[2], out_pipe[2];
        if (::pipe(in_pipe) != 0) throw Error("spawn_failed", "pipe() failed");
        if (::pipe(out_pipe) != 0) {
            ::close(in_pipe[0]);
            ::close(in_pipe[1]);
            throw Error("spawn_failed", "pipe() failed");
        }
        const pid_t pid = ::fork();
        if (pid < 0) throw Error("spawn_failed", "fork() failed");
        if (pid == 0) {
            ::setpgid(0, 0);
            ::dup2(in_pipe[0], STDIN_FILENO);
            ::dup2(out_pipe[1], STDOUT_FILENO);
            ::close(in_pipe[0]);
            ::close(in_pipe[1]);
            ::close(out_pipe[0]);
            ::close(out_pipe[1]);
            ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::setpgid(pid, pid);
        ::close(in_pipe[0]);
        ::close(out_pipe[1]);
        pid_ = pid;
        to_child_ = in_pipe[1];
        from_child_ = out_pipe[0];
        pending_.clear();
    }

    void shutdown() {
        if (to_child_ >= 0) ::close(to_child_);
        if (from_child_ >= 0) ::close(from_child_);
        to_child_ = from_child_ = -1;
        if (pid_ > 0) {
            ::kill(-pid_, SIGKILL); // the whole group, so a shell's children go too
            ::waitpid(pid_, nullptr, 0);
        }
        pid_ = -1;
    }

    bool write_all(const std::string& data) {
        std::size_t done = 0;
        while (done < data.size()) {
            const ssize_t n = ::write(to_child_, data.data() + done, data.size() - done);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) return false;
            done += static_cast<std::size_t>(n);
        }
        return true;
    }

    std::string read_line() {
        const auto deadline = std::chrono::steady_clock::now() + timeout_;
        while (true) {
            if (const auto nl = pending_.find('\n'); nl != std::string::npos) {
                std::string line = pending_.substr(0, nl);
                pending_.erase(0, nl + 1);
                return line;
            }
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) {
                shutdown();
                throw GeneratorTimeout("generator did not answer within " + std::to_string(timeout_.count()) + " ms");
            }
            pollfd pfd{from_child_, POLLIN, 0};
            const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
            if (ready < 0 && errno == EINTR) continue;
            if (ready == 0) continue;
            char buf[4096];
            const ssize_t n = ::read(from_child_, buf, sizeof buf);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) {
                shutdown();
                throw ProtocolViolation("generator process exited before answering");
            }
            pending_.append(buf, static_cast<std::size_t>(n));
        }
    }
};

/// Same payloads as ProcessGenerator, sent as HTTP POST bodies.
class HttpGenerator : public SceneGenerator {
public:
    HttpGenerator(const std::string& url, std::chrono::milliseconds timeout = std::chrono::seconds(120)) : url_(url) {
        // url: http://host:port[/path]
        const auto scheme_end = url.find("://");
        const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        const auto path_start = url.find('/', host_start);
        base_ = url.substr(0, path_start);
        path_ = path_start == std::string::npos ? "/generate" : url.substr(path_start);
        client_ = std::make_unique<httplib::Client>(base_);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
        client_->set_read_timeout(secs.count(), usecs.count());
        client_->set_write_timeout(secs.count(), usecs.count());
        client_->set_connection_timeout(secs.count(), usecs.count());
    }

    GenResponse generate(const GenRequest& request) override {
        std::lock_guard lock(mu_);
        auto res = client_->Post(path_, to_json(request).dump(), "application/json");
        if (!res) {
            if (res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout) {
                throw GeneratorTimeout("generator at " + url_ + " timed out");
            }
            throw GeneratorError("unreachable", "generator at " + url_ + ": " + httplib::to_string(res.error()));
        }
        Json j;
        try {
            j = Json::parse(res->body);
        } catch (const Json::exception&) {
            throw ProtocolViolation("HTTP " + std::to_string(res->status) + " reply is not JSON");
        }
        return response_from_json(j);
    }

    std::string describe() const override { return url_; }

private:
    std::string url_, base_, path_;
    std::unique_ptr<httplib::Client> client_;
    std::mutex mu_;
};

/// "builtin" (or empty), "exec:<shell command>", or "http://host:port[/path]".
inline std::unique_ptr<SceneGenerator> make_generator(const std::string& endpoint,
                                                      std::chrono::milliseconds timeout = std::chrono::seconds(120)) {
    if (endpoint.empty() || endpoint == "builtin") return std::make_unique<InTreeGenerator>();
    if (endpoint.rfind("exec:", 0) == 0) return std::make_unique<ProcessGenerator>(endpoint.substr(5), timeout);
    if (endpoint.rfind("http://", 0) == 0) return std::make_unique<HttpGenerator>(endpoint, timeout);
    throw Error("bad_endpoint", "unrecognized generator endpoint: " + endpoint);
}

/// Endpoint named by LEVEL_FORGE_GENERATOR, or the built-in generator.
inline std::string default_generator_endpoint() {
    const char* env = std::getenv("LEVEL_FORGE_GENERATOR");
    return env ? std::string(env) : std::string("builtin");
}

/// Sends a request and returns the validated response.
inline GenResponse generate_external(SceneGenerator& generator, const GenRequest& request) {
    GenResponse resp = generator.generate(request);
    validate_response(request, resp);
    return resp;
}

} // namespace level_forge
