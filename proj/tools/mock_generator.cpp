// Stand-in scene generator for protocol conformance tests. Reads one request
// per line on stdin and answers on stdout according to the mode argument:
//   ok            constructive scenes (the default)
//   sky           all-sky scenes
//   bad-height    15-row scenes
//   bad-width     rows one column short
//   bad-alphabet  a '#' tile in every scene
//   bad-id        echoes the wrong id
//   wrong-count   one scene fewer than requested
//   error         an error object instead of scenes
//   garbage       a line that is not JSON
//   hang          never answers
//   exit          exits without answering

#include <chrono>
#include <iostream>
#include <string>
#include <thread>

#include "level_forge/generator.hpp"
#include "level_forge/protocol.hpp"

using namespace level_forge;

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "ok";
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        if (mode == "exit") return 3;
        if (mode == "hang") {
            std::this_thread::sleep_for(std::chrono::hours(1));
            return 0;
        }
        if (mode == "garbage") {
            std::cout << "this is not json" << std::endl;
            continue;
        }

        GenRequest req;
        GenResponse resp;
        try {
            req = request_from_json(Json::parse(line));
        } catch (const std::exception& e) {
            resp.error = GenError{"bad_request", e.what()};
            std::cout << to_json(resp).dump() << std::endl;
            continue;
        }
        resp.id = mode == "bad-id" ? req.id + "-x" : req.id;
        if (mode == "error") {
            resp.error = GenError{"model_unavailable", "mock generator refuses"};
            std::cout << to_json(resp).dump() << std::endl;
            continue;
        }

        const int count = mode == "wrong-count" ? req.num_samples - 1 : req.num_samples;
        for (int i = 0; i < count; ++i) {
            std::vector<std::string> rows;
            if (mode == "ok") {
                try {
                    rows = to_rows(generate_constructive(req.prompt, req.seed + static_cast<std::uint64_t>(i), req.width).grid);
                } catch (const Error& e) {
                    resp.error = GenError{e.code(), e.what()};
                    break;
                }
            } else {
                rows.assign(kSceneHeight, std::string(static_cast<std::size_t>(req.width), '-'));
            }
            if (mode == "bad-height") rows.pop_back();
            if (mode == "bad-width") rows[3].pop_back();
            if (mode == "bad-alphabet") rows[5][2] = '#';
            resp.scenes.push_back(std::move(rows));
        }
        if (resp.error) resp.scenes.clear();
        std::cout << to_json(resp).dump() << std::endl;
    }
    return 0;
}
