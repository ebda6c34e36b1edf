// level_forge command-line interface.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "level_forge/level_forge.hpp"

namespace fs = std::filesystem;
using namespace level_forge;

namespace {

enum class Format { Table, Records };

struct Common {
    std::string format = "table";
    std::uint64_t seed = 0;

    Format fmt() const { return format == "records" ? Format::Records : Format::Table; }
};

std::string fixed(double v, int digits = 3) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

fs::path corpus_path(const std::string& given) {
    if (!given.empty() && given != "corpus") return given;
    const char* env = std::getenv("LEVEL_FORGE_CORPUS");
    if (!env) throw Error("not_found", "no corpus given and LEVEL_FORGE_CORPUS is not set");
    return env;
}

std::vector<DatasetRecord> load_records(const std::string& path) {
    const fs::path p = corpus_path(path);
    if (fs::is_directory(p)) return build_dataset(p);
    return read_dataset(p);
}

SceneSet load_set(const std::string& path) {
    const fs::path p = corpus_path(path);
    return load_scene_set(p);
}

void print_breakdown(const Caption& prompt, const Caption& actual, const ScoreBreakdown& b) {
    const auto pm = prompt.semantic();
    const auto am = actual.semantic();
    std::cout << std::left << std::setw(28) << "concept" << std::setw(36) << "prompt" << std::setw(36) << "actual"
              << "match\n";
    for (Concept c : kAllConcepts) {
        const auto k = static_cast<std::size_t>(index_of(c));
        if (!pm[k] && !am[k]) continue;
        std::cout << std::setw(28) << concept_name(c) << std::setw(36) << (pm[k] ? phrase_text(*pm[k]) : "-")
                  << std::setw(36) << (am[k] ? phrase_text(*am[k]) : "-") << fixed(b[c], 2) << "\n";
    }
    std::cout << std::right << "c_score " << fixed(b.c_score) << "\n";
}

void print_scene(const TileGrid& g) { std::cout << serialize(g) << "\n"; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tile-level platformer scene toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--format", common.format, "table or records")
        ->check(CLI::IsMember({"table", "records"}))
        ->capture_default_str();
    app.add_option("--seed", common.seed, "random seed")->capture_default_str();

    std::function<int()> action;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Slice and caption a directory of level files into a dataset");
    std::string ingest_dir, ingest_out;
    bool ingest_solv = false;
    ingest->add_option("corpus", ingest_dir, "level directory (default: $LEVEL_FORGE_CORPUS)");
    ingest->add_option("-o,--output", ingest_out, "dataset file (JSONL); stdout when omitted");
    ingest->add_flag("--solvability", ingest_solv, "also run the solvability check on every scene");
    ingest->callback([&] {
        action = [&] {
            BuildOptions opts;
            opts.with_solvability = ingest_solv;
            const auto records = build_dataset(corpus_path(ingest_dir), opts);
            if (ingest_out.empty()) {
                write_records(std::cout, records);
            } else {
                write_dataset(ingest_out, records);
                if (common.fmt() == Format::Records) {
                    std::cout << Json{{"records", records.size()}, {"output", ingest_out}}.dump() << "\n";
                } else {
                    std::cout << "records " << records.size() << "\nwritten " << ingest_out << "\n";
                }
            }
            return 0;
        };
    });

    // caption
    auto* caption = app.add_subcommand("caption", "Caption scene files");
    std::string caption_style = "regular";
    std::vector<std::string> caption_files;
    caption->add_option("--style", caption_style, "regular, absence, negative or all")
        ->check(CLI::IsMember({"regular", "absence", "negative", "all"}));
    caption->add_option("scenes", caption_files, "scene files (14 or 16 rows)")->required();
    caption->callback([&] {
        action = [&] {
            for (const auto& f : caption_files) {
                const auto report = detect(read_scene_file(f));
                Json j{{"file", f}};
                for (auto style : {CaptionStyle::Regular, CaptionStyle::Absence, CaptionStyle::Negative}) {
                    if (caption_style == "all" || caption_style == style_name(style)) {
                        j[std::string(style_name(style))] = render(report, style).text();
                    }
                }
                if (common.fmt() == Format::Records) {
                    j["report"] = to_json(report);
                    std::cout << j.dump() << "\n";
                } else if (caption_style == "all") {
                    std::cout << f << "\n";
                    for (auto& [k, v] : j.items()) {
                        if (k != "file") std::cout << "  " << k << ": " << v.get<std::string>() << "\n";
                    }
                } else {
                    std::cout << j[caption_style].get<std::string>() << "\n";
                }
            }
            return 0;
        };
    });

    // score
    auto* score = app.add_subcommand("score", "Caption adherence of a scene (or caption) to a prompt");
    std::string score_prompt, score_scene, score_caption;
    score->add_option("--prompt", score_prompt, "prompt caption")->required();
    auto* score_scene_opt = score->add_option("--scene", score_scene, "scene file");
    auto* score_caption_opt = score->add_option("--caption", score_caption, "actual caption text");
    score_scene_opt->excludes(score_caption_opt);
    score->callback([&] {
        action = [&] {
            if (!*score_scene_opt && !*score_caption_opt) throw CLI::RequiredError("--scene or --caption");
            const auto prompt = parse_caption(score_prompt);
            const auto actual = *score_scene_opt ? render(detect(read_scene_file(score_scene))) : parse_caption(score_caption);
            const auto b = c_score(prompt, actual);
            if (common.fmt() == Format::Records) {
                Json j = to_json(b);
                j["caption"] = actual.text();
                std::cout << j.dump() << "\n";
            } else {
                print_breakdown(prompt, actual, b);
            }
            return 0;
        };
    });

    std::string generator_endpoint = default_generator_endpoint();
    double timeout_s = 120.0;
    auto add_generator_opts = [&](CLI::App* sub) {
        sub->add_option("--generator", generator_endpoint, "builtin, exec:<command> or http://host:port");
        sub->add_option("--timeout", timeout_s, "generator timeout in seconds");
    };
    auto timeout_ms = [&] { return std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0)); };

    // tolerance
    auto* tol = app.add_subcommand("tolerance", "Mean c-score over phrase-order permutations of a prompt");
    std::string tol_prompt;
    int tol_perms = 5;
    tol->add_option("--prompt", tol_prompt, "prompt caption")->required();
    tol->add_option("--perms", tol_perms, "permutations to try")->check(CLI::PositiveNumber);
    add_generator_opts(tol);
    tol->callback([&] {
        action = [&] {
            auto gen = make_generator(generator_endpoint, timeout_ms());
            int call = 0;
            const auto result = tolerance(
                parse_caption(tol_prompt),
                [&](const Caption& perm) {
                    GenRequest req;
                    req.id = "tolerance-" + std::to_string(call++);
                    req.prompt = perm.text();
                    req.seed = common.seed;
                    const auto grids = validate_response(req, generate_external(*gen, req));
                    return render(detect(grids.front()));
                },
                tol_perms, common.seed);
            if (common.fmt() == Format::Records) {
                Json perms = Json::array();
                for (std::size_t i = 0; i < result.permutations.size(); ++i) perms.push_back(result.permutations[i].text());
                std::cout << Json{{"tolerance", result.value}, {"permutations", perms}, {"scores", result.scores},
                                  {"failures", result.failures}}
                                 .dump()
                          << "\n";
            } else {
                for (std::size_t i = 0; i < result.scores.size(); ++i) {
                    std::cout << fixed(result.scores[i]) << "  " << result.permutations[i].text() << "\n";
                }
                std::cout << "tolerance " << fixed(result.value) << "\n";
            }
            return 0;
        };
    });

    // metrics
    auto* metrics = app.add_subcommand("metrics", "Diversity and integrity metrics over scene sets");
    metrics->require_subcommand(1);
    std::string m_set, m_real;
    std::size_t m_even = 0, m_random = 0;
    auto pick = [&](SceneSet set) {
        if (m_even > 0) return sample_evenly(set, m_even);
        if (m_random > 0) return sample_random(set, m_random, common.seed);
        return set;
    };
    auto add_set_opts = [&](CLI::App* sub) {
        sub->add_option("--set", m_set, "corpus directory, JSONL records, scene text file, or 'corpus'")->required();
        auto* even = sub->add_option("--sample-evenly", m_even, "use n evenly spaced scenes");
        sub->add_option("--sample-random", m_random, "use n random scenes")->excludes(even);
    };
    auto* amed_self_cmd = metrics->add_subcommand("amed-self", "Average pairwise edit distance within a set");
    add_set_opts(amed_self_cmd);
    amed_self_cmd->callback([&] {
        action = [&] {
            const auto set = pick(load_set(m_set));
            const double v = amed_self(set);
            if (common.fmt() == Format::Records) {
                std::cout << Json{{"metric", "amed_self"}, {"scenes", set.scenes.size()}, {"value", v}}.dump() << "\n";
            } else {
                std::cout << "scenes " << set.scenes.size() << "\named_self " << fixed(v, 4) << "\n";
            }
            return 0;
        };
    });
    auto* amed_real_cmd = metrics->add_subcommand("amed-real", "Mean nearest-neighbour distance to a reference set");
    add_set_opts(amed_real_cmd);
    amed_real_cmd->add_option("--real", m_real, "reference set (default: corpus)");
    amed_real_cmd->callback([&] {
        action = [&] {
            const auto set = pick(load_set(m_set));
            const auto real = load_set(m_real);
            const double v = amed_real(set, real);
            if (common.fmt() == Format::Records) {
                std::cout << Json{{"metric", "amed_real"}, {"scenes", set.scenes.size()}, {"value", v}}.dump() << "\n";
            } else {
                std::cout << "scenes " << set.scenes.size() << "\named_real " << fixed(v, 4) << "\n";
            }
            return 0;
        };
    });
    auto* integrity_cmd = metrics->add_subcommand("integrity", "Broken pipe and cannon rates");
    add_set_opts(integrity_cmd);
    integrity_cmd->callback([&] {
        action = [&] {
            const auto r = integrity_rates(pick(load_set(m_set)));
            if (common.fmt() == Format::Records) {
                std::cout << to_json(r).dump() << "\n";
            } else {
                std::cout << "scenes " << r.scenes << "\nbroken_pipe_pct " << fixed(r.broken_pipe_pct, 2)
                          << "\nany_pipe_pct " << fixed(r.any_pipe_pct, 2) << "\nbroken_cannon_pct "
                          << fixed(r.broken_cannon_pct, 2) << "\nany_cannon_pct " << fixed(r.any_cannon_pct, 2) << "\n";
            }
            return 0;
        };
    });

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "A* solvability of levels or scene sets");
    std::vector<std::string> solve_files;
    MoveModel model;
    bool solve_path = false;
    solve_cmd->add_option("levels", solve_files, "level files, or one scene set with --set semantics")->required();
    solve_cmd->add_option("--max-jump", model.max_jump_height, "rows gained by a full jump");
    solve_cmd->add_option("--max-gap", model.max_gap_clear, "columns of air control per jump");
    solve_cmd->add_flag("--break-blocks", model.can_break_blocks, "allow breaking 'S' blocks from below");
    solve_cmd->add_flag("--path", solve_path, "print the witness path");
    solve_cmd->callback([&] {
        action = [&] {
            std::size_t beaten = 0, total = 0;
            for (const auto& f : solve_files) {
                std::vector<std::pair<std::string, TileGrid>> items;
                const fs::path p = f;
                if (fs::is_directory(p) || p.extension() == ".jsonl") {
                    const auto set = load_set(f);
                    for (std::size_t i = 0; i < set.scenes.size(); ++i) items.emplace_back(f + "#" + std::to_string(i), set.scenes[i]);
                } else {
                    items.emplace_back(f, read_scene_file(p));
                }
                for (const auto& [name, grid] : items) {
                    const auto r = solvable(grid, model);
                    ++total;
                    beaten += r.beatable;
                    if (common.fmt() == Format::Records) {
                        Json j = to_json(r);
                        j["file"] = name;
                        if (!solve_path) j.erase("path");
                        std::cout << j.dump() << "\n";
                    } else {
                        std::cout << name << "  " << (r.beatable ? "beatable" : "not beatable (" + r.reason + ")")
                                  << "  expanded " << r.expanded << "\n";
                        if (solve_path) {
                            for (const auto& s : r.path) std::cout << "  (" << s.column << "," << s.row << ")" << (s.grounded ? "" : " air") << "\n";
                        }
                    }
                }
            }
            if (common.fmt() == Format::Table && total > 1) {
                std::cout << "beatable " << beaten << "/" << total << " (" << fixed(100.0 * beaten / total, 2) << "%)\n";
            }
            return 0;
        };
    });

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "Generate scenes for a prompt");
    GenRequest gen_req;
    std::string gen_negative;
    std::string gen_out;
    gen_cmd->add_option("--prompt", gen_req.prompt, "prompt caption")->required();
    gen_cmd->add_option("--negative", gen_negative, "negative prompt (forwarded to external generators)");
    gen_cmd->add_option("-n,--samples", gen_req.num_samples, "number of scenes")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--width", gen_req.width, "scene width")->check(CLI::Range(16, 4096));
    gen_cmd->add_option("--steps", gen_req.steps, "inference steps (external generators)");
    gen_cmd->add_option("--guidance-scale", gen_req.guidance_scale, "guidance scale (external generators)");
    gen_cmd->add_option("-o,--output", gen_out, "write scenes as JSONL records");
    add_generator_opts(gen_cmd);
    gen_cmd->callback([&] {
        action = [&] {
            auto gen = make_generator(generator_endpoint, timeout_ms());
            gen_req.id = "cli";
            gen_req.seed = common.seed;
            if (!gen_negative.empty()) gen_req.negative_prompt = gen_negative;
            std::optional<Caption> prompt;
            try {
                prompt = parse_caption(gen_req.prompt);
            } catch (const Error&) {
                if (gen->describe() == "builtin") throw;
            }
            const auto grids = validate_response(gen_req, generate_external(*gen, gen_req));
            std::ofstream out;
            if (!gen_out.empty()) {
                out.open(gen_out, std::ios::binary);
                if (!out) throw Error("io_error", "cannot write " + gen_out);
            }
            for (std::size_t i = 0; i < grids.size(); ++i) {
                Json j{{"scene", rows_json(grids[i])}};
                const auto caption = render(detect(grids[i]));
                j["caption"] = caption.text();
                if (prompt) j["c_score"] = c_score(*prompt, caption).c_score;
                if (out.is_open()) out << j.dump() << "\n";
                if (common.fmt() == Format::Records) {
                    if (!out.is_open()) std::cout << j.dump() << "\n";
                } else {
                    print_scene(grids[i]);
                    std::cout << "caption: " << caption.text() << "\n";
                    if (prompt) std::cout << "c_score " << fixed(j["c_score"].get<double>()) << "\n";
                    std::cout << "\n";
                }
            }
            return 0;
        };
    });

    // random-prompts
    auto* rp = app.add_subcommand("random-prompts", "Sample prompts that no corpus caption matches");
    std::string rp_corpus;
    std::size_t rp_n = 100;
    rp->add_option("--corpus", rp_corpus, "dataset JSONL or level directory (default: $LEVEL_FORGE_CORPUS)");
    rp->add_option("-n", rp_n, "number of prompts")->check(CLI::PositiveNumber);
    rp->callback([&] {
        action = [&] {
            std::vector<DatasetRecord> corpus;
            if (!rp_corpus.empty() || std::getenv("LEVEL_FORGE_CORPUS")) corpus = load_records(rp_corpus);
            for (const auto& c : make_random_prompts(corpus, rp_n, common.seed)) {
                if (common.fmt() == Format::Records) std::cout << Json{{"prompt", c.text()}}.dump() << "\n";
                else std::cout << c.text() << "\n";
            }
            return 0;
        };
    });

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string workspace = default_workspace().string();
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "port")->check(CLI::Range(0, 65535));
    serve->add_option("--workspace", workspace, "project directory");
    add_generator_opts(serve);
    serve->callback([&] {
        action = [&] {
            ServiceConfig cfg;
            cfg.workspace = workspace;
            cfg.generator = generator_endpoint;
            cfg.generator_timeout = timeout_ms();
            Service svc(cfg);
            httplib::Server server;
            install_routes(server, svc);
            static httplib::Server* running = &server;
            std::signal(SIGINT, [](int) { running->stop(); });
            std::signal(SIGTERM, [](int) { running->stop(); });
            int bound = port;
            if (port == 0) {
                bound = server.bind_to_any_port(host);
            } else if (!server.bind_to_port(host, port)) {
                throw Error("io_error", "cannot bind " + host + ":" + std::to_string(port));
            }
            std::cerr << "listening on http://" << host << ":" << bound << " (generator: " << svc.generator().describe() << ")\n";
            server.listen_after_bind();
            return 0;
        };
    });

    // compose
    auto* compose = app.add_subcommand("compose", "Join scene files side by side into one level");
    std::vector<std::string> compose_files;
    std::string compose_out;
    compose->add_option("scenes", compose_files, "scene files in level order")->required();
    compose->add_option("-o,--output", compose_out, "level file; stdout when omitted");
    compose->callback([&] {
        action = [&] {
            std::vector<TileGrid> parts;
            for (const auto& f : compose_files) parts.push_back(read_scene_file(f));
            const std::string text = serialize(concatenate(parts)) + "\n";
            if (compose_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(compose_out, std::ios::binary);
                if (!out) throw Error("io_error", "cannot write " + compose_out);
                out << text;
            }
            return 0;
        };
    });

    // export
    auto* exp = app.add_subcommand("export", "Write a project as one ASCII level");
    std::string exp_project, exp_out;
    exp->add_option("project", exp_project, "project id")->required();
    exp->add_option("--workspace", workspace, "project directory");
    exp->add_option("-o,--output", exp_out, "level file; stdout when omitted");
    exp->callback([&] {
        action = [&] {
            ProjectStore store(workspace);
            const std::string text = store.get(exp_project).export_ascii();
            if (exp_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(exp_out, std::ios::binary);
                if (!out) throw Error("io_error", "cannot write " + exp_out);
                out << text;
            }
            return 0;
        };
    });

    // split
    auto* split_cmd = app.add_subcommand("split", "Split a dataset into train/val/test with concept coverage");
    std::string split_in, split_dir = ".";
    std::vector<std::size_t> split_sizes_opt;
    bool split_no_cov = false;
    split_cmd->add_option("dataset", split_in, "dataset JSONL or level directory")->required();
    split_cmd->add_option("--out-dir", split_dir, "directory for train.jsonl, val.jsonl, test.jsonl");
    split_cmd->add_option("--sizes", split_sizes_opt, "exact train,val,test sizes")->delimiter(',')->expected(3);
    split_cmd->add_flag("--no-coverage", split_no_cov, "skip the concept coverage requirement");
    split_cmd->callback([&] {
        action = [&] {
            const auto records = load_records(split_in);
            SplitOptions opts;
            opts.seed = common.seed;
            if (split_no_cov) opts.coverage_required.clear();
            if (!split_sizes_opt.empty()) opts.sizes = std::array<std::size_t, 3>{split_sizes_opt[0], split_sizes_opt[1], split_sizes_opt[2]};
            const auto parts = split(records, opts);
            fs::create_directories(split_dir);
            write_dataset(fs::path(split_dir) / "train.jsonl", parts.train);
            write_dataset(fs::path(split_dir) / "val.jsonl", parts.val);
            write_dataset(fs::path(split_dir) / "test.jsonl", parts.test);
            if (common.fmt() == Format::Records) {
                std::cout << Json{{"train", parts.train.size()}, {"val", parts.val.size()}, {"test", parts.test.size()},
                                  {"attempts", parts.attempts}}
                                 .dump()
                          << "\n";
            } else {
                std::cout << "train " << parts.train.size() << "\nval " << parts.val.size() << "\ntest " << parts.test.size()
                          << "\n";
            }
            return 0;
        };
    });

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics");
    std::string stats_in;
    stats_cmd->add_option("dataset", stats_in, "dataset JSONL or level directory (default: $LEVEL_FORGE_CORPUS)");
    stats_cmd->callback([&] {
        action = [&] {
            const auto s = corpus_stats(load_records(stats_in));
            if (common.fmt() == Format::Records) {
                std::cout << to_json(s).dump() << "\n";
                return 0;
            }
            std::cout << "scenes " << s.scenes << "\nvocab_regular " << s.vocab_regular << "\nvocab_absence "
                      << s.vocab_absence << "\n";
            if (s.solvable) std::cout << "solvable " << *s.solvable << "\n";
            std::cout << std::left << std::setw(28) << "concept" << std::setw(10) << "scenes" << "instances\n";
            for (Concept c : kAllConcepts) {
                const auto k = static_cast<std::size_t>(index_of(c));
                std::cout << std::setw(28) << concept_name(c) << std::setw(10) << s.scenes_with[k] << s.instances[k] << "\n";
            }
            return 0;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return action ? action() : 2;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const level_forge::Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
