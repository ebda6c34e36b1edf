#pragma once

#include <algorithm>
#include <cmath>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "level_forge/caption.hpp"
#include "level_forge/concepts.hpp"
#include "level_forge/diversity.hpp"
#include "level_forge/json_io.hpp"
#include "level_forge/random.hpp"
#include "level_forge/solvability.hpp"
#include "level_forge/tile.hpp"

namespace level_forge {

struct RecordSource {
    std::string level;
    int window = 0;
    friend bool operator==(const RecordSource&, const RecordSource&) = default;
};

/// One 16x16 training sample with its three captions.
struct DatasetRecord {
    std::vector<std::string> scene;
    std::string regular;
    std::string absence;
    std::string negative;
    RecordSource source;
    std::optional<bool> solvable;

    TileGrid grid() const { return grid_from_rows(scene); }
};

class EmptyCorpus : public Error {
public:
    explicit EmptyCorpus(const std::string& where) : Error("empty_corpus", "no level files in " + where) {}
};

class CoverageUnsatisfiable : public Error {
public:
    explicit CoverageUnsatisfiable(std::vector<Concept> missing)
        : Error("coverage_unsatisfiable", message(missing)), missing_(std::move(missing)) {}
    const std::vector<Concept>& missing() const { return missing_; }

private:
    std::vector<Concept> missing_;

    static std::string message(const std::vector<Concept>& missing) {
        std::string out = "cannot place every required concept in every split:";
        for (Concept c : missing) out += " " + std::string(concept_name(c));
        return out;
    }
};

inline DatasetRecord make_record(const TileGrid& scene, RecordSource source, const DetectorConfig& cfg = {}) {
    const auto report = detect(scene, cfg);
    DatasetRecord rec;
    rec.scene = to_rows(scene);
    rec.regular = render(report, CaptionStyle::Regular).text();
    rec.absence = render(report, CaptionStyle::Absence).text();
    rec.negative = render(report, CaptionStyle::Negative).text();
    rec.source = std::move(source);
    return rec;
}

/// Pads a level to 16 rows and captions every 16-wide window.
inline std::vector<DatasetRecord> records_from_level(const LevelSource& level, const DetectorConfig& cfg = {}) {
    const auto grid = pad_to_height(level);
    const auto windows = slide_windows(grid);
    std::vector<DatasetRecord> out(windows.size());
    detail::parallel_for(windows.size(), [&](std::size_t i) {
        out[i] = make_record(windows[i], RecordSource{level.name, static_cast<int>(i)}, cfg);
    });
    return out;
}

/// Level files (*.txt) of a corpus directory in name order.
inline std::vector<std::filesystem::path> level_files(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error("not_found", "corpus directory does not exist: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io_error", "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline LevelSource load_level(const std::filesystem::path& path) {
    try {
        return parse_level(read_file(path), path.stem().string());
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

struct BuildOptions {
    DetectorConfig detector;
    bool with_solvability = false;
    MoveModel model;
};

/// One record per window of every level in `dir`, ordered by (level name, window).
inline std::vector<DatasetRecord> build_dataset(const std::filesystem::path& dir, const BuildOptions& opts = {}) {
    const auto files = level_files(dir);
    if (files.empty()) throw EmptyCorpus(dir.string());
    std::vector<DatasetRecord> out;
    for (const auto& f : files) {
        const auto level = load_level(f);
        std::vector<DatasetRecord> recs;
        try {
            recs = records_from_level(level, opts.detector);
        } catch (const Error& e) {
            throw Error(e.code(), f.string() + ": " + e.what());
        }
        for (auto& r : recs) out.push_back(std::move(r));
    }
    if (opts.with_solvability) {
        detail::parallel_for(out.size(), [&](std::size_t i) {
            out[i].solvable = solvable(out[i].grid(), opts.model).beatable;
        });
    }
    return out;
}

inline SceneSet scene_set(const std::vector<DatasetRecord>& records, std::string label = "corpus") {
    SceneSet set{std::move(label), {}};
    set.scenes.reserve(records.size());
    for (const auto& r : records) set.scenes.push_back(r.grid());
    return set;
}

// Persistence: one JSON object per line.

inline Json to_json(const DatasetRecord& r) {
    Json j{{"scene", r.scene},
           {"regular", r.regular},
           {"absence", r.absence},
           {"negative", r.negative},
           {"source", Json{{"level", r.source.level}, {"window", r.source.window}}}};
    if (r.solvable) j["solvable"] = *r.solvable;
    return j;
}

inline DatasetRecord record_from_json(const Json& j) {
    DatasetRecord r;
    try {
        r.scene = j.at("scene").get<std::vector<std::string>>();
        r.regular = j.at("regular").get<std::string>();
        r.absence = j.at("absence").get<std::string>();
        r.negative = j.at("negative").get<std::string>();
        const auto& src = j.at("source");
        r.source.level = src.at("level").get<std::string>();
        r.source.window = src.at("window").get<int>();
        if (j.contains("solvable") && !j.at("solvable").is_null()) r.solvable = j.at("solvable").get<bool>();
    } catch (const Json::exception& e) {
        throw Error("bad_record", std::string("malformed dataset record: ") + e.what());
    }
    if (r.scene.size() != static_cast<std::size_t>(kSceneHeight)) {
        throw Error("bad_record", "dataset scene must have 16 rows, got " + std::to_string(r.scene.size()));
    }
    return r;
}

inline void write_records(std::ostream& out, const std::vector<DatasetRecord>& records) {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io_error", "cannot write " + path.string());
    write_records(out, records);
}

/// Checks that the stored captions are what the captioner says about the scene.
inline void verify_record(const DatasetRecord& r, const DetectorConfig& cfg = {}) {
    const auto fresh = make_record(r.grid(), r.source, cfg);
    auto check = [&](const std::string& stored, const std::string& derived, const char* which) {
        if (stored != derived) {
            throw Error("caption_mismatch", r.source.level + "#" + std::to_string(r.source.window) + ": stored " + which +
                                                " caption \"" + stored + "\" but the scene captions to \"" + derived + "\"");
        }
    };
    check(r.regular, fresh.regular, "regular");
    check(r.absence, fresh.absence, "absence");
    check(r.negative, fresh.negative, "negative");
}

inline std::vector<DatasetRecord> read_records(std::istream& in, bool verify = true, const DetectorConfig& cfg = {}) {
    std::vector<DatasetRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        try {
            Json j;
            try {
                j = Json::parse(line);
            } catch (const Json::exception& e) {
                throw Error("bad_record", e.what());
            }
            auto rec = record_from_json(j);
            if (verify) verify_record(rec, cfg);
            out.push_back(std::move(rec));
        } catch (const Error& e) {
            throw Error(e.code(), "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path, bool verify = true,
                                               const DetectorConfig& cfg = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io_error", "cannot read " + path.string());
    try {
        return read_records(in, verify, cfg);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

/// Stable 64-bit FNV-1a, for per-record seeds.
inline std::uint64_t stable_hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// The record's caption with its phrases shuffled for one training epoch.
inline std::string augmented_caption(const DatasetRecord& r, std::uint64_t epoch, CaptionStyle style = CaptionStyle::Regular) {
    const std::string& text = style == CaptionStyle::Regular ? r.regular : style == CaptionStyle::Absence ? r.absence : r.negative;
    const auto seed = mix_seed(stable_hash(r.source.level) ^ static_cast<std::uint64_t>(r.source.window), epoch);
    return shuffle_phrases(parse_caption(text, style), seed).text();
}

/// A single scene or level file; 14-row levels are padded to 16 rows.
inline TileGrid read_scene_file(const std::filesystem::path& path) {
    const auto level = load_level(path);
    try {
        return level.original_height < kSceneHeight ? pad_to_height(level) : to_grid(level);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

/// Scenes from a corpus directory, a JSONL file of records (any object with a
/// "scene" field), or a text file of 16-row scenes separated by blank lines.
inline SceneSet load_scene_set(const std::filesystem::path& path) {
    SceneSet set{path.stem().string(), {}};
    if (std::filesystem::is_directory(path)) {
        for (const auto& r : build_dataset(path)) set.scenes.push_back(r.grid());
        return set;
    }
    const std::string text = read_file(path);
    if (path.extension() == ".jsonl") {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line == "\r") continue;
            try {
                set.scenes.push_back(grid_from_json(Json::parse(line).at("scene")));
            } catch (const Json::exception& e) {
                throw Error("bad_record", path.string() + ": line " + std::to_string(lineno) + ": " + e.what());
            } catch (const Error& e) {
                throw Error(e.code(), path.string() + ": line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        return set;
    }
    std::istringstream in(text);
    std::vector<std::string> rows;
    std::string line;
    auto flush = [&] {
        if (rows.empty()) return;
        try {
            set.scenes.push_back(pad_to_height(grid_from_rows(rows)));
        } catch (const Error& e) {
            throw Error(e.code(), path.string() + ": scene " + std::to_string(set.scenes.size()) + ": " + e.what());
        }
        rows.clear();
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) flush();
        else rows.push_back(line);
    }
    flush();
    return set;
}

// Splits.

inline std::vector<Concept> training_concepts() {
    std::vector<Concept> out;
    for (Concept c : kAllConcepts) {
        if (is_training_concept(c)) out.push_back(c);
    }
    return out;
}

struct SplitOptions {
    std::array<double, 3> fractions{0.90, 0.05, 0.05};
    std::uint64_t seed = 0;
    std::vector<Concept> coverage_required = training_concepts();
    /// Exact (train, val, test) sizes; overrides the fractions.
    std::optional<std::array<std::size_t, 3>> sizes;
    int max_attempts = 200;
    DetectorConfig detector;
};

struct Split {
    std::vector<DatasetRecord> train, val, test;
    int attempts = 0;
};

/// Validation and test sizes are floor(N * fraction); the remainder goes to training.
inline std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitOptions& opts) {
    if (opts.sizes) {
        const auto& s = *opts.sizes;
        if (s[0] + s[1] + s[2] != n) {
            throw Error("bad_split", "requested split sizes sum to " + std::to_string(s[0] + s[1] + s[2]) + ", dataset has " +
                                         std::to_string(n));
        }
        return s;
    }
    const double sum = opts.fractions[0] + opts.fractions[1] + opts.fractions[2];
    if (std::abs(sum - 1.0) > 1e-9) throw Error("bad_split", "split fractions must sum to 1");
    for (double f : opts.fractions) {
        if (f < 0.0) throw Error("bad_split", "split fractions must be non-negative");
    }
    // small epsilon keeps 0.05 * 20 from landing just below 1
    const auto val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * opts.fractions[1] + 1e-9));
    const auto test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * opts.fractions[2] + 1e-9));
    return {n - val - test, val, test};
}

/// Seeded shuffle into train/validation/test, reshuffled until every
/// non-empty split shows each required concept at least once.
inline Split split(const std::vector<DatasetRecord>& records, const SplitOptions& opts = {}) {
    const auto sizes = split_sizes(records.size(), opts);
    std::vector<std::array<bool, kConceptCount>> present(records.size());
    detail::parallel_for(records.size(), [&](std::size_t i) {
        const auto report = detect(records[i].grid(), opts.detector);
        for (Concept c : kAllConcepts) present[i][static_cast<std::size_t>(index_of(c))] = report.present(c);
    });

    const int nonempty = static_cast<int>(std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }));
    std::vector<Concept> hopeless;
    for (Concept c : opts.coverage_required) {
        const auto k = static_cast<std::size_t>(index_of(c));
        const auto have = std::count_if(present.begin(), present.end(), [&](const auto& p) { return p[k]; });
        if (have < nonempty) hopeless.push_back(c);
    }
    if (!hopeless.empty()) throw CoverageUnsatisfiable(hopeless);

    std::vector<std::size_t> order(records.size());
    std::vector<Concept> missing;
    for (int attempt = 0; attempt < std::max(1, opts.max_attempts); ++attempt) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(mix_seed(opts.seed, static_cast<std::uint64_t>(attempt)));
        rng.shuffle(std::span<std::size_t>(order));

        missing.clear();
        std::size_t begin = 0;
        for (std::size_t part = 0; part < 3; ++part) {
            const std::size_t end = begin + sizes[part];
            if (sizes[part] > 0) {
                for (Concept c : opts.coverage_required) {
                    const auto k = static_cast<std::size_t>(index_of(c));
                    bool found = false;
                    for (std::size_t i = begin; i < end && !found; ++i) found = present[order[i]][k];
                    if (!found && std::find(missing.begin(), missing.end(), c) == missing.end()) missing.push_back(c);
                }
            }
            begin = end;
        }
        if (missing.empty()) {
            Split out;
            out.attempts = attempt + 1;
            std::size_t i = 0;
            for (; i < sizes[0]; ++i) out.train.push_back(records[order[i]]);
            for (; i < sizes[0] + sizes[1]; ++i) out.val.push_back(records[order[i]]);
            for (; i < records.size(); ++i) out.test.push_back(records[order[i]]);
            return out;
        }
    }
    throw CoverageUnsatisfiable(missing);
}

// Statistics and random prompts.

struct CorpusStats {
    std::size_t scenes = 0;
    /// Scenes in which each concept is present.
    std::array<std::size_t, kConceptCount> scenes_with{};
    /// Total detected instances per concept (floor and ceiling count once per scene).
    std::array<std::size_t, kConceptCount> instances{};
    std::size_t vocab_regular = 0;
    std::size_t vocab_absence = 0;
    std::optional<std::size_t> solvable;
};

inline CorpusStats corpus_stats(const std::vector<DatasetRecord>& records, const DetectorConfig& cfg = {}) {
    CorpusStats s;
    s.scenes = records.size();
    s.vocab_regular = vocabulary(CaptionStyle::Regular).size();
    s.vocab_absence = vocabulary(CaptionStyle::Absence).size();
    std::vector<ConceptReport> reports(records.size());
    detail::parallel_for(records.size(), [&](std::size_t i) { reports[i] = detect(records[i].grid(), cfg); });
    bool all_have_solvable = !records.empty();
    std::size_t beaten = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (Concept c : kAllConcepts) {
            const auto k = static_cast<std::size_t>(index_of(c));
            s.scenes_with[k] += reports[i].present(c) ? 1 : 0;
            s.instances[k] += static_cast<std::size_t>(reports[i].count(c));
        }
        if (!records[i].solvable) all_have_solvable = false;
        else beaten += *records[i].solvable ? 1 : 0;
    }
    if (all_have_solvable) s.solvable = beaten;
    return s;
}

inline Json to_json(const CorpusStats& s) {
    Json with = Json::object(), inst = Json::object();
    for (Concept c : kAllConcepts) {
        const auto k = static_cast<std::size_t>(index_of(c));
        with[std::string(concept_name(c))] = s.scenes_with[k];
        inst[std::string(concept_name(c))] = s.instances[k];
    }
    Json j{{"scenes", s.scenes},
           {"scenes_with", with},
           {"instances", inst},
           {"vocab_regular", s.vocab_regular},
           {"vocab_absence", s.vocab_absence}};
    j["solvable"] = s.solvable ? Json(*s.solvable) : Json(nullptr);
    return j;
}

/// Regular-style captions that match no corpus caption (order-independently).
/// Concepts are included with probability equal to their corpus frequency;
/// quantities and surface forms are uniform.
inline std::vector<Caption> make_random_prompts(const std::vector<DatasetRecord>& corpus, std::size_t n = 100,
                                                std::uint64_t seed = 0, const DetectorConfig& cfg = {}) {
    if (n == 0) throw Error("bad_request", "n must be at least 1");
    auto key = [](const Caption& c) {
        Caption present;
        for (const auto& p : c.canonical().phrases) {
            if (p.form != PhraseForm::Absent) present.phrases.push_back(p);
        }
        return present.text();
    };
    std::set<std::string> taken;
    for (const auto& r : corpus) taken.insert(key(parse_caption(r.regular)));

    std::array<double, kConceptCount> freq{};
    if (corpus.empty()) {
        freq.fill(0.5);
    } else {
        const auto stats = corpus_stats(corpus, cfg);
        for (Concept c : kAllConcepts) {
            const auto k = static_cast<std::size_t>(index_of(c));
            freq[k] = static_cast<double>(stats.scenes_with[k]) / static_cast<double>(stats.scenes);
        }
    }

    Rng rng(seed);
    auto draw = [&] {
        Caption cap;
        for (Concept c : kAllConcepts) {
            if (!is_training_concept(c)) continue;
            if (!rng.chance(freq[static_cast<std::size_t>(index_of(c))])) continue;
            const auto q = kAllQuantities[rng.below(kQuantityCount)];
            if (c == Concept::Floor || c == Concept::Ceiling) {
                const int forms = c == Concept::Floor ? 3 : 2;
                const auto pick = rng.below(static_cast<std::uint64_t>(forms));
                const PhraseForm form = pick == 0 ? PhraseForm::Full : pick == 1 ? PhraseForm::Gaps : PhraseForm::GiantGap;
                cap.phrases.push_back(form == PhraseForm::Full ? Phrase{c, form} : Phrase{c, form, q});
            } else {
                cap.phrases.push_back(Phrase{c, PhraseForm::Present, q});
            }
        }
        return cap;
    };

    std::vector<Caption> out;
    const std::size_t budget = n * 10000;
    for (std::size_t tries = 0; out.size() < n && tries < budget; ++tries) {
        auto cap = draw();
        if (cap.phrases.empty()) continue;
        if (!taken.insert(key(cap)).second) continue;
        out.push_back(std::move(cap));
    }
    if (out.size() < n) {
        std::cerr << "warning: phrase space exhausted, produced " << out.size() << " of " << n << " novel prompts\n";
    }
    return out;
}

} // namespace level_forge
