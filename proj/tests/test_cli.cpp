#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace lf_test;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// Runs the CLI with `args` (already shell-quoted); stderr is kept only when asked.
Run cli(const std::string& args, bool with_stderr = false) {
    const std::string cmd = std::string(LF_CLI) + " " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
    Run r;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

struct TempDir {
    fs::path path = fs::temp_directory_path() / ("lf_cli_" + std::to_string(Rng(std::random_device{}()).next()));
    TempDir() { fs::create_directories(path); }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name, std::ios::binary) << text;
        return path / name;
    }
};

std::vector<Json> json_lines(const std::string& text) {
    std::vector<Json> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(Json::parse(line));
    }
    return out;
}

const char* kPrompt =
    "floor with one gap. a few platforms. a few enemies. a few coins. one coin line. a few towers. one ascending "
    "staircase. a few question blocks.";

} // namespace

TEST(Cli, CaptionFlatScene) {
    TempDir dir;
    const auto f = dir.write("flat.txt", serialize(flat()) + "\n");
    const auto r = cli("caption " + q(f));
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "full floor.\n");
    const auto recs = json_lines(cli("caption --style all --format records " + q(f)).out);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].at("regular"), "full floor.");
    EXPECT_EQ(recs[0].at("absence"), caption_of(flat(), CaptionStyle::Absence));
}

TEST(Cli, ScorePrintsThreeDecimals) {
    const auto r = cli("score --prompt '" + std::string(kPrompt) +
                       "' --caption 'full floor. two enemies. one ascending staircase. two question blocks.'");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("c_score 0.478"), std::string::npos) << r.out;
    const auto rec = json_lines(cli("--format records score --prompt 'full floor.' --caption 'full floor.'").out);
    ASSERT_EQ(rec.size(), 1u);
    EXPECT_EQ(rec[0].at("c_score"), 1.0);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(cli("").code, 2);
    EXPECT_EQ(cli("score").code, 2);
    EXPECT_EQ(cli("no-such-command").code, 2);
    EXPECT_EQ(cli("--help").code, 0);
    EXPECT_EQ(cli("caption /nonexistent/scene.txt").code, 1);
    const auto unknown = cli("score --prompt 'three enemies.' --caption ''", true);
    EXPECT_EQ(unknown.code, 1);
    EXPECT_NE(unknown.out.find("unknown_phrase"), std::string::npos) << unknown.out;
    TempDir dir;
    const auto bad = dir.write("bad.txt", "--Z\n");
    const auto r = cli("caption " + q(bad), true);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("unknown_symbol"), std::string::npos) << r.out;
}

TEST(Cli, GenerateMatchesLibraryAndService) {
    const auto recs = json_lines(cli("--format records generate --prompt 'full floor. a few enemies. one pipe.' -n 2 --seed 7").out);
    ASSERT_EQ(recs.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto expect = generate_constructive("full floor. a few enemies. one pipe.", 7 + i);
        EXPECT_EQ(grid_from_json(recs[i].at("scene")), expect.grid);
        EXPECT_DOUBLE_EQ(recs[i].at("c_score").get<double>(), expect.score());
    }
    const auto text = cli("generate --prompt 'full floor.' --seed 1");
    EXPECT_EQ(text.code, 0);
    EXPECT_NE(text.out.find("c_score 1.000"), std::string::npos);
    EXPECT_EQ(cli("generate --prompt 'three enemies.'").code, 1);
}

TEST(Cli, GenerateThroughExternalGenerator) {
    const auto r = cli("--format records generate --prompt 'full floor.' --generator 'exec:" + std::string(LF_MOCK_GENERATOR) +
                       " sky'");
    ASSERT_EQ(r.code, 0);
    const auto recs = json_lines(r.out);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(grid_from_json(recs[0].at("scene")), sky());
    const auto bad = cli("generate --prompt 'full floor.' --generator 'exec:" + std::string(LF_MOCK_GENERATOR) + " bad-width'", true);
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.out.find("protocol_violation"), std::string::npos) << bad.out;
}

TEST(Cli, IngestSplitStats) {
    TempDir dir;
    const auto ds = dir.path / "corpus.jsonl";
    ASSERT_EQ(cli("ingest " + q(fixture("corpus")) + " -o " + q(ds)).code, 0);
    EXPECT_EQ(read_dataset(ds).size(), 136u);

    const auto out = dir.path / "splits";
    ASSERT_EQ(cli("split " + q(ds) + " --sizes 76 30 30 --out-dir " + q(out) + " --seed 2").code, 0);
    EXPECT_EQ(read_dataset(out / "train.jsonl").size(), 76u);
    EXPECT_EQ(read_dataset(out / "val.jsonl").size(), 30u);
    EXPECT_EQ(read_dataset(out / "test.jsonl").size(), 30u);
    EXPECT_EQ(cli("split " + q(ds) + " --sizes 1 2 3 --out-dir " + q(out)).code, 1);

    const auto stats = json_lines(cli("--format records stats " + q(ds)).out);
    ASSERT_EQ(stats.size(), 1u);
    EXPECT_EQ(stats[0].at("scenes"), 136);
    EXPECT_EQ(stats[0].at("vocab_regular"), 47);
    EXPECT_EQ(stats[0].at("vocab_absence"), 48);
}

TEST(Cli, RandomPromptsDeterministic) {
    const auto a = cli("random-prompts --corpus " + q(fixture("corpus")) + " -n 5 --seed 2");
    const auto b = cli("random-prompts --corpus " + q(fixture("corpus")) + " -n 5 --seed 2");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    std::istringstream in(a.out);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        EXPECT_NO_THROW(parse_caption(line)) << line;
        ++n;
    }
    EXPECT_EQ(n, 5);
}

TEST(Cli, ComposeAndExport) {
    TempDir dir;
    const auto a = dir.write("a.txt", serialize(flat()) + "\n");
    const auto b = dir.write("b.txt", serialize(generate_constructive("full floor. one pipe.", 0).grid) + "\n");
    const auto level = dir.path / "level.txt";
    ASSERT_EQ(cli("compose " + q(a) + " " + q(b) + " -o " + q(level)).code, 0);
    const auto g = to_grid(load_level(level));
    EXPECT_EQ(g.width(), 32);
    EXPECT_EQ(g.columns(0, 16), flat());

    ProjectStore store(dir.path / "ws");
    store.create("demo");
    store.append("demo", flat());
    store.append("demo", sky());
    const auto r = cli("export demo --workspace " + q(dir.path / "ws"));
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out, store.get("demo").export_ascii());
    EXPECT_EQ(cli("export missing --workspace " + q(dir.path / "ws")).code, 1);
}

TEST(Cli, SolveAndMetrics) {
    TempDir dir;
    const auto f = dir.write("flat.txt", serialize(flat()) + "\n");
    const auto s = dir.write("sky.txt", serialize(sky()) + "\n");
    const auto r = cli("--format records solve " + q(f) + " " + q(s));
    ASSERT_EQ(r.code, 0);
    const auto recs = json_lines(r.out);
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].at("beatable"), true);
    EXPECT_EQ(recs[1].at("beatable"), false);

    const auto m = cli("metrics amed-self --set " + q(fixture("corpus")));
    EXPECT_EQ(m.code, 0);
    const double expect = amed_self(load_scene_set(fixture("corpus")));
    char buf[64];
    std::snprintf(buf, sizeof buf, "amed_self %.4f", expect);
    EXPECT_NE(m.out.find(buf), std::string::npos) << m.out;
    EXPECT_EQ(cli("metrics amed-self --set " + q(f)).code, 1);
}
