#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace lf_test;

namespace {

const char* kHardPrompt =
    "floor with one gap. a few platforms. a few enemies. a few coins. one coin line. a few towers. one ascending "
    "staircase. a few question blocks.";

std::vector<Caption> random_prompts(int n, std::uint64_t seed) {
    const auto phrases = legal_phrases(false, false);
    Rng rng(seed);
    std::vector<Caption> out;
    for (int i = 0; i < n; ++i) {
        Caption c;
        for (Concept k : kAllConcepts) {
            if (!is_training_concept(k) || !rng.chance(0.35)) continue;
            std::vector<Phrase> options;
            for (const auto& p : phrases) {
                if (p.subject == k) options.push_back(p);
            }
            c.phrases.push_back(options[rng.below(options.size())]);
        }
        out.push_back(c);
    }
    return out;
}

} // namespace

TEST(Constructive, FullFloor) {
    const auto r = generate_constructive("full floor.", 0);
    EXPECT_DOUBLE_EQ(r.score(), 1.0);
    EXPECT_TRUE(r.satisfied);
    EXPECT_EQ(caption_of(r.grid), "full floor.");
    EXPECT_EQ(r.caption.text(), "full floor.");
    EXPECT_EQ(r.grid.height(), 16);
    EXPECT_EQ(r.grid.width(), 16);
}

TEST(Constructive, FloorAndTwoEnemies) {
    const auto r = generate_constructive("full floor. two enemies.", 5);
    EXPECT_DOUBLE_EQ(r.score(), 1.0);
    EXPECT_EQ(detect(r.grid).count(Concept::Enemy), 2);
}

TEST(Constructive, HardPromptScoresHigh) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto r = generate_constructive(kHardPrompt, seed);
        EXPECT_GE(r.score(), 0.9) << "seed " << seed << "\n" << serialize(r.grid);
        // the reported score is the score of the returned grid
        EXPECT_DOUBLE_EQ(annotate(r.grid, parse_caption(kHardPrompt)).breakdown.c_score, r.score());
    }
}

TEST(Constructive, Deterministic) {
    const auto a = generate_constructive(kHardPrompt, 42);
    const auto b = generate_constructive(kHardPrompt, 42);
    EXPECT_EQ(a.grid, b.grid);
    EXPECT_EQ(a.caption.text(), b.caption.text());
    std::set<std::string> distinct;
    for (std::uint64_t seed = 0; seed < 6; ++seed) distinct.insert(serialize(generate_constructive(kHardPrompt, seed).grid));
    EXPECT_GT(distinct.size(), 1u);
}

TEST(Constructive, WiderScenes) {
    const auto r = generate_constructive("full floor. a few enemies. one pipe.", 3, 40);
    EXPECT_EQ(r.grid.width(), 40);
    EXPECT_EQ(r.grid.height(), 16);
    EXPECT_GE(r.score(), 0.9);
    EXPECT_THROW(generate_constructive("full floor.", 0, 10), Error);
}

TEST(Constructive, EmptyPromptAndUnknownPhrase) {
    const auto r = generate_constructive("", 1);
    EXPECT_DOUBLE_EQ(r.score(), 1.0);
    EXPECT_EQ(r.caption.text(), "");
    EXPECT_THROW(generate_constructive("three enemies.", 0), UnknownPhrase);
}

TEST(Constructive, NeverBuildsBrokenStructures) {
    int i = 0;
    for (const auto& prompt : random_prompts(150, 21)) {
        const auto r = generate_constructive(prompt, static_cast<std::uint64_t>(i++));
        const auto report = detect(r.grid);
        ASSERT_EQ(report.count(Concept::BrokenPipe), 0) << prompt.text() << "\n" << serialize(r.grid);
        ASSERT_EQ(report.count(Concept::BrokenCannon), 0) << prompt.text() << "\n" << serialize(r.grid);
    }
}

TEST(Constructive, RandomPromptsMostlySatisfied) {
    int i = 0;
    double sum = 0;
    const auto prompts = random_prompts(150, 77);
    for (const auto& prompt : prompts) sum += generate_constructive(prompt, static_cast<std::uint64_t>(i++)).score();
    EXPECT_GE(sum / static_cast<double>(prompts.size()), 0.9);
}

TEST(Constructive, FixtureCaptionsReproduced) {
    for (const auto& rec : build_dataset(fixture("corpus"))) {
        const auto r = generate_constructive(rec.regular, stable_hash(rec.regular));
        EXPECT_GE(r.score(), 0.9) << rec.regular << "\n" << serialize(r.grid);
    }
}

TEST(Annotate, FixedPointAndSky) {
    const auto g = generate_constructive(kHardPrompt, 9).grid;
    const auto a = annotate(g, parse_caption(kHardPrompt));
    EXPECT_DOUBLE_EQ(annotate(g, a.caption).breakdown.c_score, 1.0);
    EXPECT_EQ(a.caption.text(), caption_of(g));

    const auto s = annotate(sky(), parse_caption("full floor."));
    EXPECT_EQ(s.caption.text(), "");
    EXPECT_NEAR(s.breakdown.c_score, 17.0 / 18.0 - 1.0 / 18.0, 1e-12);
}

TEST(Constructive, GeneratedScenesAreMostlyBeatable) {
    SceneSet set;
    int i = 0;
    for (const auto& rec : build_dataset(fixture("corpus"))) {
        set.scenes.push_back(generate_constructive(rec.regular, static_cast<std::uint64_t>(i++)).grid);
    }
    const auto b = batch_solvability(set);
    EXPECT_GE(b.pct_beatable, 72.0);
    EXPECT_LE(b.pct_beatable, 100.0);
}
