#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace lf_test;

namespace {

TileGrid with_gap(int from, int width, int w = 16) {
    auto g = flat(w);
    for (int c = from; c < from + width; ++c) {
        g.set(14, c, Tile::Sky);
        g.set(15, c, Tile::Sky);
    }
    return g;
}

TileGrid with_wall(int col, int height) {
    auto g = flat();
    for (int r = 14 - height; r < 14; ++r) g.set(r, col, Tile::Ground);
    return g;
}

std::vector<TileGrid> fixture_windows() {
    std::vector<TileGrid> out;
    for (const auto& rec : build_dataset(fixture("corpus"))) out.push_back(rec.grid());
    return out;
}

void set_floor_column(TileGrid& g, int c) {
    for (int r = 0; r < 16; ++r) g.set(r, c, r >= 14 ? Tile::Ground : Tile::Sky);
}

} // namespace

TEST(Solvable, FlatFloorIsBeatable) {
    const auto r = solvable(flat());
    ASSERT_TRUE(r.beatable);
    EXPECT_TRUE(verify_path(flat(), r.path));
    EXPECT_EQ(r.path.front().column, 0);
    EXPECT_EQ(r.path.back().column, 15);
    EXPECT_GT(r.expanded, 0);
}

TEST(Solvable, NoFloorIsUnbeatable) {
    const auto r = solvable(sky());
    EXPECT_FALSE(r.beatable);
    EXPECT_EQ(r.reason, "no_start_position");
    EXPECT_TRUE(r.path.empty());
}

TEST(Solvable, GapWidths) {
    EXPECT_TRUE(solvable(with_gap(6, 3)).beatable);
    EXPECT_FALSE(solvable(with_gap(4, 10)).beatable);
    const auto wide = with_gap(3, 20, 30);
    EXPECT_FALSE(solvable(wide).beatable);
    MoveModel longer;
    longer.max_gap_clear = 30;
    longer.max_jump_height = 8;
    EXPECT_TRUE(solvable(with_gap(4, 10), longer).beatable);
}

TEST(Solvable, JumpHeight) {
    EXPECT_TRUE(solvable(with_wall(8, 4)).beatable);
    EXPECT_FALSE(solvable(with_wall(8, 5)).beatable);
    MoveModel higher;
    higher.max_jump_height = 5;
    const auto r = solvable(with_wall(8, 5), higher);
    ASSERT_TRUE(r.beatable);
    EXPECT_TRUE(verify_path(with_wall(8, 5), r.path, higher));
    EXPECT_FALSE(verify_path(with_wall(8, 5), r.path));
}

TEST(Solvable, BreakableBlocksOnlyWithModelFlag) {
    // a breakable lid over the start column blocks nothing when walking
    auto g = flat();
    g.set(12, 0, Tile::Breakable);
    MoveModel breaker;
    breaker.can_break_blocks = true;
    EXPECT_TRUE(solvable(g).beatable);
    EXPECT_TRUE(solvable(g, breaker).beatable);
}

TEST(VerifyPath, RejectsBrokenPaths) {
    const auto g = flat();
    auto path = solvable(g).path;
    ASSERT_GE(path.size(), 3u);
    EXPECT_FALSE(verify_path(g, {}));
    auto skipped = path;
    skipped.erase(skipped.begin() + 1);
    EXPECT_FALSE(verify_path(g, skipped));
    auto truncated = path;
    truncated.pop_back();
    EXPECT_FALSE(verify_path(g, truncated));
    auto floating = path;
    floating.front().row = 5;
    EXPECT_FALSE(verify_path(g, floating));
}

TEST(Batch, HalfBeatable) {
    const auto b = batch_solvability(SceneSet{"", {flat(), sky()}});
    EXPECT_DOUBLE_EQ(b.pct_beatable, 50.0);
    ASSERT_EQ(b.per_scene.size(), 2u);
    EXPECT_TRUE(b.per_scene[0].beatable);
    EXPECT_FALSE(b.per_scene[1].beatable);
    EXPECT_DOUBLE_EQ(batch_solvability(SceneSet{}).pct_beatable, 0.0);
}

TEST(Property, WitnessesVerifyAndSearchIsDeterministic) {
    int beaten = 0;
    for (const auto& g : fixture_windows()) {
        const auto a = solvable(g);
        const auto b = solvable(g);
        ASSERT_EQ(a.beatable, b.beatable);
        ASSERT_EQ(a.path, b.path);
        if (a.beatable) {
            ++beaten;
            ASSERT_TRUE(verify_path(g, a.path)) << serialize(g);
        }
    }
    EXPECT_GT(beaten, 0);
}

TEST(Property, RemovingSolidsAwayFromThePathKeepsItBeatable) {
    Rng rng(17);
    for (const auto& g : fixture_windows()) {
        const auto r = solvable(g);
        if (!r.beatable) continue;
        std::set<std::pair<int, int>> keep;
        for (const auto& s : r.path) {
            for (int dr = -1; dr <= 1; ++dr) keep.insert({s.row + dr, s.column});
        }
        auto h = g;
        for (int row = 0; row < 16; ++row) {
            for (int c = 0; c < 16; ++c) {
                if (is_solid(h.at(row, c)) && !keep.count({row, c}) && rng.chance(0.3)) h.set(row, c, Tile::Sky);
            }
        }
        ASSERT_TRUE(verify_path(h, r.path)) << serialize(h);
        ASSERT_TRUE(solvable(h).beatable) << serialize(h);
    }
}

TEST(Property, JoiningBeatableScenesAtFloorSeamStaysBeatable) {
    std::vector<TileGrid> beatable;
    for (auto g : fixture_windows()) {
        set_floor_column(g, 0);
        set_floor_column(g, 15);
        if (solvable(g).beatable) beatable.push_back(g);
    }
    ASSERT_GE(beatable.size(), 4u);
    Rng rng(3);
    for (int i = 0; i < 40; ++i) {
        std::vector<TileGrid> parts{beatable[rng.below(beatable.size())], beatable[rng.below(beatable.size())]};
        if (rng.chance(0.5)) parts.push_back(beatable[rng.below(beatable.size())]);
        const auto joined = concatenate(parts);
        const auto r = solvable(joined);
        ASSERT_TRUE(r.beatable) << serialize(joined);
        ASSERT_TRUE(verify_path(joined, r.path));
    }
}
