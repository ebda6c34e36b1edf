#include <gtest/gtest.h>

#include "support.hpp"

using namespace lf_test;

TEST(TileKinds, SymbolTableAndPassability) {
    const std::string symbols = "-<>?BEQSX[]bo";
    ASSERT_EQ(kTileKindCount, 13);
    for (int id = 0; id < 13; ++id) {
        const auto t = tile_from_symbol(symbols[static_cast<std::size_t>(id)]);
        ASSERT_TRUE(t);
        EXPECT_EQ(static_cast<int>(*t), id);
        EXPECT_EQ(symbol_of(*t), symbols[static_cast<std::size_t>(id)]);
        const char ch = symbols[static_cast<std::size_t>(id)];
        const bool passable = ch == '-' || ch == 'E' || ch == 'o';
        EXPECT_EQ(tile_kind(*t).passable, passable) << ch;
        EXPECT_EQ(tile_kind(*t).solid, !passable) << ch;
    }
    EXPECT_FALSE(tile_from_symbol('Z'));
}

TEST(ParseLevel, TwoByTwo) {
    const auto g = parse_grid("X-\n-X");
    ASSERT_EQ(g.height(), 2);
    ASSERT_EQ(g.width(), 2);
    EXPECT_EQ(g.at(0, 0), Tile::Ground);
    EXPECT_EQ(g.at(0, 1), Tile::Sky);
    EXPECT_EQ(g.at(1, 0), Tile::Sky);
    EXPECT_EQ(g.at(1, 1), Tile::Ground);
    EXPECT_EQ(serialize(g), "X-\n-X");
}

TEST(ParseLevel, UnknownSymbolReportsPosition) {
    try {
        parse_level("---\n-Z-\n");
        FAIL() << "expected UnknownSymbol";
    } catch (const UnknownSymbol& e) {
        EXPECT_EQ(e.row(), 1);
        EXPECT_EQ(e.col(), 1);
        EXPECT_EQ(e.symbol(), 'Z');
        EXPECT_EQ(e.code(), "unknown_symbol");
    }
}

TEST(ParseLevel, RaggedRows) {
    try {
        parse_level("---\n--\n---");
        FAIL() << "expected RaggedRows";
    } catch (const RaggedRows& e) {
        EXPECT_EQ(e.expected(), 3);
        EXPECT_EQ(e.got(), 2);
        EXPECT_EQ(e.row(), 1);
    }
}

TEST(ParseLevel, EmptyInputRejected) {
    EXPECT_THROW(parse_level(""), Error);
    EXPECT_THROW(parse_level("\n"), Error);
}

TEST(ParseLevel, ByteExactRoundTrip) {
    for (const std::string text : {"X-\n-X", "X-\n-X\n", "X-\r\n-X\r\n", "o", "--<>\n--[]\n"}) {
        EXPECT_EQ(serialize(parse_level(text)), text);
    }
}

TEST(ParseLevel, FixtureLevelDimensions) {
    const auto level = load_level(fixture("corpus/lvl_a.txt"));
    EXPECT_EQ(level.original_height, 14);
    EXPECT_EQ(level.width(), 64);
    EXPECT_EQ(level.name, "lvl_a");
}

TEST(Serialize, SingleCoin) {
    EXPECT_EQ(serialize(TileGrid(1, 1, Tile::Coin)), "o");
}

TEST(Serialize, RandomGridsRoundTrip) {
    Rng rng(11);
    for (int i = 0; i < 300; ++i) {
        const int h = rng.between(1, 20), w = rng.between(1, 40);
        TileGrid g(h, w);
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) g.set(r, c, static_cast<Tile>(rng.below(13)));
        }
        EXPECT_EQ(parse_grid(serialize(g)), g);
        EXPECT_EQ(grid_from_rows(to_rows(g)), g);
    }
}

TEST(PadToHeight, FourteenRowsGainTwoSkyRows) {
    const auto level = load_level(fixture("corpus/lvl_a.txt"));
    const auto original = to_grid(level);
    const auto g = pad_to_height(level);
    ASSERT_EQ(g.height(), 16);
    ASSERT_EQ(g.width(), original.width());
    for (int c = 0; c < g.width(); ++c) {
        EXPECT_EQ(g.at(0, c), Tile::Sky);
        EXPECT_EQ(g.at(1, c), Tile::Sky);
    }
    for (int r = 0; r < original.height(); ++r) {
        for (int c = 0; c < original.width(); ++c) ASSERT_EQ(g.at(r + 2, c), original.at(r, c));
    }
}

TEST(PadToHeight, IdentityAtTargetAndErrorBelow) {
    const auto g = flat();
    EXPECT_EQ(pad_to_height(g, 16), g);
    try {
        pad_to_height(g, 15);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "target_too_small");
    }
}

TEST(SlideWindows, CountsAndContents) {
    EXPECT_EQ(slide_windows(flat(16)).size(), 1u);
    EXPECT_EQ(slide_windows(flat(16)).front(), flat(16));
    EXPECT_EQ(slide_windows(flat(18)).size(), 3u);

    const auto level = pad_to_height(load_level(fixture("corpus/lvl_a.txt")));
    const auto windows = slide_windows(level);
    ASSERT_EQ(windows.size(), static_cast<std::size_t>(level.width() - 16 + 1));
    for (std::size_t k = 0; k < windows.size(); ++k) {
        for (int r = 0; r < 16; ++r) {
            for (int c = 0; c < 16; ++c) ASSERT_EQ(windows[k].at(r, c), level.at(r, static_cast<int>(k) + c));
        }
    }
    for (int w = 16; w < 40; ++w) EXPECT_EQ(slide_windows(flat(w)).size(), static_cast<std::size_t>(w - 15));
}

TEST(SlideWindows, Errors) {
    try {
        slide_windows(flat(15));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "width_too_small");
    }
    EXPECT_THROW(slide_windows(TileGrid(14, 20)), Error);
}

TEST(Concatenate, WidthsAdd) {
    std::vector<TileGrid> parts{flat(16), sky(16, 16), flat(20)};
    const auto g = concatenate(parts);
    EXPECT_EQ(g.width(), 52);
    EXPECT_EQ(g.columns(16, 16), sky());
    EXPECT_EQ(g.columns(32, 20), flat(20));
    std::vector<TileGrid> bad{flat(16), TileGrid(14, 16)};
    EXPECT_THROW(concatenate(bad), Error);
}
