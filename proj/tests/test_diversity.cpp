#include <gtest/gtest.h>

#include <algorithm>
#include <limits>

#include "support.hpp"

using namespace lf_test;

namespace {

TileGrid mutate(TileGrid g, int cells, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> idx(static_cast<std::size_t>(g.height() * g.width()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    rng.shuffle(std::span<int>(idx));
    for (int k = 0; k < cells; ++k) {
        const int r = idx[static_cast<std::size_t>(k)] / g.width(), c = idx[static_cast<std::size_t>(k)] % g.width();
        const Tile old = g.at(r, c);
        g.set(r, c, old == Tile::Coin ? Tile::Question : Tile::Coin);
    }
    return g;
}

TileGrid random_scene(Rng& rng) {
    TileGrid g(16, 16);
    for (int r = 0; r < 16; ++r) {
        for (int c = 0; c < 16; ++c) g.set(r, c, static_cast<Tile>(rng.below(13)));
    }
    return g;
}

int oracle_distance(const TileGrid& a, const TileGrid& b) {
    int d = 0;
    for (int r = 0; r < a.height(); ++r) {
        for (int c = 0; c < a.width(); ++c) d += a.at(r, c) != b.at(r, c) ? 1 : 0;
    }
    return d;
}

double oracle_amed_self(const std::vector<TileGrid>& s) {
    double sum = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        int best = std::numeric_limits<int>::max();
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (i != j) best = std::min(best, oracle_distance(s[i], s[j]));
        }
        sum += best;
    }
    return sum / static_cast<double>(s.size());
}

} // namespace

TEST(EditDistance, Examples) {
    const auto g = flat();
    EXPECT_EQ(edit_distance(g, g), 0);
    EXPECT_EQ(edit_distance(g, mutate(g, 5, 1)), 5);
    EXPECT_EQ(edit_distance(sky(), TileGrid(16, 16, Tile::Ground)), 256);
    try {
        edit_distance(sky(16, 16), sky(16, 17));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "dimension_mismatch");
    }
}

TEST(EditDistance, MetricAxiomsOnRandomTriples) {
    Rng rng(2024);
    for (int i = 0; i < 300; ++i) {
        const auto a = random_scene(rng), b = random_scene(rng);
        const auto c = rng.chance(0.5) ? random_scene(rng) : mutate(a, rng.between(0, 40), static_cast<std::uint64_t>(i));
        const int ab = edit_distance(a, b), bc = edit_distance(b, c), ac = edit_distance(a, c);
        ASSERT_EQ(ab, oracle_distance(a, b));
        ASSERT_EQ(ab, edit_distance(b, a));
        ASSERT_LE(ac, ab + bc);
        ASSERT_EQ(edit_distance(a, a), 0);
        ASSERT_GE(ab, 0);
        ASSERT_LE(ab, 256);
    }
}

TEST(AmedSelf, Examples) {
    const auto g = flat();
    EXPECT_DOUBLE_EQ(amed_self(SceneSet{"", {g, g}}), 0.0);
    const auto near = mutate(g, 5, 3);
    const TileGrid far(16, 16, Tile::Breakable);
    const int d_far = std::min(edit_distance(far, g), edit_distance(far, near));
    EXPECT_DOUBLE_EQ(amed_self(SceneSet{"", {g, near, far}}), (5.0 + 5.0 + d_far) / 3.0);
    EXPECT_THROW(amed_self(SceneSet{"", {g}}), Error);
    EXPECT_THROW(amed_self(SceneSet{"", {g, sky(16, 17)}}), Error);
}

TEST(AmedSelf, MatchesOracleAndDuplicateNeverRaises) {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<TileGrid> s;
        const auto base = random_scene(rng);
        for (int k = 0; k < 8; ++k) s.push_back(mutate(base, rng.between(0, 60), rng.next()));
        const double v = amed_self(SceneSet{"", s});
        EXPECT_DOUBLE_EQ(v, oracle_amed_self(s));
        s.push_back(s[rng.below(s.size())]);
        EXPECT_LE(amed_self(SceneSet{"", s}), v);
    }
}

TEST(AmedSelf, ParallelPathMatchesOracle) {
    Rng rng(99);
    std::vector<TileGrid> s;
    const auto base = flat();
    for (int k = 0; k < 150; ++k) s.push_back(mutate(base, rng.between(1, 30), rng.next()));
    EXPECT_DOUBLE_EQ(amed_self(SceneSet{"", s}), oracle_amed_self(s));
}

TEST(AmedReal, Examples) {
    const auto g = flat();
    const auto h = sky();
    EXPECT_DOUBLE_EQ(amed_real(SceneSet{"", {g}}, SceneSet{"", {g, h}}), 0.0);
    EXPECT_DOUBLE_EQ(amed_real(SceneSet{"", {mutate(g, 7, 5)}}, SceneSet{"", {g, h}}), 7.0);
    EXPECT_DOUBLE_EQ(amed_real(SceneSet{"", {mutate(g, 7, 5), h}}, SceneSet{"", {g, h}}), 3.5);
    EXPECT_THROW(amed_real(SceneSet{"", {}}, SceneSet{"", {g}}), Error);
    EXPECT_THROW(amed_real(SceneSet{"", {g}}, SceneSet{"", {sky(16, 20)}}), Error);
}

TEST(Integrity, Rates) {
    auto lone = sky();
    lone.set(10, 5, Tile::PipeTopLeft);
    const auto r = integrity_rates(SceneSet{"", {lone}});
    EXPECT_DOUBLE_EQ(r.broken_pipe_pct, 100.0);
    EXPECT_DOUBLE_EQ(r.any_pipe_pct, 100.0);
    EXPECT_DOUBLE_EQ(r.broken_cannon_pct, 0.0);

    std::vector<TileGrid> set(95, flat());
    for (int i = 0; i < 5; ++i) set.push_back(lone);
    const auto r2 = integrity_rates(SceneSet{"", set});
    EXPECT_EQ(r2.scenes, 100);
    EXPECT_DOUBLE_EQ(r2.broken_pipe_pct, 5.0);

    auto cannon = flat();
    cannon.set(13, 4, Tile::CannonSupport);
    EXPECT_DOUBLE_EQ(integrity_rates(SceneSet{"", {cannon, flat()}}).broken_cannon_pct, 50.0);
    EXPECT_EQ(integrity_rates(SceneSet{}).scenes, 0);
}

TEST(Sampling, Evenly) {
    std::vector<TileGrid> s;
    for (int k = 0; k < 10; ++k) s.push_back(mutate(sky(), k, 1));
    const SceneSet set{"x", s};
    EXPECT_EQ(sample_evenly(set, 10).scenes, s);
    ASSERT_EQ(sample_evenly(set, 1).scenes.size(), 1u);
    EXPECT_EQ(sample_evenly(set, 1).scenes.front(), s.front());
    const auto five = sample_evenly(set, 5);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(five.scenes[i], s[2 * i]);
    try {
        sample_evenly(set, 11);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "n_too_large");
    }
    EXPECT_THROW(sample_evenly(set, 0), Error);
}

TEST(Sampling, RandomDistinctAndDeterministic) {
    std::vector<TileGrid> s;
    for (int k = 0; k < 30; ++k) s.push_back(mutate(sky(), k, 1));
    const SceneSet set{"x", s};
    const auto a = sample_random(set, 12, 4);
    EXPECT_EQ(a.scenes, sample_random(set, 12, 4).scenes);
    ASSERT_EQ(a.scenes.size(), 12u);
    // distinct corpus members, in corpus order
    int last = -1;
    for (const auto& g : a.scenes) {
        const int idx = edit_distance(g, sky());
        EXPECT_GT(idx, last);
        last = idx;
    }
    EXPECT_THROW(sample_random(set, 31, 0), Error);
}
