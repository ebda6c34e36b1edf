#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "level_forge/tile.hpp"

namespace level_forge {

/// Level concepts in canonical caption order. The last two only ever show up
/// in generated output and are never part of training captions.
enum class Concept : int {
    Floor,
    Ceiling,
    Enemy,
    QuestionBlock,
    Cannon,
    Coin,
    CoinLine,
    Platform,
    AscendingStaircase,
    DescendingStaircase,
    Pipe,
    UpsideDownPipe,
    Tower,
    RectangularCluster,
    IrregularCluster,
    LooseBlock,
    BrokenPipe,
    BrokenCannon,
};

inline constexpr int kConceptCount = 18;
inline constexpr int kTrainingConceptCount = 16;

inline constexpr std::array<Concept, kConceptCount> kAllConcepts = {
    Concept::Floor,          Concept::Ceiling,
    Concept::Enemy,          Concept::QuestionBlock,
    Concept::Cannon,         Concept::Coin,
    Concept::CoinLine,       Concept::Platform,
    Concept::AscendingStaircase, Concept::DescendingStaircase,
    Concept::Pipe,           Concept::UpsideDownPipe,
    Concept::Tower,          Concept::RectangularCluster,
    Concept::IrregularCluster, Concept::LooseBlock,
    Concept::BrokenPipe,     Concept::BrokenCannon,
};

constexpr int index_of(Concept c) { return static_cast<int>(c); }
constexpr bool is_training_concept(Concept c) { return index_of(c) < kTrainingConceptCount; }

constexpr std::string_view concept_name(Concept c) {
    constexpr std::array<std::string_view, kConceptCount> names = {
        "floor",         "ceiling",
        "enemy",         "question_block",
        "cannon",        "coin",
        "coin_line",     "platform",
        "ascending_staircase", "descending_staircase",
        "pipe",          "upside_down_pipe",
        "tower",         "rectangular_cluster",
        "irregular_cluster", "loose_block",
        "broken_pipe",   "broken_cannon",
    };
    return names[static_cast<std::size_t>(index_of(c))];
}

constexpr std::optional<Concept> concept_from_name(std::string_view name) {
    for (Concept c : kAllConcepts) {
        if (concept_name(c) == name) return c;
    }
    return std::nullopt;
}

/// Shape of the bottom row (floor) or the ceiling row.
struct SurfaceState {
    enum class Kind { None, Full, Gaps, GiantGap };
    Kind kind = Kind::None;
    int count = 0; // gaps for Gaps, floor chunks for GiantGap

    bool present() const { return kind != Kind::None; }
    friend bool operator==(const SurfaceState&, const SurfaceState&) = default;
};

struct Structure {
    Concept subject;
    std::vector<Cell> cells;
};

struct ConceptReport {
    int height = 0;
    int width = 0;
    /// Floor and ceiling entries are 1 when the surface is present, else 0.
    std::array<int, kConceptCount> counts{};
    SurfaceState floor;
    SurfaceState ceiling;
    std::vector<Structure> structures;
    /// Row-major mask of cells claimed by a consuming detector.
    std::vector<std::uint8_t> consumed;

    int count(Concept c) const { return counts[static_cast<std::size_t>(index_of(c))]; }
    bool present(Concept c) const { return count(c) > 0; }
    bool is_consumed(int row, int col) const {
        return consumed[static_cast<std::size_t>(row * width + col)] != 0;
    }
};

struct DetectorConfig {
    /// Row scanned for a ceiling (fourth row from the top of the padded scene).
    int ceiling_row = 3;
    /// Rows of sky prepended to 14-row levels; an upside-down pipe whose neck
    /// reaches this band counts as hanging from the top of the screen.
    int top_padding = 2;
};

namespace detail {

class SceneScanner {
public:
    SceneScanner(const TileGrid& grid, const DetectorConfig& cfg) : g_(grid), cfg_(cfg) {
        report_.height = grid.height();
        report_.width = grid.width();
        report_.consumed.assign(static_cast<std::size_t>(grid.height() * grid.width()), 0);
        pipe_owned_.assign(report_.consumed.size(), 0);
    }

    ConceptReport run() {
        floor();
        ceiling();
        pipes();
        upside_down_pipes();
        cannons();
        coin_lines();
        tally(Concept::Coin, [](Tile t) { return t == Tile::Coin; });
        tally(Concept::QuestionBlock, is_question_block);
        tally(Concept::Enemy, [](Tile t) { return t == Tile::Enemy; });
        platforms();
        towers();
        const auto tops = stair_tops();
        staircases(tops, true);
        staircases(tops, false);
        clusters();
        broken_pipes();
        return std::move(report_);
    }

private:
    const TileGrid& g_;
    const DetectorConfig& cfg_;
    ConceptReport report_;
    std::vector<std::uint8_t> pipe_owned_;

    int H() const { return g_.height(); }
    int W() const { return g_.width(); }
    std::size_t idx(int r, int c) const { return static_cast<std::size_t>(r * W() + c); }
    bool consumed(int r, int c) const { return report_.consumed[idx(r, c)] != 0; }
    void bump(Concept c, int n = 1) { report_.counts[static_cast<std::size_t>(index_of(c))] += n; }

    void claim(Concept subject, std::vector<Cell> cells, bool consuming = true) {
        if (consuming) {
            for (const Cell& cell : cells) report_.consumed[idx(cell.row, cell.col)] = 1;
        }
        report_.structures.push_back(Structure{subject, std::move(cells)});
    }

    bool free_block(int r, int c) const { return g_.in_bounds(r, c) && is_block(g_.at(r, c)) && !consumed(r, c); }

    bool passable_or_outside(int r, int c) const { return !g_.in_bounds(r, c) || is_passable(g_.at(r, c)); }

    std::vector<bool> solid_mask(int r) const {
        std::vector<bool> m(static_cast<std::size_t>(W()));
        for (int c = 0; c < W(); ++c) m[static_cast<std::size_t>(c)] = is_solid(g_.at(r, c));
        return m;
    }

    static int runs(const std::vector<bool>& mask, bool value) {
        int n = 0;
        bool inside = false;
        for (bool b : mask) {
            if (b == value && !inside) ++n;
            inside = (b == value);
        }
        return n;
    }

    // Claims the block tiles of `row` and of neighbouring rows (stepping by
    // `step`) whose solid pattern is identical, so thick ground or ceilings
    // are absorbed as one surface.
    void claim_band(Concept subject, int row, int step, int stop) {
        const auto mask = solid_mask(row);
        std::vector<Cell> cells;
        for (int r = row; r != stop && r >= 0 && r < H(); r += step) {
            if (r != row && solid_mask(r) != mask) break;
            for (int c = 0; c < W(); ++c) {
                const Tile t = g_.at(r, c);
                if ((is_block(t) || is_question_block(t)) && !consumed(r, c)) cells.push_back({r, c});
            }
        }
        claim(subject, std::move(cells));
    }

    void floor() {
        const int bottom = H() - 1;
        const auto mask = solid_mask(bottom);
        const int solid = static_cast<int>(std::count(mask.begin(), mask.end(), true));
        auto& st = report_.floor;
        if (solid == 0) {
            st = {};
            return;
        }
        const int missing = W() - solid;
        if (missing == 0) {
            st = {SurfaceState::Kind::Full, 0};
        } else if (2 * missing > W()) {
            st = {SurfaceState::Kind::GiantGap, runs(mask, true)};
        } else {
            st = {SurfaceState::Kind::Gaps, runs(mask, false)};
        }
        bump(Concept::Floor);
        claim_band(Concept::Floor, bottom, -1, std::max(cfg_.ceiling_row, -1));
    }

    void ceiling() {
        const int row = cfg_.ceiling_row;
        if (row < 0 || row >= H() - 1) return;
        const auto mask = solid_mask(row);
        const int solid = static_cast<int>(std::count(mask.begin(), mask.end(), true));
        if (2 * solid < W()) return;
        auto& st = report_.ceiling;
        st = solid == W() ? SurfaceState{SurfaceState::Kind::Full, 0}
                          : SurfaceState{SurfaceState::Kind::Gaps, runs(mask, false)};
        bump(Concept::Ceiling);
        claim_band(Concept::Ceiling, row, -1, -1);
    }

    // Pipe columns are examined in pairs (c, c + 1); a column outside the scene
    // matches anything so pipes cut by the scene edge still count as whole.
    bool pipe_cell(int r, int c, Tile expected) const {
        if (c < 0 || c >= W()) return true;
        return g_.at(r, c) == expected && !pipe_owned_[idx(r, c)];
    }

    bool pair_is(int r, int c, Tile left, Tile right) const {
        return pipe_cell(r, c, left) && pipe_cell(r, c + 1, right);
    }

    bool solid_base(int r, int c) const {
        for (int cc : {c, c + 1}) {
            if (cc < 0 || cc >= W()) continue;
            const Tile t = g_.at(r, cc);
            if (!is_solid(t) || is_pipe_tile(t)) return false;
        }
        return true;
    }

    void take_pipe(Concept subject, int top, int bottom, int c) {
        std::vector<Cell> cells;
        for (int r = top; r <= bottom; ++r) {
            for (int cc : {c, c + 1}) {
                if (cc < 0 || cc >= W()) continue;
                cells.push_back({r, cc});
                pipe_owned_[idx(r, cc)] = 1;
            }
        }
        bump(subject);
        claim(subject, std::move(cells));
    }

    void pipes() {
        for (int r = 0; r < H(); ++r) {
            for (int c = -1; c < W(); ++c) {
                if (!pair_is(r, c, Tile::PipeTopLeft, Tile::PipeTopRight)) continue;
                int k = r + 1;
                while (k < H() && pair_is(k, c, Tile::PipeLeft, Tile::PipeRight)) ++k;
                if (k == H() || solid_base(k, c)) take_pipe(Concept::Pipe, r, k - 1, c);
            }
        }
    }

    void upside_down_pipes() {
        for (int r = H() - 1; r >= 0; --r) {
            for (int c = -1; c < W(); ++c) {
                if (!pair_is(r, c, Tile::PipeTopLeft, Tile::PipeTopRight)) continue;
                int k = r - 1;
                while (k >= 0 && pair_is(k, c, Tile::PipeLeft, Tile::PipeRight)) --k;
                const int neck_top = k + 1;
                if (k < 0 || neck_top <= cfg_.top_padding || solid_base(k, c)) {
                    take_pipe(Concept::UpsideDownPipe, neck_top, r, c);
                }
            }
        }
    }

    void cannons() {
        for (int c = 0; c < W(); ++c) {
            for (int r = 0; r < H(); ++r) {
                if (g_.at(r, c) != Tile::CannonTop) continue;
                std::vector<Cell> cells{{r, c}};
                for (int k = r + 1; k < H() && g_.at(k, c) == Tile::CannonSupport; ++k) cells.push_back({k, c});
                bump(Concept::Cannon);
                claim(Concept::Cannon, std::move(cells));
            }
        }
        // Support columns with no cannon on top.
        for (int c = 0; c < W(); ++c) {
            for (int r = 0; r < H(); ++r) {
                if (g_.at(r, c) != Tile::CannonSupport || consumed(r, c)) continue;
                std::vector<Cell> cells;
                int k = r;
                for (; k < H() && g_.at(k, c) == Tile::CannonSupport; ++k) cells.push_back({k, c});
                bump(Concept::BrokenCannon);
                claim(Concept::BrokenCannon, std::move(cells));
                r = k - 1;
            }
        }
    }

    void coin_lines() {
        for (int r = 0; r < H(); ++r) {
            for (int c = 0; c < W();) {
                if (g_.at(r, c) != Tile::Coin) {
                    ++c;
                    continue;
                }
                int e = c;
                while (e < W() && g_.at(r, e) == Tile::Coin) ++e;
                if (e - c >= 2) {
                    std::vector<Cell> cells;
                    for (int k = c; k < e; ++k) cells.push_back({r, k});
                    bump(Concept::CoinLine);
                    claim(Concept::CoinLine, std::move(cells), false);
                }
                c = e;
            }
        }
    }

    template <class Pred>
    void tally(Concept subject, Pred pred) {
        for (Tile t : g_.cells()) {
            if (pred(t)) bump(subject);
        }
    }

    bool platform_member(int r, int c) const {
        if (consumed(r, c)) return false;
        const Tile t = g_.at(r, c);
        return is_block(t) || is_question_block(t);
    }

    void platforms() {
        for (int r = 0; r < H(); ++r) {
            for (int c = 0; c < W();) {
                if (!platform_member(r, c)) {
                    ++c;
                    continue;
                }
                int e = c;
                while (e < W() && platform_member(r, e)) ++e;
                if (e - c >= 2 && r + 1 < H()) {
                    bool clear = true;
                    for (int k = c; k < e && clear; ++k) {
                        clear = passable_or_outside(r - 1, k) && is_passable(g_.at(r + 1, k));
                    }
                    if (clear) {
                        std::vector<Cell> cells;
                        for (int k = c; k < e; ++k) cells.push_back({r, k});
                        bump(Concept::Platform);
                        claim(Concept::Platform, std::move(cells));
                    }
                }
                c = e;
            }
        }
    }

    std::vector<std::vector<Cell>> block_components() const {
        std::vector<std::uint8_t> seen(report_.consumed.size(), 0);
        std::vector<std::vector<Cell>> out;
        for (int r = 0; r < H(); ++r) {
            for (int c = 0; c < W(); ++c) {
                if (seen[idx(r, c)] || !free_block(r, c)) continue;
                std::vector<Cell> comp;
                std::vector<Cell> stack{{r, c}};
                seen[idx(r, c)] = 1;
                while (!stack.empty()) {
                    const Cell cur = stack.back();
                    stack.pop_back();
                    comp.push_back(cur);
                    constexpr std::array<std::array<int, 2>, 4> dirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
                    for (auto [dr, dc] : dirs) {
                        const int nr = cur.row + dr, nc = cur.col + dc;
                        if (free_block(nr, nc) && !seen[idx(nr, nc)]) {
                            seen[idx(nr, nc)] = 1;
                            stack.push_back({nr, nc});
                        }
                    }
                }
                std::sort(comp.begin(), comp.end());
                out.push_back(std::move(comp));
            }
        }
        return out;
    }

    struct Box {
        int top, bottom, left, right;
        int height() const { return bottom - top + 1; }
        int width() const { return right - left + 1; }
    };

    static Box bounds(const std::vector<Cell>& cells) {
        Box b{cells.front().row, cells.front().row, cells.front().col, cells.front().col};
        for (const Cell& x : cells) {
            b.top = std::min(b.top, x.row);
            b.bottom = std::max(b.bottom, x.row);
            b.left = std::min(b.left, x.col);
            b.right = std::max(b.right, x.col);
        }
        return b;
    }

    void towers() {
        for (auto& comp : block_components()) {
            const Box b = bounds(comp);
            if (b.width() < 3 && b.height() >= 3) {
                bump(Concept::Tower);
                claim(Concept::Tower, std::move(comp));
            }
        }
    }

    // Row of the highest free block in column c, provided the tile above it is
    // passable; nullopt when the column has no such block.
    std::optional<int> stair_top(int c) const {
        for (int r = 0; r < H(); ++r) {
            if (free_block(r, c)) {
                if (!passable_or_outside(r - 1, c)) return std::nullopt;
                return r;
            }
        }
        return std::nullopt;
    }

    // Both directions read the same tops, so a hill's peak column serves each side.
    std::vector<std::optional<int>> stair_tops() const {
        std::vector<std::optional<int>> tops(static_cast<std::size_t>(W()));
        for (int c = 0; c < W(); ++c) tops[static_cast<std::size_t>(c)] = stair_top(c);
        return tops;
    }

    void staircases(const std::vector<std::optional<int>>& tops, bool ascending) {
        const int step = ascending ? -1 : 1; // row change per column moving right
        const Concept subject = ascending ? Concept::AscendingStaircase : Concept::DescendingStaircase;
        for (int c = 0; c < W();) {
            if (!tops[static_cast<std::size_t>(c)]) {
                ++c;
                continue;
            }
            int e = c + 1;
            while (e < W() && tops[static_cast<std::size_t>(e)] &&
                   *tops[static_cast<std::size_t>(e)] == *tops[static_cast<std::size_t>(e - 1)] + step) {
                ++e;
            }
            if (e - c >= 3) {
                std::vector<Cell> cells;
                for (int k = c; k < e; ++k) {
                    for (int r = *tops[static_cast<std::size_t>(k)]; r < H() && free_block(r, k); ++r) cells.push_back({r, k});
                }
                bump(subject);
                claim(subject, std::move(cells));
                c = e;
            } else {
                ++c;
            }
        }
    }

    void clusters() {
        for (auto& comp : block_components()) {
            const Box b = bounds(comp);
            const bool filled = static_cast<int>(comp.size()) == b.width() * b.height();
            if (filled && b.width() >= 2 && b.height() >= 2) {
                bump(Concept::RectangularCluster);
                claim(Concept::RectangularCluster, std::move(comp));
            } else if (comp.size() >= 3) {
                bump(Concept::IrregularCluster);
                claim(Concept::IrregularCluster, std::move(comp));
            } else {
                bump(Concept::LooseBlock, static_cast<int>(comp.size()));
                for (const Cell& cell : comp) claim(Concept::LooseBlock, {cell});
            }
        }
    }

    // Pipe tiles left over after valid pipes: each 4-connected group is one broken pipe.
    void broken_pipes() {
        std::vector<std::uint8_t> seen(pipe_owned_);
        for (int r = 0; r < H(); ++r) {
            for (int c = 0; c < W(); ++c) {
                if (seen[idx(r, c)] || !is_pipe_tile(g_.at(r, c))) continue;
                std::vector<Cell> comp;
                std::vector<Cell> stack{{r, c}};
                seen[idx(r, c)] = 1;
                while (!stack.empty()) {
                    const Cell cur = stack.back();
                    stack.pop_back();
                    comp.push_back(cur);
                    constexpr std::array<std::array<int, 2>, 4> dirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
                    for (auto [dr, dc] : dirs) {
                        const int nr = cur.row + dr, nc = cur.col + dc;
                        if (g_.in_bounds(nr, nc) && !seen[idx(nr, nc)] && is_pipe_tile(g_.at(nr, nc))) {
                            seen[idx(nr, nc)] = 1;
                            stack.push_back({nr, nc});
                        }
                    }
                }
                std::sort(comp.begin(), comp.end());
                bump(Concept::BrokenPipe);
                claim(Concept::BrokenPipe, std::move(comp));
            }
        }
    }
};

} // namespace detail

/// Scans a 16-row scene for every concept. Detectors run in a fixed order and
/// the structural ones claim their cells, so later flood fills only see
/// blocks nothing else has explained.
inline ConceptReport detect(const TileGrid& scene, const DetectorConfig& cfg = {}) {
    if (scene.height() != kSceneHeight) {
        throw Error("bad_height", "scenes must have 16 rows, got " + std::to_string(scene.height()));
    }
    return detail::SceneScanner(scene, cfg).run();
}

} // namespace level_forge
