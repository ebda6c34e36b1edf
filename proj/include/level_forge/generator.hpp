#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "level_forge/caption.hpp"
#include "level_forge/concepts.hpp"
#include "level_forge/random.hpp"
#include "level_forge/scoring.hpp"

namespace level_forge {

struct GeneratorConfig {
    int max_repair_iterations = 25;
    DetectorConfig detector;
};

struct GenerationResult {
    TileGrid grid;
    Caption caption;
    ScoreBreakdown breakdown;
    int iterations = 0;
    /// False when the prompt could not be met exactly; grid is then the best attempt.
    bool satisfied = false;

    double score() const { return breakdown.c_score; }
};

namespace detail {

struct Placed {
    Cell cell;
    Tile tile;
};
using Shape = std::vector<Placed>;

// Builds a scene piece by piece. Every solid structure keeps a one-tile
// margin to every other one, so the detectors see each piece in isolation;
// only the floor (bottom two rows) and a ceiling may be touched.
class SceneBuilder {
public:
    SceneBuilder(const Caption& prompt, int width, const DetectorConfig& cfg, Rng& rng)
        : prompt_(prompt.semantic()), cfg_(cfg), rng_(&rng), grid_(kSceneHeight, width) {}

    const TileGrid& grid() const { return grid_; }

    void build() {
        lay_floor();
        lay_ceiling();
        constexpr std::array<Concept, 10> structural = {
            Concept::AscendingStaircase, Concept::DescendingStaircase, Concept::Pipe,
            Concept::UpsideDownPipe,     Concept::Tower,               Concept::Cannon,
            Concept::RectangularCluster, Concept::IrregularCluster,    Concept::Platform,
            Concept::LooseBlock};
        for (Concept c : structural) {
            const int n = target(c);
            for (int i = 0; i < n; ++i) add(c);
        }
        const int qblocks = target(Concept::QuestionBlock);
        for (int i = 0; i < qblocks; ++i) add(Concept::QuestionBlock);
        lay_coins();
        const int enemies = target(Concept::Enemy);
        for (int i = 0; i < enemies; ++i) add(Concept::Enemy);
    }

    /// One corrective edit toward the prompt for concept `c`. Returns false
    /// when no edit applies (the caller then rebuilds from scratch).
    bool repair(Concept c, const ConceptReport& report) {
        if (c == Concept::Floor || c == Concept::Ceiling) return false;
        const auto phrase = prompt_[static_cast<std::size_t>(index_of(c))];
        const int have = report.count(c);
        const auto [lo, hi] = phrase ? count_range(phrase->quantity) : std::pair{0, 0};
        if (have < lo) return add(c);
        if (have > hi) return remove_one(c, report);
        return false;
    }

    bool add(Concept c) {
        switch (c) {
        case Concept::Coin: return place_coin();
        case Concept::CoinLine: return place_coin_line(2);
        case Concept::Enemy: return place_enemy();
        default: break;
        }
        for (int attempt = 0; attempt < 80; ++attempt) {
            auto shape = propose(c);
            if (!shape) return false;
            if (shape->empty()) continue; // proposal did not fit the terrain
            if (fits(*shape, c == Concept::UpsideDownPipe)) {
                commit(*shape);
                if (c == Concept::UpsideDownPipe && !ceiling_row_ok()) {
                    erase(*shape);
                    continue;
                }
                return true;
            }
        }
        return false;
    }

private:
    PhraseMap prompt_;
    DetectorConfig cfg_;
    Rng* rng_;
    TileGrid grid_;
    std::vector<bool> ground_;

    static constexpr int kGroundRow = kSceneHeight - 3; // standing row above a two-row floor
    static constexpr int kTopRow = 4;

    int W() const { return grid_.width(); }

    std::optional<Phrase> wanted(Concept c) const { return prompt_[static_cast<std::size_t>(index_of(c))]; }

    int pick_count(Quantity q) {
        const auto [lo, hi] = count_range(q);
        return rng_->between(lo, std::min(hi, lo + 1));
    }

    int target(Concept c) {
        const auto p = wanted(c);
        return p ? pick_count(p->quantity) : 0;
    }

    bool has_ground(int c) const { return c >= 0 && c < W() && ground_[static_cast<std::size_t>(c)]; }

    // Splits `total` cells into `parts` positive lengths.
    std::vector<int> split_lengths(int total, int parts) {
        std::vector<int> out(static_cast<std::size_t>(parts), 1);
        for (int extra = total - parts; extra > 0; --extra) {
            out[static_cast<std::size_t>(rng_->below(static_cast<std::uint64_t>(parts)))] += 1;
        }
        return out;
    }

    // Lays solid runs separated by `holes` interior openings so the row reads
    // as `holes` gaps with at most max_missing empty cells.
    std::vector<bool> gapped_row(int holes, int max_missing) {
        holes = std::clamp(holes, 1, std::min(max_missing, (W() - 1) / 2));
        const int missing = rng_->between(holes, std::max(holes, std::min(max_missing, 3 * holes)));
        const auto gap_w = split_lengths(missing, holes);
        const auto solid_w = split_lengths(W() - missing, holes + 1);
        std::vector<bool> row;
        for (int i = 0; i <= holes; ++i) {
            row.insert(row.end(), static_cast<std::size_t>(solid_w[static_cast<std::size_t>(i)]), true);
            if (i < holes) row.insert(row.end(), static_cast<std::size_t>(gap_w[static_cast<std::size_t>(i)]), false);
        }
        return row;
    }

    // A mostly empty row with `chunks` solid pieces covering fewer than half the cells.
    std::vector<bool> chunked_row(int chunks) {
        const int max_solid = (W() - 1) / 2;
        chunks = std::clamp(chunks, 1, std::min(max_solid, (W() + 1) / 2));
        const int solid = rng_->between(chunks, std::max(chunks, std::min(max_solid, 2 * chunks)));
        const auto chunk_w = split_lengths(solid, chunks);
        // chunks + 1 gap slots; the inner ones must be non-empty
        std::vector<int> gap_w(static_cast<std::size_t>(chunks + 1), 0);
        for (int i = 1; i < chunks; ++i) gap_w[static_cast<std::size_t>(i)] = 1;
        for (int extra = W() - solid - (chunks - 1); extra > 0; --extra) {
            gap_w[static_cast<std::size_t>(rng_->below(static_cast<std::uint64_t>(chunks + 1)))] += 1;
        }
        std::vector<bool> row;
        for (int i = 0; i <= chunks; ++i) {
            row.insert(row.end(), static_cast<std::size_t>(gap_w[static_cast<std::size_t>(i)]), false);
            if (i < chunks) row.insert(row.end(), static_cast<std::size_t>(chunk_w[static_cast<std::size_t>(i)]), true);
        }
        return row;
    }

    void lay_floor() {
        ground_.assign(static_cast<std::size_t>(W()), false);
        const auto p = wanted(Concept::Floor);
        if (!p) return;
        std::vector<bool> row(static_cast<std::size_t>(W()), true);
        if (p->form == PhraseForm::Gaps) row = gapped_row(pick_count(p->quantity), W() / 2);
        if (p->form == PhraseForm::GiantGap) row = chunked_row(pick_count(p->quantity));
        for (int c = 0; c < W(); ++c) {
            if (!row[static_cast<std::size_t>(c)]) continue;
            grid_.set(kSceneHeight - 1, c, Tile::Ground);
            grid_.set(kSceneHeight - 2, c, Tile::Ground);
            ground_[static_cast<std::size_t>(c)] = true;
        }
    }

    void lay_ceiling() {
        const auto p = wanted(Concept::Ceiling);
        if (!p) return;
        std::vector<bool> row(static_cast<std::size_t>(W()), true);
        if (p->form == PhraseForm::Gaps) row = gapped_row(pick_count(p->quantity), W() / 2);
        for (int c = 0; c < W(); ++c) {
            if (row[static_cast<std::size_t>(c)]) grid_.set(cfg_.ceiling_row, c, Tile::Breakable);
        }
    }

    bool ceiling_present() const { return wanted(Concept::Ceiling).has_value(); }

    bool ceiling_row_ok() const {
        if (ceiling_present()) return true;
        int solid = 0;
        for (Tile t : grid_.row(cfg_.ceiling_row)) solid += is_solid(t);
        return 2 * solid < W();
    }

    bool in_shape(const Shape& s, int r, int c) const {
        return std::any_of(s.begin(), s.end(), [&](const Placed& p) { return p.cell.row == r && p.cell.col == c; });
    }

    bool fits(const Shape& s, bool hanging) const {
        for (const auto& p : s) {
            const int r = p.cell.row, c = p.cell.col;
            if (!grid_.in_bounds(r, c) || grid_.at(r, c) != Tile::Sky) return false;
            if (r > kGroundRow || r < (hanging ? cfg_.top_padding : kTopRow)) return false;
            if (!hanging && r == cfg_.ceiling_row) return false;
        }
        for (const auto& p : s) {
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int r = p.cell.row + dr, c = p.cell.col + dc;
                    if (!grid_.in_bounds(r, c) || in_shape(s, r, c) || !is_solid(grid_.at(r, c))) continue;
                    const bool floor_contact = r > kGroundRow;
                    const bool ceiling_contact = hanging && ceiling_present() && r == cfg_.ceiling_row;
                    if (!floor_contact && !ceiling_contact) return false;
                }
            }
        }
        return true;
    }

    void commit(const Shape& s) {
        for (const auto& p : s) grid_.set(p.cell, p.tile);
    }

    void erase(const Shape& s) {
        for (const auto& p : s) grid_.set(p.cell, Tile::Sky);
    }

    int random_col(int footprint) { return rng_->between(0, W() - footprint); }

    bool grounded_span(int col, int footprint) const {
        for (int c = col; c < col + footprint; ++c) {
            if (!has_ground(c)) return false;
        }
        return true;
    }

    // Picks grounded placement when the footprint stands on floor and a coin flip agrees.
    int base_row(int col, int footprint, double grounded_bias, int height) {
        if (grounded_span(col, footprint) && rng_->chance(grounded_bias)) return kGroundRow;
        const int lowest = kGroundRow - 2;
        const int highest = kTopRow + height - 1;
        if (highest > lowest) return -1;
        return rng_->between(highest, lowest);
    }

    std::optional<Shape> propose(Concept subject) {
        Shape s;
        switch (subject) {
        case Concept::AscendingStaircase:
        case Concept::DescendingStaircase: {
            const int k = rng_->between(3, 4);
            const int col = random_col(k);
            const int base = base_row(col, k, 0.8, k);
            if (base < 0) return s;
            for (int j = 0; j < k; ++j) {
                const int h = subject == Concept::AscendingStaircase ? j + 1 : k - j;
                for (int r = base - h + 1; r <= base; ++r) s.push_back({{r, col + j}, Tile::Ground});
            }
            return s;
        }
        case Concept::Pipe: {
            const int neck = rng_->between(1, 3);
            const int col = random_col(2);
            if (!grounded_span(col, 2)) return s;
            const int cap = kGroundRow - neck;
            s.push_back({{cap, col}, Tile::PipeTopLeft});
            s.push_back({{cap, col + 1}, Tile::PipeTopRight});
            for (int r = cap + 1; r <= kGroundRow; ++r) {
                s.push_back({{r, col}, Tile::PipeLeft});
                s.push_back({{r, col + 1}, Tile::PipeRight});
            }
            return s;
        }
        case Concept::UpsideDownPipe: {
            const int neck = rng_->between(1, 2);
            const int col = random_col(2);
            int top = cfg_.top_padding;
            if (ceiling_present()) {
                if (!is_solid(grid_.at(cfg_.ceiling_row, col)) || !is_solid(grid_.at(cfg_.ceiling_row, col + 1))) return s;
                top = cfg_.ceiling_row + 1;
            }
            for (int r = top; r < top + neck; ++r) {
                s.push_back({{r, col}, Tile::PipeLeft});
                s.push_back({{r, col + 1}, Tile::PipeRight});
            }
            s.push_back({{top + neck, col}, Tile::PipeTopLeft});
            s.push_back({{top + neck, col + 1}, Tile::PipeTopRight});
            return s;
        }
        case Concept::Tower: {
            const int w = rng_->between(1, 2);
            const int h = rng_->between(3, 4);
            const int col = random_col(w);
            const int base = base_row(col, w, 0.7, h);
            if (base < 0) return s;
            for (int r = base - h + 1; r <= base; ++r) {
                for (int c = col; c < col + w; ++c) s.push_back({{r, c}, Tile::Ground});
            }
            return s;
        }
        case Concept::Cannon: {
            const int h = rng_->between(1, 3);
            const int col = random_col(1);
            const int base = base_row(col, 1, 0.7, h);
            if (base < 0) return s;
            s.push_back({{base - h + 1, col}, Tile::CannonTop});
            for (int r = base - h + 2; r <= base; ++r) s.push_back({{r, col}, Tile::CannonSupport});
            return s;
        }
        case Concept::RectangularCluster: {
            constexpr std::array<std::array<int, 2>, 4> sizes{{{2, 2}, {3, 2}, {4, 2}, {3, 3}}};
            const auto [w, h] = sizes[rng_->below(sizes.size())];
            const int col = random_col(w);
            const int base = base_row(col, w, 0.5, h);
            if (base < 0) return s;
            const Tile t = rng_->chance(0.5) ? Tile::Ground : Tile::Breakable;
            for (int r = base - h + 1; r <= base; ++r) {
                for (int c = col; c < col + w; ++c) s.push_back({{r, c}, t});
            }
            return s;
        }
        case Concept::IrregularCluster: {
            // L shapes: a 2x2 square missing one top corner
            const bool mirrored = rng_->chance(0.5);
            const int col = random_col(2);
            const int base = base_row(col, 2, 0.5, 2);
            if (base < 0) return s;
            s.push_back({{base, col}, Tile::Ground});
            s.push_back({{base, col + 1}, Tile::Ground});
            s.push_back({{base - 1, mirrored ? col + 1 : col}, Tile::Ground});
            return s;
        }
        case Concept::Platform: {
            const int k = rng_->between(2, 5);
            const int col = random_col(k);
            const int row = rng_->between(kTopRow + 1, kGroundRow - 1);
            for (int c = col; c < col + k; ++c) s.push_back({{row, c}, Tile::Breakable});
            return s;
        }
        case Concept::LooseBlock: {
            const int col = random_col(1);
            const int row = (has_ground(col) && rng_->chance(0.3)) ? kGroundRow : rng_->between(kTopRow + 1, kGroundRow - 2);
            s.push_back({{row, col}, Tile::Breakable});
            return s;
        }
        case Concept::QuestionBlock: {
            const int col = random_col(1);
            const int row = rng_->between(kTopRow + 1, kGroundRow - 3);
            s.push_back({{row, col}, rng_->chance(0.8) ? Tile::Question : Tile::UsedQuestion});
            return s;
        }
        default: return std::nullopt; // floor, ceiling, broken structures
        }
    }

    bool coin_free(int r, int c) const {
        return grid_.in_bounds(r, c) && grid_.at(r, c) == Tile::Sky && r >= kTopRow && r <= kGroundRow;
    }

    bool coin_at(int r, int c) const { return grid_.in_bounds(r, c) && grid_.at(r, c) == Tile::Coin; }

    bool place_coin() {
        for (int attempt = 0; attempt < 200; ++attempt) {
            const int r = rng_->between(kTopRow, kGroundRow);
            const int c = rng_->between(0, W() - 1);
            if (coin_free(r, c) && !coin_at(r, c - 1) && !coin_at(r, c + 1)) {
                grid_.set(r, c, Tile::Coin);
                return true;
            }
        }
        return false;
    }

    bool place_coin_line(int length) {
        for (int attempt = 0; attempt < 200; ++attempt) {
            const int r = rng_->between(kTopRow, kGroundRow);
            const int c = rng_->between(0, W() - length);
            bool ok = !coin_at(r, c - 1) && !coin_at(r, c + length);
            for (int k = c; k < c + length && ok; ++k) ok = coin_free(r, k);
            if (ok) {
                for (int k = c; k < c + length; ++k) grid_.set(r, k, Tile::Coin);
                return true;
            }
        }
        return false;
    }

    void lay_coins() {
        const int lines = target(Concept::CoinLine);
        const int coins = target(Concept::Coin);
        std::vector<int> lengths(static_cast<std::size_t>(lines), 2);
        int budget = coins - 2 * lines;
        for (auto& len : lengths) {
            const int extra = budget > 0 ? rng_->between(0, std::min(2, budget)) : 0;
            len += extra;
            budget -= extra;
        }
        int placed = 0;
        for (int len : lengths) {
            if (place_coin_line(len)) placed += len;
        }
        for (int i = placed; i < coins; ++i) place_coin();
    }

    bool place_enemy() {
        std::vector<Cell> spots;
        for (int r = kTopRow; r <= kGroundRow; ++r) {
            for (int c = 0; c < W(); ++c) {
                if (grid_.at(r, c) == Tile::Sky && is_solid(grid_.at(r + 1, c))) spots.push_back({r, c});
            }
        }
        if (spots.empty()) {
            for (int attempt = 0; attempt < 200; ++attempt) {
                const Cell cell{rng_->between(kTopRow, kGroundRow), rng_->between(0, W() - 1)};
                if (grid_.at(cell) == Tile::Sky) {
                    grid_.set(cell, Tile::Enemy);
                    return true;
                }
            }
            return false;
        }
        grid_.set(spots[rng_->below(spots.size())], Tile::Enemy);
        return true;
    }

    bool clear_one(bool (*pred)(Tile)) {
        std::vector<Cell> cells;
        for (int r = 0; r < grid_.height(); ++r) {
            for (int c = 0; c < W(); ++c) {
                if (pred(grid_.at(r, c))) cells.push_back({r, c});
            }
        }
        if (cells.empty()) return false;
        grid_.set(cells[rng_->below(cells.size())], Tile::Sky);
        return true;
    }

    bool remove_one(Concept c, const ConceptReport& report) {
        switch (c) {
        case Concept::Enemy: return clear_one([](Tile t) { return t == Tile::Enemy; });
        case Concept::QuestionBlock: return clear_one([](Tile t) { return is_question_block(t); });
        case Concept::Coin: {
            // prefer a coin outside every line so the line count is untouched
            std::vector<Cell> singles;
            for (int r = 0; r < grid_.height(); ++r) {
                for (int k = 0; k < W(); ++k) {
                    if (coin_at(r, k) && !coin_at(r, k - 1) && !coin_at(r, k + 1)) singles.push_back({r, k});
                }
            }
            if (singles.empty()) return clear_one([](Tile t) { return t == Tile::Coin; });
            grid_.set(singles[rng_->below(singles.size())], Tile::Sky);
            return true;
        }
        default: break;
        }
        std::vector<const Structure*> candidates;
        for (const auto& s : report.structures) {
            if (s.subject == c) candidates.push_back(&s);
        }
        if (candidates.empty()) return false;
        for (const Cell& cell : candidates[rng_->below(candidates.size())]->cells) grid_.set(cell, Tile::Sky);
        return true;
    }
};

} // namespace detail

/// Caption-conditioned baseline generator. Builds a scene from templates for
/// every concept the prompt mentions, then re-captions it and applies
/// targeted edits to the worst-matching concept until the prompt is met or
/// the iteration budget runs out. Deterministic per (prompt, seed, width);
/// never throws for unsatisfiable prompts, returning the best attempt instead.
inline GenerationResult generate_constructive(const Caption& prompt, std::uint64_t seed, int width = kSceneWidth,
                                              const GeneratorConfig& cfg = {}) {
    if (width < kSceneWidth) throw Error("bad_width", "scene width must be at least 16, got " + std::to_string(width));
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(width)));
    detail::SceneBuilder builder(prompt, width, cfg.detector, rng);
    builder.build();

    GenerationResult best;
    best.breakdown.c_score = -std::numeric_limits<double>::infinity();
    int iteration = 0;
    for (;; ++iteration) {
        const auto report = detect(builder.grid(), cfg.detector);
        auto caption = render(report);
        const auto breakdown = c_score(prompt, caption);
        if (breakdown.c_score > best.breakdown.c_score) {
            best.grid = builder.grid();
            best.caption = std::move(caption);
            best.breakdown = breakdown;
        }
        if (breakdown.c_score >= 1.0 || iteration >= cfg.max_repair_iterations) break;

        std::array<Concept, kConceptCount> order = kAllConcepts;
        std::stable_sort(order.begin(), order.end(),
                         [&](Concept a, Concept b) { return breakdown[a] < breakdown[b]; });
        bool edited = false;
        for (Concept c : order) {
            if (breakdown[c] >= 1.0) break;
            if (builder.repair(c, report)) {
                edited = true;
                break;
            }
        }
        if (!edited) {
            builder = detail::SceneBuilder(prompt, width, cfg.detector, rng);
            builder.build();
        }
    }
    best.iterations = iteration;
    best.satisfied = best.breakdown.c_score >= 1.0;
    return best;
}

inline GenerationResult generate_constructive(std::string_view prompt, std::uint64_t seed, int width = kSceneWidth,
                                              const GeneratorConfig& cfg = {}) {
    return generate_constructive(parse_caption(prompt), seed, width, cfg);
}

struct Annotation {
    ConceptReport report;
    Caption caption;
    ScoreBreakdown breakdown;
};

/// Captions a scene and scores it against the prompt it was made for.
inline Annotation annotate(const TileGrid& scene, const Caption& prompt, const DetectorConfig& cfg = {}) {
    Annotation a;
    a.report = detect(scene, cfg);
    a.caption = render(a.report);
    a.breakdown = c_score(prompt, a.caption);
    return a;
}

} // namespace level_forge
