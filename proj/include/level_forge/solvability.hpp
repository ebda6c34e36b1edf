#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "level_forge/diversity.hpp"
#include "level_forge/tile.hpp"

namespace level_forge {

/// Tile-quantized movement model. These are calibration constants of the
/// approximation, not measured game physics.
struct MoveModel {
    int max_jump_height = 4; // rows gained by a full jump
    int max_gap_clear = 6;   // columns of air control per jump or fall
    bool can_break_blocks = false;
};

/// One step of a route. Standing states have grounded = true; airborne
/// states carry the remaining rise and the remaining sideways budget.
struct SearchState {
    int column = 0;
    int row = 0;
    int rise_left = 0;
    int drift_left = 0;
    bool grounded = true;
    friend bool operator==(const SearchState&, const SearchState&) = default;
};

struct SolveResult {
    bool beatable = false;
    std::vector<SearchState> path;
    int expanded = 0;
    std::string reason; // set when not beatable
};

namespace detail {

class MoveGraph {
public:
    MoveGraph(const TileGrid& g, const MoveModel& m) : g_(g), m_(m) {}

    bool open(int r, int c, bool rising = false) const {
        if (c < 0 || c >= g_.width() || r >= g_.height()) return false;
        if (r < 0) return true; // sky above the screen
        const Tile t = g_.at(r, c);
        return is_passable(t) || (rising && m_.can_break_blocks && t == Tile::Breakable);
    }

    bool standing(int r, int c) const {
        return open(r, c) && r + 1 >= 0 && r + 1 < g_.height() && is_solid(g_.at(r + 1, c));
    }

    std::vector<SearchState> starts() const {
        std::vector<SearchState> out;
        for (int r = 0; r < g_.height(); ++r) {
            if (standing(r, 0)) out.push_back({0, r, 0, 0, true});
        }
        return out;
    }

    std::vector<SearchState> successors(const SearchState& s) const {
        std::vector<SearchState> out;
        if (s.grounded) {
            for (int d : {1, -1}) {
                const int c = s.column + d;
                if (!open(s.row, c)) continue;
                if (standing(s.row, c)) {
                    out.push_back({c, s.row, 0, 0, true});
                } else {
                    out.push_back({c, s.row, 0, m_.max_gap_clear, false});
                }
            }
            air_tick(s.row, s.column, m_.max_jump_height, m_.max_gap_clear, out);
        } else {
            air_tick(s.row, s.column, s.rise_left, s.drift_left, out);
        }
        return out;
    }

    int min_row() const { return -m_.max_jump_height - 1; }

private:
    const TileGrid& g_;
    const MoveModel& m_;

    void air_tick(int r, int c, int rise, int drift, std::vector<SearchState>& out) const {
        int nr = r, nrise = 0;
        if (rise > 0) {
            if (open(r - 1, c, true) && r - 1 > min_row()) {
                nr = r - 1;
                nrise = rise - 1;
            }
        } else {
            nr = r + 1;
            if (!open(nr, c)) return; // landed earlier or fell out of the level
        }
        for (int dx : {1, 0, -1}) {
            if (dx != 0 && drift == 0) continue;
            const int nc = c + dx;
            if (!open(nr, nc, nrise > 0 || rise > 0)) continue;
            const int ndrift = drift - (dx != 0 ? 1 : 0);
            if (nrise == 0 && standing(nr, nc)) {
                out.push_back({nc, nr, 0, 0, true});
            } else {
                out.push_back({nc, nr, nrise, ndrift, false});
            }
        }
    }
};

} // namespace detail

/// A* from any standing position in the leftmost column to any position in
/// the rightmost column. Enemies are treated as passable scenery.
inline SolveResult solvable(const TileGrid& grid, const MoveModel& model = {}) {
    SolveResult result;
    detail::MoveGraph graph(grid, model);
    const auto starts = graph.starts();
    if (starts.empty()) {
        result.reason = "no_start_position";
        return result;
    }

    const int W = grid.width();
    const int row_offset = -graph.min_row();
    const int rows = grid.height() + row_offset;
    const int rises = model.max_jump_height + 1;
    const int drifts = model.max_gap_clear + 1;
    auto key = [&](const SearchState& s) -> std::size_t {
        const std::size_t grounded = s.grounded ? 1 : 0;
        return (((static_cast<std::size_t>(s.row + row_offset) * static_cast<std::size_t>(W) +
                  static_cast<std::size_t>(s.column)) * static_cast<std::size_t>(rises) +
                 static_cast<std::size_t>(s.rise_left)) * static_cast<std::size_t>(drifts) +
                static_cast<std::size_t>(s.drift_left)) * 2 + grounded;
    };
    const std::size_t state_count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(W) *
                                    static_cast<std::size_t>(rises) * static_cast<std::size_t>(drifts) * 2;

    constexpr int kUnseen = -1;
    std::vector<int> best_g(state_count, kUnseen);
    std::vector<std::int64_t> parent(state_count, -1);
    std::vector<SearchState> state_of(state_count);
    std::vector<std::uint8_t> closed(state_count, 0);

    // (f, -column, row, insertion order) keeps ties deterministic.
    using Entry = std::tuple<int, int, int, std::int64_t, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    std::int64_t order = 0;
    auto h = [&](const SearchState& s) { return W - 1 - s.column; };

    for (const auto& s : starts) {
        const auto k = key(s);
        best_g[k] = 0;
        state_of[k] = s;
        open.emplace(h(s), -s.column, s.row, order++, k);
    }

    while (!open.empty()) {
        const auto [f, negc, row, ord, k] = open.top();
        open.pop();
        if (closed[k]) continue;
        closed[k] = 1;
        ++result.expanded;
        const SearchState cur = state_of[k];
        if (cur.column == W - 1) {
            result.beatable = true;
            for (std::int64_t at = static_cast<std::int64_t>(k); at >= 0; at = parent[static_cast<std::size_t>(at)]) {
                result.path.push_back(state_of[static_cast<std::size_t>(at)]);
            }
            std::reverse(result.path.begin(), result.path.end());
            return result;
        }
        for (const auto& next : graph.successors(cur)) {
            const auto nk = key(next);
            const int g = best_g[k] + 1;
            if (closed[nk] || (best_g[nk] != kUnseen && best_g[nk] <= g)) continue;
            best_g[nk] = g;
            parent[nk] = static_cast<std::int64_t>(k);
            state_of[nk] = next;
            open.emplace(g + h(next), -next.column, next.row, order++, nk);
        }
    }
    result.reason = "no_route";
    return result;
}

/// Checks that `path` is a legal route under `model`: a start state, legal
/// moves between consecutive states, and an end in the rightmost column.
inline bool verify_path(const TileGrid& grid, const std::vector<SearchState>& path, const MoveModel& model = {}) {
    if (path.empty()) return false;
    detail::MoveGraph graph(grid, model);
    const auto starts = graph.starts();
    if (std::find(starts.begin(), starts.end(), path.front()) == starts.end()) return false;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const auto next = graph.successors(path[i - 1]);
        if (std::find(next.begin(), next.end(), path[i]) == next.end()) return false;
    }
    return path.back().column == grid.width() - 1;
}

struct BatchSolvability {
    double pct_beatable = 0.0;
    std::vector<SolveResult> per_scene;
};

inline BatchSolvability batch_solvability(const SceneSet& set, const MoveModel& model = {}) {
    BatchSolvability out;
    out.per_scene.resize(set.scenes.size());
    detail::parallel_for(set.scenes.size(), [&](std::size_t i) { out.per_scene[i] = solvable(set.scenes[i], model); });
    if (set.scenes.empty()) return out;
    const auto beaten = std::count_if(out.per_scene.begin(), out.per_scene.end(), [](const auto& r) { return r.beatable; });
    out.pct_beatable = 100.0 * static_cast<double>(beaten) / static_cast<double>(set.scenes.size());
    return out;
}

} // namespace level_forge
