#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "level_forge/error.hpp"

namespace level_forge {

/// Tile identities, numbered as the one-hot channel ids used by generators.
enum class Tile : std::uint8_t {
    Sky = 0,
    PipeTopLeft = 1,
    PipeTopRight = 2,
    Question = 3,
    CannonTop = 4,
    Enemy = 5,
    UsedQuestion = 6,
    Breakable = 7,
    Ground = 8,
    PipeLeft = 9,
    PipeRight = 10,
    CannonSupport = 11,
    Coin = 12,
};

inline constexpr int kTileKindCount = 13;
inline constexpr std::string_view kTileSymbols = "-<>?BEQSX[]bo";
inline constexpr int kSceneHeight = 16;
inline constexpr int kSceneWidth = 16;

struct TileKind {
    char symbol;
    int id;
    bool solid;
    bool passable;
};

constexpr char symbol_of(Tile t) { return kTileSymbols[static_cast<std::size_t>(t)]; }

constexpr bool is_passable(Tile t) {
    return t == Tile::Sky || t == Tile::Enemy || t == Tile::Coin;
}

constexpr bool is_solid(Tile t) { return !is_passable(t); }

constexpr TileKind tile_kind(Tile t) {
    return TileKind{symbol_of(t), static_cast<int>(t), is_solid(t), is_passable(t)};
}

constexpr std::optional<Tile> tile_from_symbol(char c) {
    for (std::size_t i = 0; i < kTileSymbols.size(); ++i) {
        if (kTileSymbols[i] == c) return static_cast<Tile>(i);
    }
    return std::nullopt;
}

constexpr bool is_pipe_tile(Tile t) {
    return t == Tile::PipeTopLeft || t == Tile::PipeTopRight || t == Tile::PipeLeft ||
           t == Tile::PipeRight;
}

constexpr bool is_question_block(Tile t) { return t == Tile::Question || t == Tile::UsedQuestion; }

/// Ground and breakable bricks: the only tiles that form towers, stairs and clusters.
constexpr bool is_block(Tile t) { return t == Tile::Ground || t == Tile::Breakable; }

struct Cell {
    int row = 0;
    int col = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Rectangular row-major tile grid. Scenes are grids of height 16.
class TileGrid {
public:
    TileGrid() = default;

    TileGrid(int height, int width, Tile fill = Tile::Sky) : height_(height), width_(width) {
        if (height <= 0 || width <= 0) {
            throw Error("bad_dimensions", "grid dimensions must be positive, got " +
                                              std::to_string(height) + "x" + std::to_string(width));
        }
        cells_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
    }

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    bool empty() const noexcept { return cells_.empty(); }

    bool in_bounds(int row, int col) const noexcept {
        return row >= 0 && row < height_ && col >= 0 && col < width_;
    }

    Tile at(int row, int col) const { return cells_[index(row, col)]; }
    Tile at(Cell c) const { return at(c.row, c.col); }
    void set(int row, int col, Tile t) { cells_[index(row, col)] = t; }
    void set(Cell c, Tile t) { set(c.row, c.col, t); }

    std::span<const Tile> cells() const noexcept { return cells_; }

    std::span<const Tile> row(int r) const {
        return std::span<const Tile>(cells_).subspan(index(r, 0), static_cast<std::size_t>(width_));
    }

    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    /// Copy of columns [first, first + count).
    TileGrid columns(int first, int count) const {
        if (first < 0 || count <= 0 || first + count > width_) {
            throw Error("bad_dimensions", "column range out of bounds");
        }
        TileGrid out(height_, count);
        for (int r = 0; r < height_; ++r) {
            for (int c = 0; c < count; ++c) out.set(r, c, at(r, first + c));
        }
        return out;
    }

    friend bool operator==(const TileGrid&, const TileGrid&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<Tile> cells_;
};

/// A level file as read from disk, kept verbatim so it can be written back unchanged.
struct LevelSource {
    std::string name;
    std::vector<std::string> rows;
    int original_height = 0;
    bool trailing_newline = false;
    bool crlf = false;

    int width() const { return rows.empty() ? 0 : static_cast<int>(rows.front().size()); }
};

class UnknownSymbol : public Error {
public:
    UnknownSymbol(int row, int col, char ch)
        : Error("unknown_symbol", "unknown tile symbol '" + std::string(1, ch) + "' at row " +
                                      std::to_string(row) + ", column " + std::to_string(col)),
          row_(row), col_(col), ch_(ch) {}
    int row() const { return row_; }
    int col() const { return col_; }
    char symbol() const { return ch_; }

private:
    int row_, col_;
    char ch_;
};

class RaggedRows : public Error {
public:
    RaggedRows(int expected, int got, int row)
        : Error("ragged_rows", "row " + std::to_string(row) + " has " + std::to_string(got) +
                                   " columns, expected " + std::to_string(expected)),
          expected_(expected), got_(got), row_(row) {}
    int expected() const { return expected_; }
    int got() const { return got_; }
    int row() const { return row_; }

private:
    int expected_, got_, row_;
};

inline LevelSource parse_level(std::string_view text, std::string name = {}) {
    LevelSource level;
    level.name = std::move(name);
    if (text.empty()) throw Error("empty_input", "level text is empty");

    if (text.back() == '\n') {
        level.trailing_newline = true;
        text.remove_suffix(1);
        if (!text.empty() && text.back() == '\r') {
            level.crlf = true;
            text.remove_suffix(1);
        }
    }
    if (text.empty()) throw Error("empty_input", "level text is empty");

    std::size_t start = 0;
    while (true) {
        const std::size_t nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos
                                                                                 : nl - start);
        if (!line.empty() && line.back() == '\r') {
            level.crlf = true;
            line.remove_suffix(1);
        }
        level.rows.emplace_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }

    const int expected = static_cast<int>(level.rows.front().size());
    if (expected == 0) throw Error("empty_input", "level has an empty first row");
    for (int r = 0; r < static_cast<int>(level.rows.size()); ++r) {
        const auto& row = level.rows[static_cast<std::size_t>(r)];
        if (static_cast<int>(row.size()) != expected) {
            throw RaggedRows(expected, static_cast<int>(row.size()), r);
        }
        for (int c = 0; c < expected; ++c) {
            if (!tile_from_symbol(row[static_cast<std::size_t>(c)])) {
                throw UnknownSymbol(r, c, row[static_cast<std::size_t>(c)]);
            }
        }
    }
    level.original_height = static_cast<int>(level.rows.size());
    return level;
}

inline TileGrid to_grid(const LevelSource& level) {
    TileGrid grid(level.original_height, level.width());
    for (int r = 0; r < grid.height(); ++r) {
        for (int c = 0; c < grid.width(); ++c) {
            grid.set(r, c, *tile_from_symbol(level.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]));
        }
    }
    return grid;
}

inline TileGrid parse_grid(std::string_view text) { return to_grid(parse_level(text)); }

/// Builds a grid from row strings (the wire and record representation of scenes).
inline TileGrid grid_from_rows(std::span<const std::string> rows) {
    if (rows.empty()) throw Error("empty_input", "scene has no rows");
    LevelSource level;
    const int width = static_cast<int>(rows.front().size());
    if (width == 0) throw Error("empty_input", "scene has an empty first row");
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        if (static_cast<int>(row.size()) != width) throw RaggedRows(width, static_cast<int>(row.size()), r);
        for (int c = 0; c < width; ++c) {
            if (!tile_from_symbol(row[static_cast<std::size_t>(c)])) {
                throw UnknownSymbol(r, c, row[static_cast<std::size_t>(c)]);
            }
        }
    }
    level.rows.assign(rows.begin(), rows.end());
    level.original_height = static_cast<int>(rows.size());
    return to_grid(level);
}

inline std::vector<std::string> to_rows(const TileGrid& grid) {
    std::vector<std::string> rows;
    rows.reserve(static_cast<std::size_t>(grid.height()));
    for (int r = 0; r < grid.height(); ++r) {
        std::string line;
        line.reserve(static_cast<std::size_t>(grid.width()));
        for (Tile t : grid.row(r)) line.push_back(symbol_of(t));
        rows.push_back(std::move(line));
    }
    return rows;
}

/// Newline-joined symbol rows, no trailing newline.
inline std::string serialize(const TileGrid& grid) {
    std::string out;
    out.reserve(static_cast<std::size_t>(grid.height()) * static_cast<std::size_t>(grid.width() + 1));
    for (int r = 0; r < grid.height(); ++r) {
        if (r > 0) out.push_back('\n');
        for (Tile t : grid.row(r)) out.push_back(symbol_of(t));
    }
    return out;
}

/// Writes a level back exactly as it was read (line endings included).
inline std::string serialize(const LevelSource& level) {
    const std::string_view eol = level.crlf ? "\r\n" : "\n";
    std::string out;
    for (std::size_t i = 0; i < level.rows.size(); ++i) {
        if (i > 0) out += eol;
        out += level.rows[i];
    }
    if (level.trailing_newline) out += eol;
    return out;
}

/// Prepends rows of sky so the level reaches `target` rows; existing rows keep their content.
inline TileGrid pad_to_height(const TileGrid& grid, int target = kSceneHeight) {
    if (target < grid.height()) {
        throw Error("target_too_small", "cannot pad a " + std::to_string(grid.height()) +
                                            "-row level to " + std::to_string(target) + " rows");
    }
    const int offset = target - grid.height();
    TileGrid out(target, grid.width(), Tile::Sky);
    for (int r = 0; r < grid.height(); ++r) {
        for (int c = 0; c < grid.width(); ++c) out.set(r + offset, c, grid.at(r, c));
    }
    return out;
}

inline TileGrid pad_to_height(const LevelSource& level, int target = kSceneHeight) {
    return pad_to_height(to_grid(level), target);
}

/// Every window of `window_width` columns, sliding one column at a time.
inline std::vector<TileGrid> slide_windows(const TileGrid& grid, int window_width = kSceneWidth) {
    if (grid.height() != kSceneHeight) {
        throw Error("bad_height", "windows are cut from 16-row grids, got " + std::to_string(grid.height()));
    }
    if (window_width <= 0 || grid.width() < window_width) {
        throw Error("width_too_small", "grid width " + std::to_string(grid.width()) +
                                           " is smaller than window width " + std::to_string(window_width));
    }
    std::vector<TileGrid> out;
    out.reserve(static_cast<std::size_t>(grid.width() - window_width + 1));
    for (int k = 0; k + window_width <= grid.width(); ++k) out.push_back(grid.columns(k, window_width));
    return out;
}

/// Joins grids of equal height side by side.
inline TileGrid concatenate(std::span<const TileGrid> parts) {
    if (parts.empty()) throw Error("empty_input", "nothing to concatenate");
    int width = 0;
    const int height = parts.front().height();
    for (const auto& p : parts) {
        if (p.height() != height) throw Error("dimension_mismatch", "scenes must share a height");
        width += p.width();
    }
    TileGrid out(height, width);
    int offset = 0;
    for (const auto& p : parts) {
        for (int r = 0; r < height; ++r) {
            for (int c = 0; c < p.width(); ++c) out.set(r, offset + c, p.at(r, c));
        }
        offset += p.width();
    }
    return out;
}

} // namespace level_forge
