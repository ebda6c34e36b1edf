#pragma once

#include <string>
#include <vector>

#include "level_forge/level_forge.hpp"

namespace lf_test {

using namespace level_forge;

inline TileGrid rows(std::vector<std::string> r) { return grid_from_rows(r); }

inline TileGrid sky(int h = kSceneHeight, int w = kSceneWidth) { return TileGrid(h, w, Tile::Sky); }

/// Sky with the bottom `thickness` rows solid ground.
inline TileGrid flat(int w = kSceneWidth, int thickness = 2) {
    TileGrid g(kSceneHeight, w, Tile::Sky);
    for (int r = kSceneHeight - thickness; r < kSceneHeight; ++r) {
        for (int c = 0; c < w; ++c) g.set(r, c, Tile::Ground);
    }
    return g;
}

inline std::string fixture(const std::string& rel) { return std::string(LF_FIXTURE_DIR) + "/" + rel; }

inline std::string caption_of(const TileGrid& g, CaptionStyle s = CaptionStyle::Regular) {
    return render(detect(g), s).text();
}

} // namespace lf_test
