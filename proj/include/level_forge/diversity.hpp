#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "level_forge/concepts.hpp"
#include "level_forge/random.hpp"

namespace level_forge {

struct SceneSet {
    std::string label;
    std::vector<TileGrid> scenes;
};

inline void check_same_shape(const TileGrid& a, const TileGrid& b) {
    if (a.height() != b.height() || a.width() != b.width()) {
        throw Error("dimension_mismatch", "cannot compare a " + std::to_string(a.height()) + "x" +
                                              std::to_string(a.width()) + " grid with a " +
                                              std::to_string(b.height()) + "x" + std::to_string(b.width()) + " grid");
    }
}

/// Number of cells whose tiles differ. Grids must have identical dimensions.
inline int edit_distance(const TileGrid& a, const TileGrid& b) {
    check_same_shape(a, b);
    const auto x = a.cells();
    const auto y = b.cells();
    int d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) d += x[i] != y[i];
    return d;
}

namespace detail {

// Runs fn(i) for i in [0, n) on a few threads. Each index writes only its own slot.
template <class Fn>
void parallel_for(std::size_t n, Fn fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n / 64));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline double mean(const std::vector<int>& v) {
    return static_cast<double>(std::accumulate(v.begin(), v.end(), std::int64_t{0})) / static_cast<double>(v.size());
}

inline void check_uniform(const SceneSet& set) {
    for (const auto& s : set.scenes) check_same_shape(set.scenes.front(), s);
}

} // namespace detail

/// Mean over scenes of the distance to the nearest other member of the set.
inline double amed_self(const SceneSet& set) {
    if (set.scenes.size() < 2) throw Error("too_few_scenes", "amed_self needs at least two scenes");
    detail::check_uniform(set);
    std::vector<int> nearest(set.scenes.size());
    detail::parallel_for(set.scenes.size(), [&](std::size_t i) {
        int best = std::numeric_limits<int>::max();
        for (std::size_t j = 0; j < set.scenes.size() && best > 0; ++j) {
            if (j != i) best = std::min(best, edit_distance(set.scenes[i], set.scenes[j]));
        }
        nearest[i] = best;
    });
    return detail::mean(nearest);
}

/// Mean over generated scenes of the distance to the nearest real scene.
inline double amed_real(const SceneSet& generated, const SceneSet& real) {
    if (generated.scenes.empty() || real.scenes.empty()) throw Error("too_few_scenes", "amed_real needs non-empty sets");
    detail::check_uniform(generated);
    detail::check_uniform(real);
    check_same_shape(generated.scenes.front(), real.scenes.front());
    std::vector<int> nearest(generated.scenes.size());
    detail::parallel_for(generated.scenes.size(), [&](std::size_t i) {
        int best = std::numeric_limits<int>::max();
        for (std::size_t j = 0; j < real.scenes.size() && best > 0; ++j) {
            best = std::min(best, edit_distance(generated.scenes[i], real.scenes[j]));
        }
        nearest[i] = best;
    });
    return detail::mean(nearest);
}

struct IntegrityRates {
    double broken_pipe_pct = 0.0;
    double any_pipe_pct = 0.0;
    double broken_cannon_pct = 0.0;
    double any_cannon_pct = 0.0;
    int scenes = 0;
};

inline IntegrityRates integrity_rates(const SceneSet& set, const DetectorConfig& cfg = {}) {
    IntegrityRates out;
    out.scenes = static_cast<int>(set.scenes.size());
    if (set.scenes.empty()) return out;
    int broken_pipe = 0, any_pipe = 0, broken_cannon = 0, any_cannon = 0;
    for (const auto& scene : set.scenes) {
        const auto r = detect(scene, cfg);
        broken_pipe += r.present(Concept::BrokenPipe);
        any_pipe += r.present(Concept::BrokenPipe) || r.present(Concept::Pipe) || r.present(Concept::UpsideDownPipe);
        broken_cannon += r.present(Concept::BrokenCannon);
        any_cannon += r.present(Concept::BrokenCannon) || r.present(Concept::Cannon);
    }
    const double n = static_cast<double>(set.scenes.size());
    out.broken_pipe_pct = 100.0 * broken_pipe / n;
    out.any_pipe_pct = 100.0 * any_pipe / n;
    out.broken_cannon_pct = 100.0 * broken_cannon / n;
    out.any_cannon_pct = 100.0 * any_cannon / n;
    return out;
}

/// n scenes at indices floor(i * |set| / n): deterministic, starts at the first scene.
inline SceneSet sample_evenly(const SceneSet& set, std::size_t n) {
    if (n == 0 || n > set.scenes.size()) {
        throw Error("n_too_large", "cannot take " + std::to_string(n) + " samples from " +
                                       std::to_string(set.scenes.size()) + " scenes");
    }
    SceneSet out{set.label + "_" + std::to_string(n), {}};
    out.scenes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.scenes.push_back(set.scenes[i * set.scenes.size() / n]);
    return out;
}

/// n distinct scenes chosen uniformly at random, kept in corpus order.
inline SceneSet sample_random(const SceneSet& set, std::size_t n, std::uint64_t seed) {
    if (n == 0 || n > set.scenes.size()) {
        throw Error("n_too_large", "cannot take " + std::to_string(n) + " samples from " +
                                       std::to_string(set.scenes.size()) + " scenes");
    }
    std::vector<std::size_t> idx(set.scenes.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(idx));
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    SceneSet out{set.label + "_random" + std::to_string(n), {}};
    for (auto i : idx) out.scenes.push_back(set.scenes[i]);
    return out;
}

} // namespace level_forge
