#pragma once

#include <vector>

#include "navkit/rng.hpp"
#include "navkit/scene.hpp"

namespace fixture {

using namespace navkit;

/// Grid of iid classes plus a few solid obstacle rectangles.
inline OccupancyGrid random_grid(Rng& rng, int w, int h, double obstacle_p = 0.25) {
    static const SemanticClass open[] = {SemanticClass::Sidewalk, SemanticClass::Sidewalk, SemanticClass::Crosswalk,
                                         SemanticClass::Lawn,     SemanticClass::VehicleRoad, SemanticClass::IndoorFloor};
    OccupancyGrid g(w, h, 0.25, {rng.uniform(-3, 3), rng.uniform(-3, 3)});
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            SemanticClass c = open[rng.below(6)];
            if (rng.uniform() < obstacle_p) c = rng.coin() ? SemanticClass::Obstacle : SemanticClass::Furniture;
            g.set({i, j}, c);
        }
    }
    const int rects = static_cast<int>(rng.below(4));
    for (int r = 0; r < rects; ++r) {
        const int i0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(w)));
        const int j0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(h)));
        const int i1 = std::min(w, i0 + 1 + static_cast<int>(rng.below(6)));
        const int j1 = std::min(h, j0 + 1 + static_cast<int>(rng.below(6)));
        g.fill_rect({i0, j0}, {i1, j1}, SemanticClass::Obstacle);
    }
    return g;
}

inline Cell random_cell(Rng& rng, const OccupancyGrid& g) {
    return {static_cast<int>(rng.below(static_cast<std::uint64_t>(g.width()))),
            static_cast<int>(rng.below(static_cast<std::uint64_t>(g.height())))};
}

inline Cell random_open_cell(Rng& rng, const OccupancyGrid& g) {
    for (int k = 0; k < 1000; ++k) {
        const Cell c = random_cell(rng, g);
        if (is_traversable(g.at(c))) return c;
    }
    return random_cell(rng, g);
}

}  // namespace fixture
