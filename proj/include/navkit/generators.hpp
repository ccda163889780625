#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "navkit/scene.hpp"

namespace navkit {

/// Four city blocks around a road cross. Each block is a sidewalk ring
/// around a building core with lawn patches cut into it; crosswalks join
/// the rings across the road arms.
struct UrbanParams {
    double block_size = 20.0;
    double road_width = 6.0;
    double sidewalk_width = 2.0;
    int crosswalk_count = 4;
    int lawn_patches = 3;
    double resolution = 0.25;
};

Scene gen_urban_block(std::uint64_t seed, const UrbanParams& params = {});

struct ApartmentParams {
    int rooms = 4;
    double door_width = 1.0;
    int objects_per_room = 2;
    std::vector<std::string> categories = {"oven",  "fridge", "sink",  "bed",  "wardrobe",  "sofa",
                                           "tv",    "toilet", "desk",  "chair", "bookshelf", "table"};
    double resolution = 0.25;
};

/// Rooms on a grid with 1-cell walls, joined by doors along a random
/// spanning tree plus one extra loop door when possible.
Scene gen_apartment(std::uint64_t seed, const ApartmentParams& params = {});

/// Typical furniture for a room label, most characteristic first.
const std::vector<std::string>& room_affinity(const std::string& room_label);

}  // namespace navkit
