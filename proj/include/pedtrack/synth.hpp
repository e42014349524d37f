#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pedtrack/core.hpp"
#include "pedtrack/metrics.hpp"

namespace pedtrack {

// One rectangle moving on a straight line, one pixel grid step per frame
// increment; positions are rounded to integers when rendered.
struct ObjectSpec {
    int object_id = 0;
    double x0 = 0.0;   // top-left at frame 1
    double y0 = 0.0;
    double vx = 0.0;   // pixels per frame
    double vy = 0.0;
    int width = 10;
    int height = 16;
    std::uint8_t intensity = 210;
};

struct SceneSpec {
    int width = 64;
    int height = 64;
    int frame_count = 30;
    int noise_level = 0;       // per-frame uniform noise in [-n, n]
    std::uint64_t seed = 1;
    std::uint8_t texture_low = 40;    // static background texture range
    std::uint8_t texture_high = 80;
    std::vector<ObjectSpec> objects;

    void validate() const;
};

struct SyntheticScene {
    std::vector<Frame> frames;
    std::vector<GroundTruthObject> ground_truth;   // centers of rendered boxes
    std::vector<BoundingBox> ground_truth_boxes;   // aligned with ground_truth
};

// Deterministic for a fixed spec; rerunning reproduces identical frames.
SyntheticScene generate_synthetic_scene(const SceneSpec& spec);

// Renders the scene to numbered PGM frames plus gt.csv in the directory.
void write_synthetic_scene(const SceneSpec& spec, const std::string& directory);

}   // namespace pedtrack
