#pragma once

#include <cstdint>
#include <vector>

#include "pedtrack/core.hpp"

namespace pedtrack {

struct WindowConfig {
    int width = 32;
    int height = 80;
    int stride_x = 8;
    int stride_y = 8;
    double occupancy_fraction = 0.5;   // in (0, 1]

    void validate() const;
};

struct CandidateWindow {
    BoundingBox box;
    Frame patch;        // raw image crop
    int occupancy = 0;  // foreground pixel count inside the box
};

// Top-left x (or y) offsets scanned along one axis: the stride grid plus a
// final flush-to-edge position when the grid does not land on it.
std::vector<int> window_positions(int frame_extent, int window_extent, int stride);

// Slides the window over the stride grid in row-major order and keeps every
// position whose foreground occupancy reaches occupancy_fraction of the
// window area.
std::vector<CandidateWindow> select_windows(const std::vector<std::uint8_t>& mask,
                                            const Frame& frame,
                                            const WindowConfig& cfg);

}   // namespace pedtrack
