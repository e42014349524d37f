#pragma once

#include <vector>

#include "pedtrack/core.hpp"

namespace pedtrack {

enum class OrientationRange {
    signed_360,     // atan2 sign kept, bins cover [0, 360)
    unsigned_180,   // gradient direction folded into [0, 180)
};

struct PhogParams {
    int bins = 20;       // K
    int levels = 3;      // L, pyramid depth cap
    OrientationRange range = OrientationRange::signed_360;

    void validate() const;
};

// Length of the concatenated pyramid: K * sum_{l=0..L} 4^l.
int phog_dimension(int bins, int levels);

struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<double> magnitude;     // row-major
    std::vector<double> orientation;   // degrees, mapped into the configured range
};

std::vector<double> to_grayscale(const Frame& window);

// Central differences with replicated borders on the grayscale window.
GradientField compute_gradients(const Frame& window,
                                OrientationRange range = OrientationRange::signed_360);

struct PhogDescriptor {
    std::vector<double> values;   // level-major, cells row-major, K bins per cell
};

// Magnitude-weighted orientation histograms over a 2^l x 2^l cell pyramid,
// concatenated and L1-normalized. A gradient-free window yields the zero
// vector of the correct length.
PhogDescriptor phog_descriptor(const Frame& window, const PhogParams& params);

}   // namespace pedtrack
