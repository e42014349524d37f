#pragma once

#include <optional>
#include <vector>

#include "pedtrack/core.hpp"

namespace pedtrack {

struct GroundTruthObject {
    int frame_index = 0;
    int object_id = 0;
    Point center;
};

// Tracker output reduced to what evaluation needs; same shape as ground truth.
using Hypothesis = GroundTruthObject;

struct FrameEvents {
    int frame_index = 0;
    int matches = 0;                       // c_t
    std::vector<double> match_distances;   // d_t^i
    int misses = 0;                        // m_t
    int false_positives = 0;               // fp_t
    int mismatches = 0;                    // mme_t
    int gt_count = 0;                      // g_t
};

struct MotReport {
    std::optional<double> motp;   // absent when no matches were ever made
    double mota = 0.0;
    double miss_rate = 0.0;
    double fp_rate = 0.0;
    double mismatch_rate = 0.0;
    long long total_matches = 0;
    long long total_misses = 0;
    long long total_false_positives = 0;
    long long total_mismatches = 0;
    long long total_gt = 0;
};

// Frame-by-frame CLEAR correspondence. Pairs matched in the previous frame
// and still within the threshold carry over; the rest are matched by
// minimal-total-distance assignment (exhaustive up to 8x8 per frame, greedy
// beyond). A ground-truth object re-matched to a different hypothesis id than
// its last known partner counts one mismatch.
std::vector<FrameEvents> establish_correspondence(
    const std::vector<GroundTruthObject>& ground_truth,
    const std::vector<Hypothesis>& hypotheses, double threshold);

std::optional<double> motp(const std::vector<FrameEvents>& events);

MotReport mota(const std::vector<FrameEvents>& events);

// MOTA from the three error ratios directly: 1 - (miss + fp + mismatch).
double mota_from_rates(double miss_rate, double fp_rate, double mismatch_rate);

}   // namespace pedtrack
