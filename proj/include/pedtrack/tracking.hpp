#pragma once

#include <optional>
#include <vector>

#include "pedtrack/core.hpp"
#include "pedtrack/kalman.hpp"

namespace pedtrack {

struct TrackerConfig {
    double gate_threshold = 220.0;   // max centroid distance for a match
    int max_misses = 5;
    int min_hits_to_confirm = 3;
    KalmanParams kalman;

    void validate() const;
};

struct Track {
    int id = 0;
    KalmanState kalman;
    BoundingBox last_box;
    int age = 0;      // frames since birth
    int misses = 0;   // consecutive frames without a matched detection
    int hits = 0;     // total matched detections
    double last_score = 0.0;
    Point last_prediction;   // Kalman-predicted center for the current frame
    std::vector<TrackRecord> history;

    Point center() const { return {kalman.x[0], kalman.x[1]}; }
    bool confirmed(int min_hits) const { return hits >= min_hits; }
};

struct Association {
    std::vector<std::pair<int, int>> matches;   // (track_id, detection index)
    std::vector<int> unmatched_tracks;          // track ids
    std::vector<int> unmatched_detections;      // detection indices
};

// Greedy nearest-pair matching under the gate. Ties break toward the lower
// track id, then the lower detection index.
Association associate(const std::vector<std::pair<int, Point>>& predictions,
                      const std::vector<Detection>& detections, double gate);

// Collapses detections whose centroids crowd within the radius onto the
// highest-scoring one. Ties keep the earlier detection.
std::vector<Detection> merge_detections(const std::vector<Detection>& detections,
                                        double radius);

class Tracker {
public:
    explicit Tracker(TrackerConfig cfg);

    const TrackerConfig& config() const { return cfg_; }
    const std::vector<Track>& tracks() const { return tracks_; }

    // Advances one frame: predict, associate, update/coast, manage births
    // and deaths. Returns the records emitted by confirmed tracks.
    std::vector<TrackRecord> step(int frame_index,
                                  const std::vector<Detection>& detections);

private:
    TrackerConfig cfg_;
    std::vector<Track> tracks_;
    int next_id_ = 0;
};

}   // namespace pedtrack
