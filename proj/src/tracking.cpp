#include "pedtrack/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pedtrack {

void TrackerConfig::validate() const
{
    if (!(gate_threshold > 0.0))
        throw ValidationError("tracker: gate threshold must be positive");
    if (max_misses < 0)
        throw ValidationError("tracker: max_misses must be >= 0");
    if (min_hits_to_confirm < 1)
        throw ValidationError("tracker: min_hits_to_confirm must be >= 1");
}

Association associate(const std::vector<std::pair<int, Point>>& predictions,
                      const std::vector<Detection>& detections, double gate)
{
    struct Pair {
        double dist;
        int track_pos;
        int det_index;
    };
    std::vector<Pair> pairs;
    for (std::size_t t = 0; t < predictions.size(); ++t) {
        for (std::size_t d = 0; d < detections.size(); ++d) {
            const double dist =
                euclidean_distance(predictions[t].second, centroid(detections[d].box));
            if (dist <= gate)
                pairs.push_back({dist, static_cast<int>(t), static_cast<int>(d)});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
        if (a.dist != b.dist)
            return a.dist < b.dist;
        if (predictions[a.track_pos].first != predictions[b.track_pos].first)
            return predictions[a.track_pos].first < predictions[b.track_pos].first;
        return a.det_index < b.det_index;
    });

    Association result;
    std::vector<bool> track_used(predictions.size(), false);
    std::vector<bool> det_used(detections.size(), false);
    for (const Pair& p : pairs) {
        if (track_used[p.track_pos] || det_used[p.det_index])
            continue;
        track_used[p.track_pos] = true;
        det_used[p.det_index] = true;
        result.matches.emplace_back(predictions[p.track_pos].first, p.det_index);
    }
    for (std::size_t t = 0; t < predictions.size(); ++t)
        if (!track_used[t])
            result.unmatched_tracks.push_back(predictions[t].first);
    for (std::size_t d = 0; d < detections.size(); ++d)
        if (!det_used[d])
            result.unmatched_detections.push_back(static_cast<int>(d));
    return result;
}

std::vector<Detection> merge_detections(const std::vector<Detection>& detections,
                                        double radius)
{
    std::vector<int> order(detections.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return detections[a].score > detections[b].score;
    });

    std::vector<Detection> kept;
    std::vector<bool> suppressed(detections.size(), false);
    for (int idx : order) {
        if (suppressed[idx])
            continue;
        kept.push_back(detections[idx]);
        const Point center = centroid(detections[idx].box);
        for (int other : order) {
            if (other == idx || suppressed[other])
                continue;
            if (euclidean_distance(center, centroid(detections[other].box)) <= radius)
                suppressed[other] = true;
        }
    }
    return kept;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(cfg)
{
    cfg_.validate();
}

std::vector<TrackRecord> Tracker::step(int frame_index,
                                       const std::vector<Detection>& detections)
{
    std::vector<std::pair<int, Point>> predictions;
    for (Track& track : tracks_) {
        track.kalman = predict(track.kalman, cfg_.kalman);
        track.age += 1;
        track.last_prediction = track.center();
        predictions.emplace_back(track.id, track.last_prediction);
    }

    const Association assoc = associate(predictions, detections, cfg_.gate_threshold);

    auto track_by_id = [&](int id) -> Track& {
        for (Track& t : tracks_)
            if (t.id == id)
                return t;
        throw std::logic_error("tracker: unknown track id");
    };

    for (const auto& [track_id, det_index] : assoc.matches) {
        Track& track = track_by_id(track_id);
        const Detection& det = detections[static_cast<std::size_t>(det_index)];
        const Point z = centroid(det.box);
        track.kalman = update(track.kalman, cfg_.kalman, {z.x, z.y});
        track.hits += 1;
        track.misses = 0;
        track.last_score = det.score;
        track.last_box.width = det.box.width;
        track.last_box.height = det.box.height;
    }
    for (int track_id : assoc.unmatched_tracks) {
        Track& track = track_by_id(track_id);
        track.misses += 1;   // coasts on its prediction
    }

    std::erase_if(tracks_, [&](const Track& t) { return t.misses > cfg_.max_misses; });

    for (int det_index : assoc.unmatched_detections) {
        const Detection& det = detections[static_cast<std::size_t>(det_index)];
        const Point z = centroid(det.box);
        Track track;
        track.id = next_id_++;
        track.kalman.x = {z.x, z.y, 0.0, 0.0};
        track.kalman.p = identity4(10.0);
        track.last_box = det.box;
        track.age = 1;
        track.hits = 1;
        track.misses = 0;
        track.last_score = det.score;
        track.last_prediction = z;
        tracks_.push_back(std::move(track));
    }

    std::vector<TrackRecord> records;
    for (Track& track : tracks_) {
        if (!track.confirmed(cfg_.min_hits_to_confirm))
            continue;
        const Point center = track.center();
        TrackRecord record;
        record.track_id = track.id;
        record.frame_index = frame_index;
        record.box = {static_cast<int>(std::lround(center.x - track.last_box.width / 2.0)),
                      static_cast<int>(std::lround(center.y - track.last_box.height / 2.0)),
                      track.last_box.width, track.last_box.height};
        record.predicted_center = track.last_prediction;
        record.score = track.last_score;
        track.history.push_back(record);
        records.push_back(record);
    }
    return records;
}

}   // namespace pedtrack
