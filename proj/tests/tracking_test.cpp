#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "pedtrack/tracking.hpp"

using namespace pedtrack;

namespace {

Detection det_at(double cx, double cy, int frame = 1, double score = 0.9,
                 int w = 10, int h = 16)
{
    Detection d;
    d.frame_index = frame;
    d.box = {static_cast<int>(std::lround(cx - w / 2.0)),
             static_cast<int>(std::lround(cy - h / 2.0)), w, h};
    d.score = score;
    return d;
}

// Exhaustive best assignment used as a small-instance oracle. Greedy is not
// globally optimal in general; on the test geometries below they coincide.
double best_assignment_cost(const std::vector<Point>& tracks,
                            const std::vector<Point>& dets, double gate,
                            int* out_matches = nullptr)
{
    std::vector<int> det_index(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i)
        det_index[i] = static_cast<int>(i);

    double best_cost = 0.0;
    int best_count = 0;
    std::sort(det_index.begin(), det_index.end());
    do {
        double cost = 0.0;
        int count = 0;
        for (std::size_t t = 0; t < tracks.size() && t < dets.size(); ++t) {
            const double d = euclidean_distance(
                tracks[t], dets[static_cast<std::size_t>(det_index[t])]);
            if (d <= gate) {
                cost += d;
                ++count;
            }
        }
        if (count > best_count || (count == best_count && cost < best_cost)) {
            best_count = count;
            best_cost = cost;
        }
    } while (std::next_permutation(det_index.begin(), det_index.end()));
    if (out_matches)
        *out_matches = best_count;
    return best_cost;
}

}   // namespace

TEST_CASE("association respects the gate")
{
    std::vector<std::pair<int, Point>> predictions = {{1, {0.0, 0.0}}};

    SUBCASE("within gate")
    {
        const Association a = associate(predictions, {det_at(3, 4)}, 220.0);
        REQUIRE(a.matches.size() == 1);
        CHECK(a.matches[0].first == 1);
        CHECK(a.matches[0].second == 0);
    }

    SUBCASE("outside gate")
    {
        const Association a = associate(predictions, {det_at(300, 0)}, 220.0);
        CHECK(a.matches.empty());
        CHECK(a.unmatched_tracks == std::vector<int>{1});
        CHECK(a.unmatched_detections == std::vector<int>{0});
    }
}

TEST_CASE("greedy picks the minimal pair first and ties break by track id")
{
    // T1:(0,0), T2:(10,0); D1:(9,0), D2:(1,0) -> (T1,D2), (T2,D1), cost 2.
    std::vector<std::pair<int, Point>> predictions = {{1, {0.0, 0.0}},
                                                      {2, {10.0, 0.0}}};
    std::vector<Detection> dets = {det_at(9, 0), det_at(1, 0)};
    const Association a = associate(predictions, dets, 220.0);
    REQUIRE(a.matches.size() == 2);
    CHECK(a.matches[0] == std::make_pair(1, 1));
    CHECK(a.matches[1] == std::make_pair(2, 0));

    // Same total cost as the exhaustive optimum on this geometry.
    int matches = 0;
    const double oracle = best_assignment_cost({{0, 0}, {10, 0}},
                                               {{9, 0}, {1, 0}}, 220.0, &matches);
    CHECK(matches == 2);
    CHECK(oracle == doctest::Approx(2.0));
}

TEST_CASE("exact predictions produce a perfect matching")
{
    std::mt19937 rng(40);
    std::uniform_real_distribution<double> coord(0.0, 500.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<int, Point>> predictions;
        std::vector<Detection> dets;
        std::vector<Point> accepted;
        for (int i = 0; i < 6; ++i) {
            Point p{coord(rng), coord(rng)};
            bool crowded = false;
            for (const Point& q : accepted)
                crowded = crowded || euclidean_distance(p, q) < 4.0;
            if (crowded)
                continue;
            accepted.push_back(p);
            predictions.emplace_back(static_cast<int>(predictions.size()), p);
            dets.push_back(det_at(p.x, p.y));
        }
        const Association a = associate(predictions, dets, 50.0);
        CHECK(a.matches.size() == predictions.size());
        CHECK(a.unmatched_tracks.empty());
        CHECK(a.unmatched_detections.empty());
        for (const auto& [track_id, det_index] : a.matches) {
            const double d = euclidean_distance(predictions[track_id].second,
                                                centroid(dets[det_index].box));
            // detections snap to the pixel grid, half a pixel per axis
            CHECK(d <= 0.75);
        }
    }
}

TEST_CASE("detection merge collapses crowded windows to the best score")
{
    std::vector<Detection> dets = {det_at(10, 10, 1, 0.6), det_at(12, 10, 1, 0.9),
                                   det_at(14, 10, 1, 0.7), det_at(100, 100, 1, 0.8)};
    const std::vector<Detection> merged = merge_detections(dets, 5.0);
    REQUIRE(merged.size() == 2);
    CHECK(merged[0].score == 0.9);
    CHECK(merged[1].score == 0.8);
}

TEST_CASE("birth rule: unmatched detections start unconfirmed tracks")
{
    TrackerConfig cfg;
    Tracker tracker(cfg);
    const auto records = tracker.step(1, {det_at(10, 10), det_at(50, 50)});
    CHECK(records.empty());
    CHECK(tracker.tracks().size() == 2);
    for (const Track& t : tracker.tracks()) {
        CHECK(t.hits == 1);
        CHECK(t.kalman.x[2] == 0.0);
        CHECK(t.kalman.x[3] == 0.0);
        CHECK(t.kalman.p[0] == 10.0);
    }
}

TEST_CASE("noiseless constant-velocity stream keeps one id and converges")
{
    TrackerConfig cfg;
    Tracker tracker(cfg);
    std::set<int> ids;
    double final_error = 1e9;
    for (int frame = 1; frame <= 30; ++frame) {
        const double cx = 5.0 + 2.0 * frame;
        const double cy = 40.0 - 0.5 * frame;
        const auto records = tracker.step(frame, {det_at(cx, cy, frame)});
        REQUIRE(tracker.tracks().size() == 1);
        for (const TrackRecord& r : records) {
            ids.insert(r.track_id);
            final_error = std::hypot(centroid(r.box).x - cx, centroid(r.box).y - cy);
        }
    }
    CHECK(ids.size() == 1);
    CHECK(final_error < 0.5);
}

TEST_CASE("death rule: tracks die after max_misses consecutive misses")
{
    TrackerConfig cfg;
    cfg.max_misses = 3;
    cfg.min_hits_to_confirm = 1;
    Tracker tracker(cfg);
    tracker.step(1, {det_at(10, 10)});
    CHECK(tracker.tracks().size() == 1);
    for (int frame = 2; frame <= 4; ++frame) {
        tracker.step(frame, {});
        CHECK(tracker.tracks().size() == 1);   // coasting within the allowance
    }
    tracker.step(5, {});
    CHECK(tracker.tracks().empty());
}

TEST_CASE("track ids are never reused")
{
    TrackerConfig cfg;
    cfg.max_misses = 0;   // one miss kills a track
    Tracker tracker(cfg);
    std::set<int> ids;
    for (int round = 1; round <= 5; ++round) {
        tracker.step(2 * round - 1, {det_at(10, 10)});
        REQUIRE(tracker.tracks().size() == 1);
        CHECK(ids.insert(tracker.tracks()[0].id).second);
        tracker.step(2 * round, {});
        CHECK(tracker.tracks().empty());
    }
    CHECK(ids.size() == 5);
}

TEST_CASE("crossing targets with wide separation keep their ids")
{
    TrackerConfig cfg;
    cfg.gate_threshold = 30.0;
    Tracker tracker(cfg);
    std::set<int> ids_a, ids_b;
    for (int frame = 1; frame <= 40; ++frame) {
        // Parallel horizontal motion, never within gate of each other.
        const double ax = 5.0 + 3.0 * frame;
        const double bx = 200.0 - 3.0 * frame;
        const auto records = tracker.step(
            frame, {det_at(ax, 20, frame), det_at(bx, 120, frame)});
        for (const TrackRecord& r : records) {
            if (centroid(r.box).y < 70)
                ids_a.insert(r.track_id);
            else
                ids_b.insert(r.track_id);
        }
    }
    CHECK(ids_a.size() == 1);
    CHECK(ids_b.size() == 1);
    CHECK(*ids_a.begin() != *ids_b.begin());
}

TEST_CASE("records per frame never exceed confirmed live tracks")
{
    TrackerConfig cfg;
    Tracker tracker(cfg);
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> coord(10.0, 200.0);
    for (int frame = 1; frame <= 25; ++frame) {
        std::vector<Detection> dets;
        const int n = frame % 4;
        for (int i = 0; i < n; ++i)
            dets.push_back(det_at(coord(rng), coord(rng), frame));
        const auto records = tracker.step(frame, dets);
        int confirmed = 0;
        for (const Track& t : tracker.tracks())
            confirmed += t.confirmed(cfg.min_hits_to_confirm) ? 1 : 0;
        CHECK(static_cast<int>(records.size()) <= confirmed);

        std::set<int> per_frame_ids;
        for (const TrackRecord& r : records)
            CHECK(per_frame_ids.insert(r.track_id).second);
    }
}

TEST_CASE("step is deterministic for identical inputs")
{
    TrackerConfig cfg;
    Tracker a(cfg), b(cfg);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> coord(0.0, 100.0);
    for (int frame = 1; frame <= 20; ++frame) {
        std::vector<Detection> dets;
        for (int i = 0; i < 3; ++i)
            dets.push_back(det_at(coord(rng), coord(rng), frame));
        const auto ra = a.step(frame, dets);
        const auto rb = b.step(frame, dets);
        REQUIRE(ra.size() == rb.size());
        for (std::size_t i = 0; i < ra.size(); ++i) {
            CHECK(ra[i].track_id == rb[i].track_id);
            CHECK(ra[i].box.x_start == rb[i].box.x_start);
            CHECK(ra[i].box.y_start == rb[i].box.y_start);
            CHECK(ra[i].predicted_center.x == rb[i].predicted_center.x);
        }
    }
}
