#include "pedtrack/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

namespace pedtrack {

namespace {

constexpr std::size_t kExhaustiveLimit = 8;

struct Entity {
    int id;
    Point center;
};

// Minimal-total-distance assignment of gt rows to hyp columns among pairs
// within the threshold, maximizing the match count first. Exhaustive search;
// ties resolve to the lexicographically first assignment in row order.
void assign_exhaustive(const std::vector<std::vector<double>>& dist, double threshold,
                       std::vector<int>& best)
{
    const std::size_t rows = dist.size();
    const std::size_t cols = rows ? dist[0].size() : 0;
    std::vector<int> current(rows, -1);
    best.assign(rows, -1);
    int best_count = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<bool> used(cols, false);

    auto recurse = [&](auto&& self, std::size_t row, int count, double cost) -> void {
        if (row == rows) {
            if (count > best_count || (count == best_count && cost < best_cost)) {
                best_count = count;
                best_cost = cost;
                best = current;
            }
            return;
        }
        // Prune: even matching every remaining row cannot beat the best.
        const int remaining = static_cast<int>(rows - row);
        if (count + remaining < best_count)
            return;
        for (std::size_t col = 0; col < cols; ++col) {
            if (used[col] || dist[row][col] > threshold)
                continue;
            used[col] = true;
            current[row] = static_cast<int>(col);
            self(self, row + 1, count + 1, cost + dist[row][col]);
            used[col] = false;
            current[row] = -1;
        }
        self(self, row + 1, count, cost);
    };
    recurse(recurse, 0, 0, 0.0);
}

// Greedy nearest-pair fallback for large frames; deterministic tie-breaks by
// row then column order.
void assign_greedy(const std::vector<std::vector<double>>& dist, double threshold,
                   std::vector<int>& best)
{
    const std::size_t rows = dist.size();
    const std::size_t cols = rows ? dist[0].size() : 0;
    best.assign(rows, -1);
    std::vector<bool> row_used(rows, false), col_used(cols, false);
    while (true) {
        double min_dist = std::numeric_limits<double>::infinity();
        std::size_t min_row = 0, min_col = 0;
        bool found = false;
        for (std::size_t r = 0; r < rows; ++r) {
            if (row_used[r])
                continue;
            for (std::size_t c = 0; c < cols; ++c) {
                if (col_used[c] || dist[r][c] > threshold)
                    continue;
                if (dist[r][c] < min_dist) {
                    min_dist = dist[r][c];
                    min_row = r;
                    min_col = c;
                    found = true;
                }
            }
        }
        if (!found)
            break;
        row_used[min_row] = true;
        col_used[min_col] = true;
        best[min_row] = static_cast<int>(min_col);
    }
}

std::map<int, std::vector<Entity>> group_by_frame(
    const std::vector<GroundTruthObject>& items, const char* what)
{
    std::map<int, std::vector<Entity>> frames;
    std::set<std::pair<int, int>> seen;
    for (const GroundTruthObject& item : items) {
        if (!seen.insert({item.frame_index, item.object_id}).second)
            throw ValidationError(std::string("metrics: duplicate (frame, id) pair in ") +
                                  what);
        frames[item.frame_index].push_back({item.object_id, item.center});
    }
    for (auto& [frame, list] : frames)
        std::sort(list.begin(), list.end(),
                  [](const Entity& a, const Entity& b) { return a.id < b.id; });
    return frames;
}

}   // namespace

std::vector<FrameEvents> establish_correspondence(
    const std::vector<GroundTruthObject>& ground_truth,
    const std::vector<Hypothesis>& hypotheses, double threshold)
{
    const auto gt_frames = group_by_frame(ground_truth, "ground truth");
    const auto hyp_frames = group_by_frame(hypotheses, "hypotheses");
    if (gt_frames.empty() && hyp_frames.empty())
        return {};

    int first = std::numeric_limits<int>::max();
    int last = std::numeric_limits<int>::min();
    for (const auto& [f, _] : gt_frames) {
        first = std::min(first, f);
        last = std::max(last, f);
    }
    for (const auto& [f, _] : hyp_frames) {
        first = std::min(first, f);
        last = std::max(last, f);
    }

    static const std::vector<Entity> kEmpty;
    std::map<int, int> active;       // gt id -> hyp id matched in the previous frame
    std::map<int, int> last_match;   // gt id -> last hyp id ever matched

    std::vector<FrameEvents> events;
    for (int frame = first; frame <= last; ++frame) {
        const auto git = gt_frames.find(frame);
        const auto hit = hyp_frames.find(frame);
        const std::vector<Entity>& gts = git == gt_frames.end() ? kEmpty : git->second;
        const std::vector<Entity>& hyps = hit == hyp_frames.end() ? kEmpty : hit->second;

        FrameEvents ev;
        ev.frame_index = frame;
        ev.gt_count = static_cast<int>(gts.size());

        std::vector<bool> gt_done(gts.size(), false);
        std::vector<bool> hyp_done(hyps.size(), false);
        std::map<int, int> now;   // matches established this frame

        // Carry over still-valid pairs from the previous frame.
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const auto prev = active.find(gts[g].id);
            if (prev == active.end())
                continue;
            for (std::size_t h = 0; h < hyps.size(); ++h) {
                if (hyp_done[h] || hyps[h].id != prev->second)
                    continue;
                const double d = euclidean_distance(gts[g].center, hyps[h].center);
                if (d <= threshold) {
                    gt_done[g] = true;
                    hyp_done[h] = true;
                    now[gts[g].id] = hyps[h].id;
                    ev.matches += 1;
                    ev.match_distances.push_back(d);
                }
                break;
            }
        }

        // Match what remains by minimal total distance.
        std::vector<std::size_t> free_gt, free_hyp;
        for (std::size_t g = 0; g < gts.size(); ++g)
            if (!gt_done[g])
                free_gt.push_back(g);
        for (std::size_t h = 0; h < hyps.size(); ++h)
            if (!hyp_done[h])
                free_hyp.push_back(h);

        if (!free_gt.empty() && !free_hyp.empty()) {
            std::vector<std::vector<double>> dist(free_gt.size(),
                                                  std::vector<double>(free_hyp.size()));
            for (std::size_t r = 0; r < free_gt.size(); ++r)
                for (std::size_t c = 0; c < free_hyp.size(); ++c)
                    dist[r][c] = euclidean_distance(gts[free_gt[r]].center,
                                                    hyps[free_hyp[c]].center);
            std::vector<int> chosen;
            if (free_gt.size() <= kExhaustiveLimit && free_hyp.size() <= kExhaustiveLimit)
                assign_exhaustive(dist, threshold, chosen);
            else
                assign_greedy(dist, threshold, chosen);

            for (std::size_t r = 0; r < free_gt.size(); ++r) {
                if (chosen[r] < 0)
                    continue;
                const Entity& gt = gts[free_gt[r]];
                const Entity& hyp = hyps[free_hyp[static_cast<std::size_t>(chosen[r])]];
                now[gt.id] = hyp.id;
                ev.matches += 1;
                ev.match_distances.push_back(dist[r][static_cast<std::size_t>(chosen[r])]);
                const auto prev = last_match.find(gt.id);
                if (prev != last_match.end() && prev->second != hyp.id)
                    ev.mismatches += 1;
            }
        }

        for (const auto& [gt_id, hyp_id] : now)
            last_match[gt_id] = hyp_id;
        active = now;

        ev.misses = ev.gt_count - ev.matches;
        ev.false_positives = static_cast<int>(hyps.size()) - ev.matches;
        events.push_back(std::move(ev));
    }
    return events;
}

std::optional<double> motp(const std::vector<FrameEvents>& events)
{
    double total = 0.0;
    long long matches = 0;
    for (const FrameEvents& ev : events) {
        for (double d : ev.match_distances)
            total += d;
        matches += ev.matches;
    }
    if (matches == 0)
        return std::nullopt;
    return total / static_cast<double>(matches);
}

MotReport mota(const std::vector<FrameEvents>& events)
{
    MotReport report;
    for (const FrameEvents& ev : events) {
        report.total_matches += ev.matches;
        report.total_misses += ev.misses;
        report.total_false_positives += ev.false_positives;
        report.total_mismatches += ev.mismatches;
        report.total_gt += ev.gt_count;
    }
    if (report.total_gt == 0)
        throw ValidationError("metrics: no ground-truth objects in the sequence");

    const double g = static_cast<double>(report.total_gt);
    report.miss_rate = static_cast<double>(report.total_misses) / g;
    report.fp_rate = static_cast<double>(report.total_false_positives) / g;
    report.mismatch_rate = static_cast<double>(report.total_mismatches) / g;
    report.mota = 1.0 - static_cast<double>(report.total_misses +
                                            report.total_false_positives +
                                            report.total_mismatches) /
                            g;
    report.motp = motp(events);
    return report;
}

double mota_from_rates(double miss_rate, double fp_rate, double mismatch_rate)
{
    return 1.0 - (miss_rate + fp_rate + mismatch_rate);
}

}   // namespace pedtrack
