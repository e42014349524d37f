#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pedtrack/background.hpp"
#include "pedtrack/config.hpp"
#include "pedtrack/metrics.hpp"
#include "pedtrack/neuralnet.hpp"
#include "pedtrack/tracking.hpp"
#include "pedtrack/windowing.hpp"

namespace pedtrack {

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// A directory of numerically ordered netpbm frames, read one at a time.
class SequenceSource {
public:
    explicit SequenceSource(const std::string& directory, int max_frames = 0);

    int frame_count() const { return static_cast<int>(entries_.size()); }

    // Reads frame i (0-based position). Enforces uniform dimensions across
    // the sequence and stamps the derived frame index.
    Frame read(int position);

private:
    struct Entry {
        std::filesystem::path path;
        int index;
    };
    std::vector<Entry> entries_;
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
};

// Classifies every candidate window of one frame and merges crowded windows.
std::vector<Detection> detect_in_frame(const Frame& frame,
                                       const std::vector<std::uint8_t>& mask,
                                       const AnyModel& model,
                                       const PipelineConfig& cfg);

struct FrameOutput {
    int frame_index = 0;
    std::vector<std::uint8_t> mask;
    std::vector<Detection> detections;
    std::vector<TrackRecord> records;
};

using FrameSink = std::function<void(const Frame&, const FrameOutput&)>;

// Runs background subtraction, windowing, classification, and tracking over
// the sequence, streaming one frame at a time into the sink.
void run_pipeline(const PipelineConfig& cfg, SequenceSource& source,
                  const AnyModel& model, const FrameSink& sink);

// Draws a one-pixel rectangle border per record; the gray level is a
// deterministic function of the track id.
void annotate_frame(Frame& frame, const std::vector<TrackRecord>& records);
std::uint8_t annotation_level(int track_id);

// --- CSV formats (all carry a header row) ---------------------------------

void write_detections_csv(const std::string& path,
                          const std::vector<Detection>& detections);

void append_tracks_csv_header(std::ostream& out);
void append_tracks_csv(std::ostream& out, const std::vector<TrackRecord>& records);

// `frame,id,x,y[,width,height][,score]`: with box columns present, x/y are
// the top-left corner and the centroid is derived; otherwise x/y are the
// center.
std::vector<GroundTruthObject> read_objects_csv(const std::string& path);

void write_features_csv(const std::string& path,
                        const std::vector<LabeledSample>& samples);
std::vector<LabeledSample> read_features_csv(const std::string& path);

// Labeled patches from <dir>/pos and <dir>/neg netpbm files.
std::vector<LabeledSample> features_from_patch_dirs(const std::string& directory,
                                                    const PhogParams& params);

}   // namespace pedtrack
