#include "pedtrack/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "pedtrack/netpbm.hpp"
#include "pedtrack/phog.hpp"

namespace pedtrack {

namespace {

bool has_netpbm_extension(const std::filesystem::path& p)
{
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

// Last run of digits in the stem, e.g. frame_000123 -> 123.
std::optional<int> stem_number(const std::filesystem::path& p)
{
    const std::string stem = p.stem().string();
    int end = static_cast<int>(stem.size());
    while (end > 0 && !std::isdigit(static_cast<unsigned char>(stem[end - 1])))
        --end;
    int begin = end;
    while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1])))
        --begin;
    if (begin == end)
        return std::nullopt;
    int value = 0;
    const auto* first = stem.data() + begin;
    const auto* last = stem.data() + end;
    if (std::from_chars(first, last, value).ec != std::errc())
        return std::nullopt;
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    return fields;
}

double parse_csv_number(const std::string& field, const std::string& path, int line)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(field, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != field.size())
        throw IoError(path + ":" + std::to_string(line) + ": invalid number '" + field +
                      "'");
    return v;
}

std::string format_score(double score)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", score);
    return buf;
}

}   // namespace

SequenceSource::SequenceSource(const std::string& directory, int max_frames)
{
    std::error_code ec;
    std::filesystem::directory_iterator it(directory, ec);
    if (ec)
        throw IoError("cannot open sequence directory: " + directory);

    for (const auto& entry : it) {
        if (!entry.is_regular_file() || !has_netpbm_extension(entry.path()))
            continue;
        entries_.push_back({entry.path(), 0});
    }
    if (entries_.empty())
        throw ValidationError("no frames in sequence directory: " + directory);

    bool all_numbered = true;
    std::vector<std::optional<int>> numbers(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        numbers[i] = stem_number(entries_[i].path);
        all_numbered = all_numbered && numbers[i].has_value();
    }
    std::vector<std::size_t> order(entries_.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    if (all_numbered) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (*numbers[a] != *numbers[b])
                return *numbers[a] < *numbers[b];
            return entries_[a].path.filename() < entries_[b].path.filename();
        });
    } else {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return entries_[a].path.filename() < entries_[b].path.filename();
        });
    }

    std::vector<Entry> sorted;
    sorted.reserve(entries_.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        Entry e = entries_[order[rank]];
        e.index = all_numbered ? *numbers[order[rank]] : static_cast<int>(rank) + 1;
        sorted.push_back(std::move(e));
    }
    entries_ = std::move(sorted);
    for (std::size_t i = 1; i < entries_.size(); ++i)
        if (entries_[i].index == entries_[i - 1].index)
            entries_[i].index = entries_[i - 1].index + 1;

    if (max_frames > 0 && static_cast<int>(entries_.size()) > max_frames)
        entries_.resize(static_cast<std::size_t>(max_frames));
}

Frame SequenceSource::read(int position)
{
    const Entry& entry = entries_.at(static_cast<std::size_t>(position));
    Frame frame = read_frame(entry.path.string());
    frame.index = entry.index;
    if (width_ == 0) {
        width_ = frame.width;
        height_ = frame.height;
        channels_ = frame.channels;
    } else if (frame.width != width_ || frame.height != height_ ||
               frame.channels != channels_) {
        throw ValidationError("frame " + entry.path.filename().string() +
                              " does not match the sequence dimensions");
    }
    return frame;
}

std::vector<Detection> detect_in_frame(const Frame& frame,
                                       const std::vector<std::uint8_t>& mask,
                                       const AnyModel& model, const PipelineConfig& cfg)
{
    const std::vector<CandidateWindow> windows = select_windows(mask, frame, cfg.window);

    std::vector<Detection> raw;
    for (const CandidateWindow& window : windows) {
        double score = 0.0;
        if (std::holds_alternative<Network>(model)) {
            const PhogDescriptor desc = phog_descriptor(window.patch, cfg.phog);
            score = classify(std::get<Network>(model), desc).score;
        } else {
            const LrfNetwork& lrf = std::get<LrfNetwork>(model);
            std::vector<double> gray = to_grayscale(window.patch);
            for (double& v : gray)
                v /= 255.0;
            score = lrf_score(lrf, gray);
        }
        if (score >= cfg.score_threshold)
            raw.push_back({frame.index, window.box, score});
    }
    return merge_detections(raw, cfg.window.width / 2.0);
}

void run_pipeline(const PipelineConfig& cfg, SequenceSource& source,
                  const AnyModel& model, const FrameSink& sink)
{
    cfg.validate();
    if (std::holds_alternative<LrfNetwork>(model)) {
        const LrfNetwork& lrf = std::get<LrfNetwork>(model);
        if (lrf.input_width != cfg.window.width || lrf.input_height != cfg.window.height)
            throw ValidationError("lrf model window geometry does not match the config");
    }

    std::optional<BackgroundModel> background;
    Tracker tracker(cfg.tracker);

    auto annotate_errors = [](int frame_index, const char* stage, auto&& fn) {
        const auto where = [&](const char* what) {
            return "frame " + std::to_string(frame_index) + ", stage " + stage + ": " +
                   what;
        };
        try {
            return fn();
        } catch (const ValidationError& e) {
            throw ValidationError(where(e.what()));
        } catch (const std::exception& e) {
            throw std::runtime_error(where(e.what()));
        }
    };

    for (int position = 0; position < source.frame_count(); ++position) {
        const Frame frame = source.read(position);
        if (!background)
            background.emplace(frame.width, frame.height, frame.channels,
                               cfg.background);

        FrameOutput output;
        output.frame_index = frame.index;
        output.mask = annotate_errors(frame.index, "background",
                                      [&] { return background->process_frame(frame); });
        output.detections = annotate_errors(frame.index, "detect", [&] {
            return detect_in_frame(frame, output.mask, model, cfg);
        });
        output.records = annotate_errors(frame.index, "tracking", [&] {
            return tracker.step(frame.index, output.detections);
        });
        sink(frame, output);
    }
}

std::uint8_t annotation_level(int track_id)
{
    return static_cast<std::uint8_t>(64 + (static_cast<unsigned>(track_id) * 37) % 192);
}

void annotate_frame(Frame& frame, const std::vector<TrackRecord>& records)
{
    for (const TrackRecord& record : records) {
        const std::uint8_t level = annotation_level(record.track_id);
        const BoundingBox& box = record.box;
        const int x0 = std::clamp(box.x_start, 0, frame.width - 1);
        const int y0 = std::clamp(box.y_start, 0, frame.height - 1);
        const int x1 = std::clamp(box.x_start + box.width - 1, 0, frame.width - 1);
        const int y1 = std::clamp(box.y_start + box.height - 1, 0, frame.height - 1);
        for (int x = x0; x <= x1; ++x)
            for (int c = 0; c < frame.channels; ++c) {
                frame.at(x, y0, c) = level;
                frame.at(x, y1, c) = level;
            }
        for (int y = y0; y <= y1; ++y)
            for (int c = 0; c < frame.channels; ++c) {
                frame.at(x0, y, c) = level;
                frame.at(x1, y, c) = level;
            }
    }
}

void write_detections_csv(const std::string& path,
                          const std::vector<Detection>& detections)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    out << "frame,x,y,width,height,score\n";
    for (const Detection& d : detections)
        out << d.frame_index << "," << d.box.x_start << "," << d.box.y_start << ","
            << d.box.width << "," << d.box.height << "," << format_score(d.score)
            << "\n";
}

void append_tracks_csv_header(std::ostream& out)
{
    out << "frame,track_id,x,y,width,height,score\n";
}

void append_tracks_csv(std::ostream& out, const std::vector<TrackRecord>& records)
{
    for (const TrackRecord& r : records)
        out << r.frame_index << "," << r.track_id << "," << r.box.x_start << ","
            << r.box.y_start << "," << r.box.width << "," << r.box.height << ","
            << format_score(r.score) << "\n";
}

std::vector<GroundTruthObject> read_objects_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);

    std::vector<GroundTruthObject> objects;
    std::string line;
    int line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (first) {
            first = false;
            // Header row: first field does not start with a digit or sign.
            const char c = fields[0].empty() ? '\0' : fields[0][0];
            if (!std::isdigit(static_cast<unsigned char>(c)) && c != '-' && c != '+')
                continue;
        }
        if (fields.size() != 4 && fields.size() != 6 && fields.size() != 7)
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": expected frame,id,x,y[,width,height][,score]");

        GroundTruthObject obj;
        obj.frame_index =
            static_cast<int>(parse_csv_number(fields[0], path, line_no));
        obj.object_id = static_cast<int>(parse_csv_number(fields[1], path, line_no));
        const double x = parse_csv_number(fields[2], path, line_no);
        const double y = parse_csv_number(fields[3], path, line_no);
        if (fields.size() >= 6) {
            const double w = parse_csv_number(fields[4], path, line_no);
            const double h = parse_csv_number(fields[5], path, line_no);
            obj.center = {x + w / 2.0, y + h / 2.0};
        } else {
            obj.center = {x, y};
        }
        objects.push_back(obj);
    }
    return objects;
}

void write_features_csv(const std::string& path,
                        const std::vector<LabeledSample>& samples)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    const std::size_t dim = samples.empty() ? 0 : samples.front().features.size();
    out << "label";
    for (std::size_t i = 0; i < dim; ++i)
        out << ",f" << i;
    out << "\n";
    char buf[32];
    for (const LabeledSample& s : samples) {
        out << s.label;
        for (double v : s.features) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << "," << buf;
        }
        out << "\n";
    }
}

std::vector<LabeledSample> read_features_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);

    std::vector<LabeledSample> samples;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line_no == 1 && line.rfind("label", 0) == 0)
            continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() < 2)
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": expected label plus at least one feature");
        LabeledSample sample;
        sample.label = static_cast<int>(parse_csv_number(fields[0], path, line_no));
        if (sample.label != 0 && sample.label != 1)
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": labels must be 0 or 1");
        sample.features.reserve(fields.size() - 1);
        for (std::size_t i = 1; i < fields.size(); ++i)
            sample.features.push_back(parse_csv_number(fields[i], path, line_no));
        if (!samples.empty() &&
            sample.features.size() != samples.front().features.size())
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": inconsistent feature count");
        samples.push_back(std::move(sample));
    }
    if (samples.empty())
        throw ValidationError("feature file holds no samples: " + path);
    return samples;
}

std::vector<LabeledSample> features_from_patch_dirs(const std::string& directory,
                                                    const PhogParams& params)
{
    std::vector<LabeledSample> samples;
    for (const auto& [sub, label] : {std::pair<const char*, int>{"pos", 0}, {"neg", 1}}) {
        const std::filesystem::path dir = std::filesystem::path(directory) / sub;
        std::error_code ec;
        std::filesystem::directory_iterator it(dir, ec);
        if (ec)
            throw IoError("cannot open patch directory: " + dir.string());
        std::vector<std::filesystem::path> paths;
        for (const auto& entry : it)
            if (entry.is_regular_file() && has_netpbm_extension(entry.path()))
                paths.push_back(entry.path());
        std::sort(paths.begin(), paths.end());
        for (const auto& p : paths) {
            const Frame patch = read_frame(p.string());
            samples.push_back({phog_descriptor(patch, params).values, label});
        }
    }
    if (samples.empty())
        throw ValidationError("no labeled patches under " + directory);
    return samples;
}

}   // namespace pedtrack
