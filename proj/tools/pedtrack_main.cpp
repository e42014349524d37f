#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pedtrack/config.hpp"
#include "pedtrack/metrics.hpp"
#include "pedtrack/netpbm.hpp"
#include "pedtrack/neuralnet.hpp"
#include "pedtrack/pipeline.hpp"
#include "pedtrack/synth.hpp"

namespace {

namespace fs = std::filesystem;
using namespace pedtrack;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitInternal = 3;

struct CommonOptions {
    std::string config_path;
    std::string input;
    std::string output;
    std::string model;
    std::string gt;
    int max_frames = 0;
    std::optional<std::uint64_t> seed;
    bool annotate = false;
};

PipelineConfig load_or_default(const CommonOptions& opts)
{
    PipelineConfig cfg =
        opts.config_path.empty() ? PipelineConfig{} : load_config(opts.config_path);
    if (opts.max_frames > 0)
        cfg.evaluation.max_frames = opts.max_frames;
    if (opts.seed)
        cfg.training.seed = *opts.seed;
    return cfg;
}

std::string frame_name(const char* prefix, int index, const char* ext)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%06d.%s", prefix, index, ext);
    return buf;
}

int run_bgsub(const CommonOptions& opts)
{
    const PipelineConfig cfg = load_or_default(opts);
    SequenceSource source(opts.input, cfg.evaluation.max_frames);
    fs::create_directories(opts.output);

    std::optional<BackgroundModel> model;
    for (int i = 0; i < source.frame_count(); ++i) {
        const Frame frame = source.read(i);
        if (!model)
            model.emplace(frame.width, frame.height, frame.channels, cfg.background);
        const std::vector<std::uint8_t> mask = model->process_frame(frame);
        write_mask(mask, frame.width, frame.height,
                   (fs::path(opts.output) / frame_name("mask", frame.index, "pgm"))
                       .string());
    }
    std::cout << "wrote " << source.frame_count() << " masks to " << opts.output << "\n";
    return kExitOk;
}

int run_train(const CommonOptions& opts)
{
    const PipelineConfig cfg = load_or_default(opts);

    std::vector<LabeledSample> samples;
    if (fs::is_directory(opts.input))
        samples = features_from_patch_dirs(opts.input, cfg.phog);
    else
        samples = read_features_csv(opts.input);

    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(samples.front().features.size()));
    for (int h : cfg.training.hidden_sizes)
        sizes.push_back(h);
    sizes.push_back(2);

    Network net = Network::seeded(sizes, cfg.training.seed);
    TrainConfig train_cfg;
    train_cfg.epochs = cfg.training.epochs;
    train_cfg.learning_rate = cfg.training.learning_rate;
    train_cfg.seed = cfg.training.seed;
    train_cfg.batch_size = cfg.training.batch_size;
    const TrainStats stats = train(net, samples, train_cfg);

    save_model(net, opts.model);
    std::cout << "trained on " << samples.size() << " samples, final loss "
              << stats.epoch_losses.back() << ", training accuracy "
              << stats.final_accuracy << ", model written to " << opts.model << "\n";
    return kExitOk;
}

int run_detect(const CommonOptions& opts)
{
    const PipelineConfig cfg = load_or_default(opts);
    const AnyModel model = load_any_model(opts.model);
    SequenceSource source(opts.input, cfg.evaluation.max_frames);
    fs::create_directories(opts.output);

    std::vector<Detection> all;
    std::optional<BackgroundModel> background;
    for (int i = 0; i < source.frame_count(); ++i) {
        const Frame frame = source.read(i);
        if (!background)
            background.emplace(frame.width, frame.height, frame.channels,
                               cfg.background);
        const std::vector<std::uint8_t> mask = background->process_frame(frame);
        const std::vector<Detection> detections =
            detect_in_frame(frame, mask, model, cfg);
        all.insert(all.end(), detections.begin(), detections.end());
    }
    const std::string path = (fs::path(opts.output) / "detections.csv").string();
    write_detections_csv(path, all);
    std::cout << "wrote " << all.size() << " detections to " << path << "\n";
    return kExitOk;
}

int run_track(const CommonOptions& opts)
{
    const PipelineConfig cfg = load_or_default(opts);
    const AnyModel model = load_any_model(opts.model);
    SequenceSource source(opts.input, cfg.evaluation.max_frames);
    fs::create_directories(opts.output);

    const std::string tracks_path = (fs::path(opts.output) / "tracks.csv").string();
    std::ofstream tracks(tracks_path);
    if (!tracks)
        throw IoError("cannot write " + tracks_path);
    append_tracks_csv_header(tracks);

    long long records = 0;
    run_pipeline(cfg, source, model, [&](const Frame& frame, const FrameOutput& out) {
        append_tracks_csv(tracks, out.records);
        records += static_cast<long long>(out.records.size());
        if (opts.annotate) {
            Frame annotated = frame;
            annotate_frame(annotated, out.records);
            const char* ext = annotated.channels == 1 ? "pgm" : "ppm";
            write_frame(annotated, (fs::path(opts.output) /
                                    frame_name("annotated", frame.index, ext))
                                       .string());
        }
    });
    tracks.flush();
    std::cout << "wrote " << records << " track records to " << tracks_path << "\n";
    return kExitOk;
}

int run_evaluate(const CommonOptions& opts)
{
    const PipelineConfig cfg = load_or_default(opts);
    std::vector<GroundTruthObject> gt = read_objects_csv(opts.gt);
    std::vector<GroundTruthObject> hyp = read_objects_csv(opts.input);

    if (cfg.evaluation.max_frames > 0) {
        const int limit = cfg.evaluation.max_frames;
        std::erase_if(gt, [&](const GroundTruthObject& o) { return o.frame_index > limit; });
        std::erase_if(hyp, [&](const GroundTruthObject& o) { return o.frame_index > limit; });
    }

    const std::vector<FrameEvents> events =
        establish_correspondence(gt, hyp, cfg.evaluation.distance_threshold);
    const MotReport report = mota(events);

    std::printf("CLEAR MOT evaluation over %zu frames\n", events.size());
    std::printf("  matches:          %lld\n", report.total_matches);
    std::printf("  misses:           %lld\n", report.total_misses);
    std::printf("  false positives:  %lld\n", report.total_false_positives);
    std::printf("  mismatches:       %lld\n", report.total_mismatches);
    std::printf("  gt objects:       %lld\n", report.total_gt);
    std::printf("\n");
    if (report.motp)
        std::printf("motp=%.6f\n", *report.motp);
    else
        std::printf("motp=undefined\n");
    std::printf("mota=%.6f\n", report.mota);
    std::printf("miss_rate=%.6f\n", report.miss_rate);
    std::printf("fp_rate=%.6f\n", report.fp_rate);
    std::printf("mismatch_rate=%.6f\n", report.mismatch_rate);
    std::printf("matches=%lld\nmisses=%lld\nfalse_positives=%lld\nmismatches=%lld\ngt_total=%lld\n",
                report.total_matches, report.total_misses, report.total_false_positives,
                report.total_mismatches, report.total_gt);
    return kExitOk;
}

int run_synth(const CommonOptions& opts, const SceneSpec& base,
              const std::vector<std::string>& object_specs)
{
    SceneSpec spec = base;
    if (opts.seed)
        spec.seed = *opts.seed;
    for (const std::string& text : object_specs) {
        ObjectSpec obj;
        int intensity = 0;
        const int got = std::sscanf(text.c_str(), "%d,%lf,%lf,%lf,%lf,%d,%d,%d",
                                    &obj.object_id, &obj.x0, &obj.y0, &obj.vx, &obj.vy,
                                    &obj.width, &obj.height, &intensity);
        if (got != 8 || intensity < 0 || intensity > 255)
            throw ValidationError(
                "object spec must be 'id,x0,y0,vx,vy,width,height,intensity': " + text);
        obj.intensity = static_cast<std::uint8_t>(intensity);
        spec.objects.push_back(obj);
    }
    write_synthetic_scene(spec, opts.output);
    std::cout << "wrote " << spec.frame_count << " frames and gt.csv to " << opts.output
              << "\n";
    return kExitOk;
}

}   // namespace

int main(int argc, char** argv)
{
    CLI::App app{"pedestrian detection and tracking over netpbm image sequences"};
    app.require_subcommand(1);

    CommonOptions opts;
    SceneSpec scene;
    std::vector<std::string> object_specs;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_path, "configuration file");
        cmd->add_option("--max-frames", opts.max_frames, "process at most N frames");
    };

    CLI::App* bgsub = app.add_subcommand("bgsub", "write foreground masks only");
    add_common(bgsub);
    bgsub->add_option("--input", opts.input, "frame directory")->required();
    bgsub->add_option("--output", opts.output, "output directory")->required();

    CLI::App* train_cmd =
        app.add_subcommand("train", "train the classifier from features or patches");
    add_common(train_cmd);
    train_cmd->add_option("--input", opts.input,
                          "features CSV, or a directory with pos/ and neg/ patches")
        ->required();
    train_cmd->add_option("--model", opts.model, "output model path")->required();
    train_cmd->add_option("--seed", opts.seed, "training seed override");

    CLI::App* detect = app.add_subcommand("detect", "per-frame detections CSV");
    add_common(detect);
    detect->add_option("--input", opts.input, "frame directory")->required();
    detect->add_option("--model", opts.model, "classifier model")->required();
    detect->add_option("--output", opts.output, "output directory")->required();

    CLI::App* track = app.add_subcommand("track", "full pipeline to tracks CSV");
    add_common(track);
    track->add_option("--input", opts.input, "frame directory")->required();
    track->add_option("--model", opts.model, "classifier model")->required();
    track->add_option("--output", opts.output, "output directory")->required();
    track->add_flag("--annotate", opts.annotate, "write annotated frames");

    CLI::App* evaluate = app.add_subcommand("evaluate", "CLEAR MOT report");
    add_common(evaluate);
    evaluate->add_option("--input", opts.input, "hypothesis tracks CSV")->required();
    evaluate->add_option("--gt", opts.gt, "ground-truth CSV")->required();

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scene");
    synth->add_option("--output", opts.output, "output directory")->required();
    synth->add_option("--seed", opts.seed, "scene seed");
    synth->add_option("--width", scene.width, "frame width");
    synth->add_option("--height", scene.height, "frame height");
    synth->add_option("--frames", scene.frame_count, "frame count");
    synth->add_option("--noise", scene.noise_level, "per-frame noise amplitude");
    synth->add_option("--object", object_specs,
                      "id,x0,y0,vx,vy,width,height,intensity (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (bgsub->parsed())
            return run_bgsub(opts);
        if (train_cmd->parsed())
            return run_train(opts);
        if (detect->parsed())
            return run_detect(opts);
        if (track->parsed())
            return run_track(opts);
        if (evaluate->parsed())
            return run_evaluate(opts);
        if (synth->parsed())
            return run_synth(opts, scene, object_specs);
        std::cerr << "pedtrack: no subcommand selected\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "pedtrack: " << e.what() << "\n";
        return kExitValidation;
    } catch (const PnmError& e) {
        std::cerr << "pedtrack: " << e.what() << "\n";
        return kExitIo;
    } catch (const ModelFileError& e) {
        std::cerr << "pedtrack: " << e.what() << "\n";
        return kExitIo;
    } catch (const IoError& e) {
        std::cerr << "pedtrack: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "pedtrack: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "pedtrack: internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
