#include "pedtrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "pedtrack/netpbm.hpp"

namespace pedtrack {

namespace {

// splitmix64; keeps scene generation independent of library RNG changes.
struct Rng {
    std::uint64_t state;

    std::uint64_t next()
    {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    int below(int bound) { return static_cast<int>(next() % static_cast<std::uint64_t>(bound)); }
};

BoundingBox object_box(const ObjectSpec& obj, int frame_index)
{
    const double t = static_cast<double>(frame_index - 1);
    return {static_cast<int>(std::lround(obj.x0 + t * obj.vx)),
            static_cast<int>(std::lround(obj.y0 + t * obj.vy)), obj.width, obj.height};
}

}   // namespace

void SceneSpec::validate() const
{
    if (width < 1 || height < 1)
        throw ValidationError("synth: scene dimensions must be positive");
    if (frame_count < 1)
        throw ValidationError("synth: frame count must be >= 1");
    if (noise_level < 0 || noise_level > 64)
        throw ValidationError("synth: noise level must lie in [0, 64]");
    if (texture_high < texture_low)
        throw ValidationError("synth: texture range is inverted");
    for (const ObjectSpec& obj : objects) {
        if (obj.width < 1 || obj.height < 1)
            throw ValidationError("synth: object dimensions must be positive");
        for (int t = 1; t <= frame_count; ++t) {
            const BoundingBox box = object_box(obj, t);
            if (!box.inside(width, height))
                throw ValidationError("synth: object " + std::to_string(obj.object_id) +
                                      " leaves the frame at frame " + std::to_string(t));
        }
    }
}

SyntheticScene generate_synthetic_scene(const SceneSpec& spec)
{
    spec.validate();

    const std::size_t pixel_count = static_cast<std::size_t>(spec.width) * spec.height;
    std::vector<std::uint8_t> texture(pixel_count);
    Rng rng{spec.seed ^ 0xa02bdbf7bb3c0a7ULL};
    const int span = spec.texture_high - spec.texture_low + 1;
    for (std::uint8_t& v : texture)
        v = static_cast<std::uint8_t>(spec.texture_low + rng.below(span));

    SyntheticScene scene;
    scene.frames.reserve(static_cast<std::size_t>(spec.frame_count));
    for (int t = 1; t <= spec.frame_count; ++t) {
        Frame frame = Frame::create(spec.width, spec.height, 1, t);
        for (std::size_t i = 0; i < pixel_count; ++i) {
            int v = texture[i];
            if (spec.noise_level > 0)
                v += rng.below(2 * spec.noise_level + 1) - spec.noise_level;
            frame.pixels[i] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
        }
        for (const ObjectSpec& obj : spec.objects) {
            const BoundingBox box = object_box(obj, t);
            for (int y = box.y_start; y < box.y_start + box.height; ++y)
                for (int x = box.x_start; x < box.x_start + box.width; ++x)
                    frame.at(x, y) = obj.intensity;
            scene.ground_truth.push_back({t, obj.object_id, centroid(box)});
            scene.ground_truth_boxes.push_back(box);
        }
        scene.frames.push_back(std::move(frame));
    }
    return scene;
}

void write_synthetic_scene(const SceneSpec& spec, const std::string& directory)
{
    const SyntheticScene scene = generate_synthetic_scene(spec);
    std::filesystem::create_directories(directory);

    char name[32];
    for (const Frame& frame : scene.frames) {
        std::snprintf(name, sizeof(name), "frame_%06d.pgm", frame.index);
        write_frame(frame, (std::filesystem::path(directory) / name).string());
    }

    const auto gt_path = std::filesystem::path(directory) / "gt.csv";
    std::ofstream out(gt_path);
    if (!out)
        throw PnmError(PnmErrorKind::unwritable, "cannot write " + gt_path.string());
    out << "frame,object_id,x,y,width,height\n";
    for (std::size_t i = 0; i < scene.ground_truth.size(); ++i) {
        const GroundTruthObject& gt = scene.ground_truth[i];
        const BoundingBox& box = scene.ground_truth_boxes[i];
        out << gt.frame_index << "," << gt.object_id << "," << box.x_start << ","
            << box.y_start << "," << box.width << "," << box.height << "\n";
    }
}

}   // namespace pedtrack
