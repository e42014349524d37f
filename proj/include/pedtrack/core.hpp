#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pedtrack {

// Raised when inputs violate a documented precondition (bad dimensions,
// out-of-range parameters, mismatched sizes). The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double euclidean_distance(const Point& a, const Point& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Axis-aligned box, origin at the top-left corner, y pointing down.
struct BoundingBox {
    int x_start = 0;
    int y_start = 0;
    int width = 0;
    int height = 0;

    bool valid() const { return width > 0 && height > 0; }

    bool inside(int frame_width, int frame_height) const
    {
        return valid() && x_start >= 0 && y_start >= 0 &&
               x_start + width <= frame_width && y_start + height <= frame_height;
    }
};

inline Point centroid(const BoundingBox& box)
{
    return {box.x_start + box.width / 2.0, box.y_start + box.height / 2.0};
}

// One image; intensities are 8-bit at I/O boundaries, channels interleaved
// row-major. index is the 1-based frame number within its sequence.
struct Frame {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;
    int index = 1;

    static Frame create(int width, int height, int channels, int index = 1)
    {
        if (width <= 0 || height <= 0)
            throw ValidationError("frame dimensions must be positive");
        if (channels != 1 && channels != 3)
            throw ValidationError("frame must have 1 or 3 channels");
        Frame f;
        f.width = width;
        f.height = height;
        f.channels = channels;
        f.index = index;
        f.pixels.assign(static_cast<std::size_t>(width) * height * channels, 0);
        return f;
    }

    std::size_t offset(int x, int y, int c = 0) const
    {
        return (static_cast<std::size_t>(y) * width + x) * channels + c;
    }

    std::uint8_t at(int x, int y, int c = 0) const { return pixels[offset(x, y, c)]; }
    std::uint8_t& at(int x, int y, int c = 0) { return pixels[offset(x, y, c)]; }

    Frame crop(const BoundingBox& box) const
    {
        if (!box.inside(width, height))
            throw ValidationError("crop box does not lie inside the frame");
        Frame out = create(box.width, box.height, channels, index);
        for (int y = 0; y < box.height; ++y) {
            const std::uint8_t* src = &pixels[offset(box.x_start, box.y_start + y)];
            std::uint8_t* dst = &out.pixels[out.offset(0, y)];
            std::copy(src, src + static_cast<std::size_t>(box.width) * channels, dst);
        }
        return out;
    }
};

struct Detection {
    int frame_index = 0;
    BoundingBox box;
    double score = 0.0;   // classifier output in [0, 1]
};

struct TrackRecord {
    int track_id = 0;
    int frame_index = 0;
    BoundingBox box;
    Point predicted_center;
    double score = 0.0;
};

}   // namespace pedtrack
