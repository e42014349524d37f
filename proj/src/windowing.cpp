#include "pedtrack/windowing.hpp"

namespace pedtrack {

void WindowConfig::validate() const
{
    if (width <= 0 || height <= 0)
        throw ValidationError("window: dimensions must be positive");
    if (stride_x < 1 || stride_y < 1)
        throw ValidationError("window: strides must be >= 1");
    if (!(occupancy_fraction > 0.0 && occupancy_fraction <= 1.0))
        throw ValidationError("window: occupancy_fraction must lie in (0, 1]");
}

std::vector<int> window_positions(int frame_extent, int window_extent, int stride)
{
    std::vector<int> positions;
    const int last = frame_extent - window_extent;
    for (int p = 0; p <= last; p += stride)
        positions.push_back(p);
    if (positions.empty() || positions.back() != last)
        positions.push_back(last);
    return positions;
}

std::vector<CandidateWindow> select_windows(const std::vector<std::uint8_t>& mask,
                                            const Frame& frame,
                                            const WindowConfig& cfg)
{
    cfg.validate();
    const std::size_t pixel_count =
        static_cast<std::size_t>(frame.width) * frame.height;
    if (mask.size() != pixel_count)
        throw ValidationError("window: mask and frame dimensions differ");
    if (cfg.width > frame.width || cfg.height > frame.height)
        throw ValidationError("window: window does not fit inside the frame");

    // Summed-area table over the mask; exact integer sums keep the result
    // identical to the direct per-window count.
    const int w = frame.width;
    const int h = frame.height;
    std::vector<std::int64_t> integral(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    for (int y = 0; y < h; ++y) {
        std::int64_t row = 0;
        for (int x = 0; x < w; ++x) {
            row += mask[static_cast<std::size_t>(y) * w + x] ? 1 : 0;
            integral[static_cast<std::size_t>(y + 1) * (w + 1) + (x + 1)] =
                integral[static_cast<std::size_t>(y) * (w + 1) + (x + 1)] + row;
        }
    }
    auto window_sum = [&](int x, int y) {
        const auto* top = &integral[static_cast<std::size_t>(y) * (w + 1)];
        const auto* bottom = &integral[static_cast<std::size_t>(y + cfg.height) * (w + 1)];
        return bottom[x + cfg.width] - bottom[x] - top[x + cfg.width] + top[x];
    };

    const double required =
        cfg.occupancy_fraction * static_cast<double>(cfg.width) * cfg.height;
    const std::vector<int> xs = window_positions(w, cfg.width, cfg.stride_x);
    const std::vector<int> ys = window_positions(h, cfg.height, cfg.stride_y);

    std::vector<CandidateWindow> selected;
    for (int y : ys) {
        for (int x : xs) {
            const std::int64_t occupancy = window_sum(x, y);
            if (static_cast<double>(occupancy) >= required) {
                BoundingBox box{x, y, cfg.width, cfg.height};
                selected.push_back({box, frame.crop(box), static_cast<int>(occupancy)});
            }
        }
    }
    return selected;
}

}   // namespace pedtrack
