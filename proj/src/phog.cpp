#include "pedtrack/phog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pedtrack {

void PhogParams::validate() const
{
    if (bins < 2)
        throw ValidationError("phog: bins must be >= 2");
    if (levels < 0)
        throw ValidationError("phog: levels must be >= 0");
    if (levels > 3)
        throw ValidationError("phog: levels above 3 overfit; raise the cap explicitly");
}

int phog_dimension(int bins, int levels)
{
    int cells = 0;
    int per_level = 1;
    for (int l = 0; l <= levels; ++l) {
        cells += per_level;
        per_level *= 4;
    }
    return bins * cells;
}

std::vector<double> to_grayscale(const Frame& window)
{
    const std::size_t n = static_cast<std::size_t>(window.width) * window.height;
    std::vector<double> gray(n);
    if (window.channels == 1) {
        for (std::size_t i = 0; i < n; ++i)
            gray[i] = static_cast<double>(window.pixels[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint8_t* px = &window.pixels[i * 3];
            gray[i] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
        }
    }
    return gray;
}

GradientField compute_gradients(const Frame& window, OrientationRange range)
{
    if (window.width < 2 || window.height < 2)
        throw ValidationError("phog: gradient window must be at least 2x2");

    const int w = window.width;
    const int h = window.height;
    const std::vector<double> gray = to_grayscale(window);

    GradientField field;
    field.width = w;
    field.height = h;
    field.magnitude.resize(static_cast<std::size_t>(w) * h);
    field.orientation.resize(static_cast<std::size_t>(w) * h);

    constexpr double rad_to_deg = 180.0 / std::numbers::pi;
    for (int y = 0; y < h; ++y) {
        const int yu = std::max(y - 1, 0);
        const int yd = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xl = std::max(x - 1, 0);
            const int xr = std::min(x + 1, w - 1);
            const double gx = gray[static_cast<std::size_t>(y) * w + xr] -
                              gray[static_cast<std::size_t>(y) * w + xl];
            const double gy = gray[static_cast<std::size_t>(yd) * w + x] -
                              gray[static_cast<std::size_t>(yu) * w + x];
            double deg = std::atan2(gy, gx) * rad_to_deg;
            if (range == OrientationRange::signed_360) {
                if (deg < 0.0)
                    deg += 360.0;
                if (deg >= 360.0)
                    deg -= 360.0;
            } else {
                if (deg < 0.0)
                    deg += 180.0;
                if (deg >= 180.0)
                    deg -= 180.0;
            }
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            field.magnitude[i] = std::hypot(gx, gy);
            field.orientation[i] = deg;
        }
    }
    return field;
}

PhogDescriptor phog_descriptor(const Frame& window, const PhogParams& params)
{
    params.validate();
    const int min_extent = 1 << params.levels;
    if (window.width < min_extent || window.height < min_extent)
        throw ValidationError("phog: window too small for the level count");

    const GradientField field = compute_gradients(window, params.range);
    const double span =
        params.range == OrientationRange::signed_360 ? 360.0 : 180.0;
    const double bin_width = span / params.bins;

    PhogDescriptor desc;
    desc.values.assign(static_cast<std::size_t>(phog_dimension(params.bins, params.levels)),
                       0.0);

    // Cell (cx, cy) at a level spans [floor(c*dim/grid), floor((c+1)*dim/grid)).
    std::size_t level_offset = 0;
    for (int level = 0; level <= params.levels; ++level) {
        const int grid = 1 << level;
        for (int cy = 0; cy < grid; ++cy) {
            const int y0 = cy * field.height / grid;
            const int y1 = (cy + 1) * field.height / grid;
            for (int cx = 0; cx < grid; ++cx) {
                const int x0 = cx * field.width / grid;
                const int x1 = (cx + 1) * field.width / grid;
                const std::size_t cell = static_cast<std::size_t>(cy) * grid + cx;
                double* hist = &desc.values[level_offset + cell * params.bins];
                for (int y = y0; y < y1; ++y) {
                    for (int x = x0; x < x1; ++x) {
                        const std::size_t i = static_cast<std::size_t>(y) * field.width + x;
                        const double mag = field.magnitude[i];
                        if (mag == 0.0)
                            continue;
                        int bin = static_cast<int>(field.orientation[i] / bin_width);
                        bin = std::min(bin, params.bins - 1);
                        hist[bin] += mag;
                    }
                }
            }
        }
        level_offset += static_cast<std::size_t>(grid) * grid * params.bins;
    }

    double total = 0.0;
    for (double v : desc.values)
        total += v;
    if (total > 0.0) {
        for (double& v : desc.values)
            v /= total;
    }
    return desc;
}

}   // namespace pedtrack
