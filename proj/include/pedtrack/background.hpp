#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "pedtrack/core.hpp"

namespace pedtrack {

// One Gaussian of a per-pixel mixture. The variance is a single scalar shared
// across channels; only the first `channels` entries of mean are used.
struct GaussianComponent {
    double weight = 0.0;
    std::array<double, 3> mean{0.0, 0.0, 0.0};
    double variance = 1.0;
};

using PixelMixture = std::vector<GaussianComponent>;

struct BackgroundParams {
    int k = 5;                     // components per pixel
    double alpha = 0.05;           // learning rate
    double background_portion = 0.7;   // T, minimum weight mass treated as background
    double init_variance = 225.0;
    double init_weight = 0.05;
    double variance_floor = 4.0;

    void validate() const;
};

// Squared-distance match rule: a pixel matches a component when it lies
// within 2.5 standard deviations of the mean, Euclidean over channels.
bool match_component(std::span<const double> pixel, const GaussianComponent& comp,
                     int channels);

// Spherical Gaussian density with per-channel dimensionality n = channels.
double gaussian_density(std::span<const double> pixel, const GaussianComponent& comp,
                        int channels);

// Convex mean/variance updates for a matched component with learning factor rho.
double updated_mean(double mean, double rho, double value);
double updated_variance(double variance, double rho, double squared_residual);

// Runs one online update of the mixture for an observed pixel value. Returns
// the index of the matched component, or nullopt when no component matched and
// the least probable one was replaced. Weights sum to 1 on return.
std::optional<int> update_pixel(std::span<GaussianComponent> mixture,
                                std::span<const double> pixel, int channels,
                                const BackgroundParams& params);

// Number of top-ranked components (by w/sigma) whose cumulative weight first
// exceeds the background portion T.
int background_count(std::span<const GaussianComponent> mixture, double portion);

class BackgroundModel {
public:
    BackgroundModel(int width, int height, int channels, BackgroundParams params);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    const BackgroundParams& params() const { return params_; }

    std::span<const GaussianComponent> mixture(int x, int y) const;

    // Updates every pixel model with the frame and returns the foreground
    // mask (1 = foreground, 0 = background). The first frame ever processed
    // seeds the dominant component means from the observed pixels.
    std::vector<std::uint8_t> process_frame(const Frame& frame);

private:
    int width_;
    int height_;
    int channels_;
    BackgroundParams params_;
    bool seeded_ = false;
    std::vector<GaussianComponent> components_;   // width*height*k, row-major
};

}   // namespace pedtrack
