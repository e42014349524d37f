#include "pedtrack/background.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pedtrack {

namespace {

constexpr double kMatchSigmas = 2.5;

double squared_distance(std::span<const double> pixel, const GaussianComponent& comp,
                        int channels)
{
    double d2 = 0.0;
    for (int c = 0; c < channels; ++c) {
        const double d = pixel[c] - comp.mean[c];
        d2 += d * d;
    }
    return d2;
}

// Indices of the mixture ordered by w/sigma descending, ties by lower index.
void rank_by_fitness(std::span<const GaussianComponent> mixture, std::vector<int>& order)
{
    order.resize(mixture.size());
    for (std::size_t i = 0; i < mixture.size(); ++i)
        order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double fa = mixture[a].weight / std::sqrt(mixture[a].variance);
        const double fb = mixture[b].weight / std::sqrt(mixture[b].variance);
        return fa > fb;
    });
}

void renormalize_weights(std::span<GaussianComponent> mixture)
{
    double sum = 0.0;
    for (const auto& comp : mixture)
        sum += comp.weight;
    if (sum <= 0.0) {
        const double uniform = 1.0 / static_cast<double>(mixture.size());
        for (auto& comp : mixture)
            comp.weight = uniform;
        return;
    }
    for (auto& comp : mixture)
        comp.weight /= sum;
}

std::optional<int> update_pixel_ranked(std::span<GaussianComponent> mixture,
                                       std::span<const double> pixel, int channels,
                                       const BackgroundParams& params,
                                       const std::vector<int>& order)
{
    int matched = -1;
    for (int idx : order) {
        if (match_component(pixel, mixture[idx], channels)) {
            matched = idx;
            break;
        }
    }

    if (matched < 0) {
        // No match: the least probable component is restarted on the pixel.
        auto& comp = mixture[order.back()];
        comp.weight = params.init_weight;
        comp.variance = params.init_variance;
        for (int c = 0; c < channels; ++c)
            comp.mean[c] = pixel[c];
        renormalize_weights(mixture);
        return std::nullopt;
    }

    const double rho =
        std::clamp(params.alpha * gaussian_density(pixel, mixture[matched], channels),
                   0.0, 1.0);

    for (std::size_t i = 0; i < mixture.size(); ++i) {
        const double m = (static_cast<int>(i) == matched) ? 1.0 : 0.0;
        mixture[i].weight = (1.0 - params.alpha) * mixture[i].weight + params.alpha * m;
    }
    renormalize_weights(mixture);

    auto& comp = mixture[matched];
    for (int c = 0; c < channels; ++c)
        comp.mean[c] = updated_mean(comp.mean[c], rho, pixel[c]);
    comp.variance = updated_variance(comp.variance, rho,
                                     squared_distance(pixel, comp, channels));
    comp.variance = std::max(comp.variance, params.variance_floor);
    return matched;
}

}   // namespace

void BackgroundParams::validate() const
{
    if (k < 1)
        throw ValidationError("background: k must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ValidationError("background: alpha must lie in (0, 1)");
    if (!(background_portion > 0.0 && background_portion < 1.0))
        throw ValidationError("background: T must lie in (0, 1)");
    if (!(init_variance > 0.0))
        throw ValidationError("background: init_variance must be positive");
    if (!(init_weight > 0.0 && init_weight < 1.0))
        throw ValidationError("background: init_weight must lie in (0, 1)");
    if (variance_floor < 0.0)
        throw ValidationError("background: variance_floor must be non-negative");
}

bool match_component(std::span<const double> pixel, const GaussianComponent& comp,
                     int channels)
{
    return squared_distance(pixel, comp, channels) <=
           kMatchSigmas * kMatchSigmas * comp.variance;
}

double gaussian_density(std::span<const double> pixel, const GaussianComponent& comp,
                        int channels)
{
    const double d2 = squared_distance(pixel, comp, channels);
    const double norm = std::pow(2.0 * std::numbers::pi, channels / 2.0) *
                        std::pow(comp.variance, channels / 2.0);
    return std::exp(-0.5 * d2 / comp.variance) / norm;
}

double updated_mean(double mean, double rho, double value)
{
    return (1.0 - rho) * mean + rho * value;
}

double updated_variance(double variance, double rho, double squared_residual)
{
    return (1.0 - rho) * variance + rho * squared_residual;
}

std::optional<int> update_pixel(std::span<GaussianComponent> mixture,
                                std::span<const double> pixel, int channels,
                                const BackgroundParams& params)
{
    std::vector<int> order;
    rank_by_fitness({mixture.data(), mixture.size()}, order);
    return update_pixel_ranked(mixture, pixel, channels, params, order);
}

int background_count(std::span<const GaussianComponent> mixture, double portion)
{
    std::vector<int> order;
    rank_by_fitness(mixture, order);
    double cumulative = 0.0;
    for (std::size_t b = 0; b < order.size(); ++b) {
        cumulative += mixture[order[b]].weight;
        if (cumulative > portion)
            return static_cast<int>(b) + 1;
    }
    return static_cast<int>(mixture.size());
}

BackgroundModel::BackgroundModel(int width, int height, int channels,
                                 BackgroundParams params)
    : width_(width), height_(height), channels_(channels), params_(params)
{
    if (width <= 0 || height <= 0)
        throw ValidationError("background: model dimensions must be positive");
    if (channels != 1 && channels != 3)
        throw ValidationError("background: model must have 1 or 3 channels");
    params_.validate();

    GaussianComponent rest;
    rest.weight = 0.0;
    rest.variance = params_.init_variance;
    components_.assign(static_cast<std::size_t>(width) * height * params_.k, rest);
    for (std::size_t p = 0; p < static_cast<std::size_t>(width) * height; ++p)
        components_[p * params_.k].weight = 1.0;
}

std::span<const GaussianComponent> BackgroundModel::mixture(int x, int y) const
{
    const std::size_t base =
        (static_cast<std::size_t>(y) * width_ + x) * params_.k;
    return {components_.data() + base, static_cast<std::size_t>(params_.k)};
}

std::vector<std::uint8_t> BackgroundModel::process_frame(const Frame& frame)
{
    if (frame.width != width_ || frame.height != height_ || frame.channels != channels_)
        throw ValidationError("background: frame dimensions do not match the model");

    const std::size_t pixel_count = static_cast<std::size_t>(width_) * height_;
    std::vector<std::uint8_t> mask(pixel_count, 0);
    std::vector<int> order;
    std::array<double, 3> value{};

    for (std::size_t p = 0; p < pixel_count; ++p) {
        std::span<GaussianComponent> mix{components_.data() + p * params_.k,
                                         static_cast<std::size_t>(params_.k)};
        for (int c = 0; c < channels_; ++c)
            value[c] = static_cast<double>(frame.pixels[p * channels_ + c]);
        if (!seeded_) {
            for (int c = 0; c < channels_; ++c)
                mix[0].mean[c] = value[c];
        }

        rank_by_fitness({mix.data(), mix.size()}, order);
        const std::optional<int> matched = update_pixel_ranked(
            mix, {value.data(), static_cast<std::size_t>(channels_)}, channels_,
            params_, order);

        bool foreground = true;
        if (matched) {
            rank_by_fitness({mix.data(), mix.size()}, order);
            const int b = background_count({mix.data(), mix.size()},
                                           params_.background_portion);
            for (int rank = 0; rank < b; ++rank) {
                if (order[rank] == *matched) {
                    foreground = false;
                    break;
                }
            }
        }
        mask[p] = foreground ? 1 : 0;
    }
    seeded_ = true;
    return mask;
}

}   // namespace pedtrack
