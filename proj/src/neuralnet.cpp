#include "pedtrack/neuralnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>

namespace pedtrack {

namespace {

// Portable uniform double in [0, 1) from a raw 64-bit generator state; avoids
// std::uniform_real_distribution, whose output differs across libraries.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    double next_unit()
    {
        // splitmix64
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }

    double next_symmetric(double bound) { return (2.0 * next_unit() - 1.0) * bound; }

private:
    std::uint64_t state_;
};

void check_input_size(const Network& net, std::size_t n)
{
    if (n != static_cast<std::size_t>(net.layer_sizes().front()))
        throw ValidationError("network: input length does not match the input layer");
}

}   // namespace

double apply_transfer(Transfer t, double x)
{
    switch (t) {
    case Transfer::sigmoid:
        return 1.0 / (1.0 + std::exp(-x));
    case Transfer::identity:
        return x;
    case Transfer::tanh_fn:
        return std::tanh(x);
    }
    return x;
}

double transfer_derivative(Transfer t, double activated)
{
    switch (t) {
    case Transfer::sigmoid:
        return activated * (1.0 - activated);
    case Transfer::identity:
        return 1.0;
    case Transfer::tanh_fn:
        return 1.0 - activated * activated;
    }
    return 1.0;
}

const char* transfer_name(Transfer t)
{
    switch (t) {
    case Transfer::sigmoid:
        return "sigmoid";
    case Transfer::identity:
        return "identity";
    case Transfer::tanh_fn:
        return "tanh";
    }
    return "identity";
}

Transfer transfer_from_name(const std::string& name)
{
    if (name == "sigmoid")
        return Transfer::sigmoid;
    if (name == "identity")
        return Transfer::identity;
    if (name == "tanh")
        return Transfer::tanh_fn;
    throw ModelFileError("unknown transfer function name: " + name);
}

Network::Network(std::vector<int> layer_sizes, Transfer hidden, Transfer output)
    : layer_sizes_(std::move(layer_sizes)), hidden_(hidden), output_(output)
{
    if (layer_sizes_.size() < 2)
        throw ValidationError("network: need at least input and output layers");
    for (int s : layer_sizes_)
        if (s < 1)
            throw ValidationError("network: every layer needs at least one neuron");
    if (layer_sizes_.back() != 2)
        throw ValidationError("network: output layer must have exactly 2 neurons");

    weights_.resize(layer_sizes_.size() - 1);
    biases_.resize(layer_sizes_.size() - 1);
    for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
        weights_[l].assign(static_cast<std::size_t>(layer_sizes_[l]) * layer_sizes_[l + 1],
                           0.0);
        biases_[l].assign(static_cast<std::size_t>(layer_sizes_[l + 1]), 0.0);
    }
}

Network Network::seeded(std::vector<int> layer_sizes, std::uint64_t seed,
                        Transfer hidden, Transfer output)
{
    Network net(std::move(layer_sizes), hidden, output);
    UniformSource rng(seed);
    for (std::size_t l = 0; l + 1 < net.layer_sizes_.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(net.layer_sizes_[l]));
        for (double& w : net.weights_[l])
            w = rng.next_symmetric(bound);
        for (double& b : net.biases_[l])
            b = rng.next_symmetric(bound);
    }
    return net;
}

ForwardResult forward(const Network& net, const std::vector<double>& input)
{
    check_input_size(net, input.size());
    const auto& sizes = net.layer_sizes();
    ForwardResult result;
    result.activations.reserve(sizes.size());
    result.activations.push_back(input);

    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int in_size = sizes[l];
        const int out_size = sizes[l + 1];
        const bool last = (l + 2 == sizes.size());
        const Transfer t = last ? net.output_transfer() : net.hidden_transfer();
        const std::vector<double>& prev = result.activations.back();
        std::vector<double> next(static_cast<std::size_t>(out_size));
        const double* w = net.weights()[l].data();
        for (int o = 0; o < out_size; ++o) {
            double z = net.biases()[l][o];
            const double* row = w + static_cast<std::size_t>(o) * in_size;
            for (int i = 0; i < in_size; ++i)
                z += row[i] * prev[i];
            next[o] = apply_transfer(t, z);
        }
        result.activations.push_back(std::move(next));
    }
    return result;
}

std::vector<double> softmax(const std::vector<double>& logits)
{
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - peak);
        sum += out[i];
    }
    for (double& v : out)
        v /= sum;
    return out;
}

namespace {

Gradients zero_gradients(const Network& net)
{
    Gradients g;
    g.weights.resize(net.weights().size());
    g.biases.resize(net.biases().size());
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
        g.weights[l].assign(net.weights()[l].size(), 0.0);
        g.biases[l].assign(net.biases()[l].size(), 0.0);
    }
    return g;
}

// Backpropagates one sample into the accumulator; returns its loss.
double accumulate_gradient(const Network& net, const LabeledSample& sample,
                           Gradients& acc)
{
    if (sample.label != 0 && sample.label != 1)
        throw ValidationError("network: labels must be 0 or 1");

    const ForwardResult fwd = forward(net, sample.features);
    const auto& sizes = net.layer_sizes();
    const std::vector<double> probs = softmax(fwd.outputs());
    const double loss =
        -std::log(std::max(probs[static_cast<std::size_t>(sample.label)],
                           std::numeric_limits<double>::min()));

    // delta over the output pre-transfer values; softmax+cross-entropy over
    // the activated outputs, chained through h'.
    std::vector<double> delta(probs.size());
    for (std::size_t o = 0; o < probs.size(); ++o) {
        const double target = (static_cast<int>(o) == sample.label) ? 1.0 : 0.0;
        delta[o] = (probs[o] - target) *
                   transfer_derivative(net.output_transfer(), fwd.outputs()[o]);
    }

    for (std::size_t l = sizes.size() - 1; l-- > 0;) {
        const int in_size = sizes[l];
        const int out_size = sizes[l + 1];
        const std::vector<double>& input = fwd.activations[l];
        for (int o = 0; o < out_size; ++o) {
            const double d = delta[o];
            double* wrow = &acc.weights[l][static_cast<std::size_t>(o) * in_size];
            for (int i = 0; i < in_size; ++i)
                wrow[i] += d * input[i];
            acc.biases[l][o] += d;
        }
        if (l == 0)
            break;
        std::vector<double> prev_delta(static_cast<std::size_t>(in_size), 0.0);
        const double* w = net.weights()[l].data();
        for (int i = 0; i < in_size; ++i) {
            double sum = 0.0;
            for (int o = 0; o < out_size; ++o)
                sum += w[static_cast<std::size_t>(o) * in_size + i] * delta[o];
            prev_delta[i] =
                sum * transfer_derivative(net.hidden_transfer(), fwd.activations[l][i]);
        }
        delta = std::move(prev_delta);
    }
    return loss;
}

}   // namespace

Gradients gradient(const Network& net, const LabeledSample& sample)
{
    Gradients g = zero_gradients(net);
    accumulate_gradient(net, sample, g);
    return g;
}

BatchGradient batch_gradient(const Network& net,
                             const std::vector<LabeledSample>& samples)
{
    BatchGradient batch{zero_gradients(net), 0.0};
    for (const LabeledSample& s : samples)
        batch.loss += accumulate_gradient(net, s, batch.grads);
    return batch;
}

double sample_loss(const Network& net, const LabeledSample& sample)
{
    const ForwardResult fwd = forward(net, sample.features);
    const std::vector<double> probs = softmax(fwd.outputs());
    return -std::log(std::max(probs[static_cast<std::size_t>(sample.label)],
                              std::numeric_limits<double>::min()));
}

void TrainConfig::validate() const
{
    if (epochs < 1)
        throw ValidationError("train: epochs must be >= 1");
    if (!(learning_rate > 0.0))
        throw ValidationError("train: learning rate must be positive");
    if (batch_size < 0)
        throw ValidationError("train: batch size must be >= 0");
}

TrainStats train(Network& net, const std::vector<LabeledSample>& samples,
                 const TrainConfig& cfg)
{
    cfg.validate();
    if (samples.empty())
        throw ValidationError("train: dataset is empty");
    bool has[2] = {false, false};
    for (const LabeledSample& s : samples) {
        if (s.label != 0 && s.label != 1)
            throw ValidationError("train: labels must be 0 or 1");
        if (s.features.size() != static_cast<std::size_t>(net.layer_sizes().front()))
            throw ValidationError("train: feature length does not match the input layer");
        has[s.label] = true;
    }
    if (!has[0] || !has[1])
        throw ValidationError("train: both classes must be present");

    const std::size_t batch =
        cfg.batch_size == 0 ? samples.size()
                            : std::min<std::size_t>(cfg.batch_size, samples.size());

    // Mini-batch order is reshuffled every epoch from the seed, so batches
    // mix classes regardless of how the dataset was laid out on disk.
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    UniformSource shuffle_rng(cfg.seed ^ 0x5851f42d4c957f2dULL);

    TrainStats stats;
    double min_loss = std::numeric_limits<double>::infinity();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (batch < samples.size()) {
            for (std::size_t i = order.size(); i > 1; --i) {
                const std::size_t j = static_cast<std::size_t>(
                    shuffle_rng.next_unit() * static_cast<double>(i));
                std::swap(order[i - 1], order[std::min(j, i - 1)]);
            }
        }
        for (std::size_t start = 0; start < samples.size(); start += batch) {
            const std::size_t end = std::min(start + batch, samples.size());
            std::vector<LabeledSample> slice;
            slice.reserve(end - start);
            for (std::size_t i = start; i < end; ++i)
                slice.push_back(samples[order[i]]);
            const BatchGradient bg = batch_gradient(net, slice);
            const double scale = cfg.learning_rate / static_cast<double>(slice.size());
            for (std::size_t l = 0; l < net.weights().size(); ++l) {
                for (std::size_t i = 0; i < net.weights()[l].size(); ++i)
                    net.weights()[l][i] -= scale * bg.grads.weights[l][i];
                for (std::size_t i = 0; i < net.biases()[l].size(); ++i)
                    net.biases()[l][i] -= scale * bg.grads.biases[l][i];
            }
        }

        double loss = 0.0;
        int correct = 0;
        for (const LabeledSample& s : samples) {
            const ForwardResult fwd = forward(net, s.features);
            const std::vector<double> probs = softmax(fwd.outputs());
            loss -= std::log(std::max(probs[static_cast<std::size_t>(s.label)],
                                      std::numeric_limits<double>::min()));
            const int pred = probs[0] >= probs[1] ? 0 : 1;
            if (pred == s.label)
                ++correct;
        }
        loss /= static_cast<double>(samples.size());
        stats.epoch_losses.push_back(loss);
        stats.final_accuracy = static_cast<double>(correct) / samples.size();
        min_loss = std::min(min_loss, loss);
        if (loss > 2.0 * min_loss && !stats.diverged) {
            stats.diverged = true;
            std::cerr << "train: warning: loss " << loss
                      << " exceeds twice its running minimum " << min_loss << "\n";
        }
    }
    return stats;
}

Classification classify(const Network& net, const std::vector<double>& descriptor)
{
    const ForwardResult fwd = forward(net, descriptor);
    const std::vector<double> probs = softmax(fwd.outputs());
    Classification result;
    // Exact ties go to the pedestrian class.
    result.label = fwd.outputs()[0] >= fwd.outputs()[1] ? ClassLabel::pedestrian
                                                        : ClassLabel::background;
    result.score = probs[0];
    return result;
}

// ---------------------------------------------------------------------------
// Model files. Fixed little-endian binary layout, documented in the README.

namespace {

constexpr char kDenseMagic[4] = {'P', 'T', 'N', 'N'};
constexpr char kLrfMagic[4] = {'P', 'T', 'L', 'R'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v)
{
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

void put_f64(std::ostream& out, double v)
{
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(b, 8);
}

void put_name(std::ostream& out, const std::string& name)
{
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
}

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path)
    {
        if (!in_)
            throw ModelFileError("cannot open model file: " + path);
    }

    void read_bytes(char* dst, std::size_t n, const char* what)
    {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw ModelFileError("truncated model file while reading " +
                                 std::string(what) + ": " + path_);
    }

    std::uint32_t read_u32(const char* what)
    {
        unsigned char b[4];
        read_bytes(reinterpret_cast<char*>(b), 4, what);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) |
               (static_cast<std::uint32_t>(b[3]) << 24);
    }

    double read_f64(const char* what)
    {
        unsigned char b[8];
        read_bytes(reinterpret_cast<char*>(b), 8, what);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return std::bit_cast<double>(bits);
    }

    std::string read_name(const char* what)
    {
        const std::uint32_t n = read_u32(what);
        if (n > 64)
            throw ModelFileError("implausible name length in model file: " + path_);
        std::string s(n, '\0');
        read_bytes(s.data(), n, what);
        return s;
    }

private:
    std::ifstream in_;
    std::string path_;
};

void read_magic_and_version(Reader& reader, const char expected[4],
                            const std::string& path)
{
    char magic[4];
    reader.read_bytes(magic, 4, "magic");
    if (std::memcmp(magic, expected, 4) != 0)
        throw ModelFileError("bad magic string in model file: " + path);
    const std::uint32_t version = reader.read_u32("version");
    if (version != kFormatVersion)
        throw ModelFileError("unsupported model file version in " + path);
}

}   // namespace

void save_model(const Network& net, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ModelFileError("cannot write model file: " + path);
    out.write(kDenseMagic, 4);
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(net.layer_sizes().size()));
    for (int s : net.layer_sizes())
        put_u32(out, static_cast<std::uint32_t>(s));
    put_name(out, transfer_name(net.hidden_transfer()));
    put_name(out, transfer_name(net.output_transfer()));
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
        for (double w : net.weights()[l])
            put_f64(out, w);
        for (double b : net.biases()[l])
            put_f64(out, b);
    }
    if (!out)
        throw ModelFileError("write failure on model file: " + path);
}

Network load_model(const std::string& path)
{
    Reader reader(path);
    read_magic_and_version(reader, kDenseMagic, path);

    const std::uint32_t n_layers = reader.read_u32("layer count");
    if (n_layers < 2 || n_layers > 64)
        throw ModelFileError("model file declares an invalid layer count: " + path);
    std::vector<int> sizes(n_layers);
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        const std::uint32_t s = reader.read_u32("layer size");
        if (s < 1 || s > 1u << 24)
            throw ModelFileError("model file declares an invalid size for layer " +
                                 std::to_string(l) + ": " + path);
        sizes[l] = static_cast<int>(s);
    }
    if (sizes.back() != 2)
        throw ModelFileError("model file output layer " + std::to_string(n_layers - 1) +
                             " must have 2 neurons: " + path);

    const Transfer hidden = transfer_from_name(reader.read_name("hidden transfer"));
    const Transfer output = transfer_from_name(reader.read_name("output transfer"));

    Network net(sizes, hidden, output);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::string what = "layer " + std::to_string(l) + " parameters";
        for (double& w : net.weights()[l])
            w = reader.read_f64(what.c_str());
        for (double& b : net.biases()[l])
            b = reader.read_f64(what.c_str());
    }
    return net;
}

void LrfNetwork::validate() const
{
    if (input_width < 1 || input_height < 1 || field_width < 1 || field_height < 1)
        throw ValidationError("lrf: window and field dimensions must be positive");
    if (field_width > input_width || field_height > input_height)
        throw ValidationError("lrf: field does not fit inside the input window");
    if (stride_x < 1 || stride_y < 1)
        throw ValidationError("lrf: strides must be >= 1");
    if (n_fields < 1)
        throw ValidationError("lrf: need at least one receptive field");
    const std::size_t m = static_cast<std::size_t>(field_width) * field_height;
    if (field_weights.size() != static_cast<std::size_t>(n_fields))
        throw ValidationError("lrf: field weight bank size does not match n_fields");
    for (const auto& f : field_weights)
        if (f.size() != m)
            throw ValidationError("lrf: field weight length does not match the field size");
    if (field_biases.size() != static_cast<std::size_t>(n_fields))
        throw ValidationError("lrf: bias count does not match n_fields");
    if (output_weights.size() != static_cast<std::size_t>(positions()))
        throw ValidationError("lrf: output weight rows do not match the position count");
    for (const auto& row : output_weights)
        if (row.size() != static_cast<std::size_t>(n_fields))
            throw ValidationError("lrf: output weight row length does not match n_fields");
}

double lrf_forward(const LrfNetwork& net, const std::vector<double>& window)
{
    net.validate();
    if (window.size() != static_cast<std::size_t>(net.input_width) * net.input_height)
        throw ValidationError("lrf: window size does not match the network geometry");

    double total = 0.0;
    int position = 0;
    for (int py = 0; py < net.positions_y(); ++py) {
        const int y0 = py * net.stride_y;
        for (int px = 0; px < net.positions_x(); ++px, ++position) {
            const int x0 = px * net.stride_x;
            for (int j = 0; j < net.n_fields; ++j) {
                double z = net.field_biases[static_cast<std::size_t>(j)];
                const double* l = net.field_weights[static_cast<std::size_t>(j)].data();
                int k = 0;
                for (int fy = 0; fy < net.field_height; ++fy) {
                    const double* row =
                        &window[static_cast<std::size_t>(y0 + fy) * net.input_width + x0];
                    for (int fx = 0; fx < net.field_width; ++fx, ++k)
                        z += row[fx] * l[k];
                }
                total += net.output_weights[static_cast<std::size_t>(position)]
                                           [static_cast<std::size_t>(j)] *
                         apply_transfer(net.hidden, z);
            }
        }
    }
    return apply_transfer(net.output, total + net.output_bias);
}

double lrf_score(const LrfNetwork& net, const std::vector<double>& window)
{
    const double out = lrf_forward(net, window);
    if (net.output == Transfer::sigmoid)
        return out;
    return 1.0 / (1.0 + std::exp(-out));
}

void save_lrf_model(const LrfNetwork& net, const std::string& path)
{
    net.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ModelFileError("cannot write model file: " + path);
    out.write(kLrfMagic, 4);
    put_u32(out, kFormatVersion);
    for (int v : {net.input_width, net.input_height, net.field_width, net.field_height,
                  net.stride_x, net.stride_y, net.n_fields})
        put_u32(out, static_cast<std::uint32_t>(v));
    put_name(out, transfer_name(net.hidden));
    put_name(out, transfer_name(net.output));
    for (const auto& f : net.field_weights)
        for (double v : f)
            put_f64(out, v);
    for (double v : net.field_biases)
        put_f64(out, v);
    for (const auto& row : net.output_weights)
        for (double v : row)
            put_f64(out, v);
    put_f64(out, net.output_bias);
    if (!out)
        throw ModelFileError("write failure on model file: " + path);
}

LrfNetwork load_lrf_model(const std::string& path)
{
    Reader reader(path);
    read_magic_and_version(reader, kLrfMagic, path);

    LrfNetwork net;
    auto read_dim = [&](const char* what) {
        const std::uint32_t v = reader.read_u32(what);
        if (v < 1 || v > 1u << 20)
            throw ModelFileError(std::string("model file declares an invalid ") + what +
                                 ": " + path);
        return static_cast<int>(v);
    };
    net.input_width = read_dim("input width");
    net.input_height = read_dim("input height");
    net.field_width = read_dim("field width");
    net.field_height = read_dim("field height");
    net.stride_x = read_dim("stride x");
    net.stride_y = read_dim("stride y");
    net.n_fields = read_dim("field count");
    net.hidden = transfer_from_name(reader.read_name("hidden transfer"));
    net.output = transfer_from_name(reader.read_name("output transfer"));
    if (net.field_width > net.input_width || net.field_height > net.input_height)
        throw ModelFileError("model file field exceeds its input window: " + path);

    const std::size_t m = static_cast<std::size_t>(net.field_width) * net.field_height;
    net.field_weights.assign(static_cast<std::size_t>(net.n_fields),
                             std::vector<double>(m));
    for (auto& f : net.field_weights)
        for (double& v : f)
            v = reader.read_f64("field weights");
    net.field_biases.resize(static_cast<std::size_t>(net.n_fields));
    for (double& v : net.field_biases)
        v = reader.read_f64("field biases");
    net.output_weights.assign(static_cast<std::size_t>(net.positions()),
                              std::vector<double>(static_cast<std::size_t>(net.n_fields)));
    for (auto& row : net.output_weights)
        for (double& v : row)
            v = reader.read_f64("output weights");
    net.output_bias = reader.read_f64("output bias");
    net.validate();
    return net;
}

AnyModel load_any_model(const std::string& path)
{
    std::ifstream probe(path, std::ios::binary);
    if (!probe)
        throw ModelFileError("cannot open model file: " + path);
    char magic[4] = {};
    probe.read(magic, 4);
    if (probe.gcount() == 4 && std::memcmp(magic, kLrfMagic, 4) == 0)
        return load_lrf_model(path);
    return load_model(path);
}

}   // namespace pedtrack
