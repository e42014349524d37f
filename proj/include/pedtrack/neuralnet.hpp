#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "pedtrack/core.hpp"
#include "pedtrack/phog.hpp"

namespace pedtrack {

// Raised on unreadable or inconsistent model files. Maps to CLI exit code 2.
class ModelFileError : public std::runtime_error {
public:
    explicit ModelFileError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Transfer { sigmoid, identity, tanh_fn };

double apply_transfer(Transfer t, double x);
double transfer_derivative(Transfer t, double activated);
const char* transfer_name(Transfer t);
Transfer transfer_from_name(const std::string& name);

// Dense feed-forward classifier. Weights are row-major (output, input) per
// layer; the output layer has exactly two neurons (pedestrian, background).
class Network {
public:
    Network(std::vector<int> layer_sizes, Transfer hidden = Transfer::sigmoid,
            Transfer output = Transfer::identity);

    static Network seeded(std::vector<int> layer_sizes, std::uint64_t seed,
                          Transfer hidden = Transfer::sigmoid,
                          Transfer output = Transfer::identity);

    const std::vector<int>& layer_sizes() const { return layer_sizes_; }
    Transfer hidden_transfer() const { return hidden_; }
    Transfer output_transfer() const { return output_; }

    std::vector<std::vector<double>>& weights() { return weights_; }
    const std::vector<std::vector<double>>& weights() const { return weights_; }
    std::vector<std::vector<double>>& biases() { return biases_; }
    const std::vector<std::vector<double>>& biases() const { return biases_; }

private:
    std::vector<int> layer_sizes_;
    Transfer hidden_;
    Transfer output_;
    std::vector<std::vector<double>> weights_;  // [layer][out * in_size + in]
    std::vector<std::vector<double>> biases_;   // [layer][out]
};

struct ForwardResult {
    std::vector<std::vector<double>> activations;  // per layer, input first

    const std::vector<double>& outputs() const { return activations.back(); }
};

ForwardResult forward(const Network& net, const std::vector<double>& input);

std::vector<double> softmax(const std::vector<double>& logits);

struct LabeledSample {
    std::vector<double> features;
    int label = 0;   // 0 = pedestrian, 1 = background
};

// Flat gradient layout: for each layer, weights row-major then biases.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

// Analytic gradient of the softmax cross-entropy loss for one sample.
Gradients gradient(const Network& net, const LabeledSample& sample);

// Summed gradients and total loss over a batch, accumulated in sample order.
struct BatchGradient {
    Gradients grads;
    double loss = 0.0;
};
BatchGradient batch_gradient(const Network& net,
                             const std::vector<LabeledSample>& samples);

double sample_loss(const Network& net, const LabeledSample& sample);

// Defaults follow the published recipe (50 epochs, learning rate 1.0).
// Mean-reduced full-batch descent at that rate stalls on every suite we
// train, so mini-batches are the default; 0 selects full batch.
struct TrainConfig {
    int epochs = 50;
    double learning_rate = 1.0;
    std::uint64_t seed = 1;
    int batch_size = 16;

    void validate() const;
};

struct TrainStats {
    std::vector<double> epoch_losses;   // mean loss after each epoch's update
    double final_accuracy = 0.0;
    bool diverged = false;
};

// Gradient-descent training, mean-reduced cross-entropy loss. Deterministic
// for a fixed seed and sample order.
TrainStats train(Network& net, const std::vector<LabeledSample>& samples,
                 const TrainConfig& cfg);

enum class ClassLabel { pedestrian, background };

struct Classification {
    ClassLabel label = ClassLabel::background;
    double score = 0.0;   // softmax probability of the pedestrian class
};

Classification classify(const Network& net, const std::vector<double>& descriptor);
inline Classification classify(const Network& net, const PhogDescriptor& descriptor)
{
    return classify(net, descriptor.values);
}

void save_model(const Network& net, const std::string& path);
Network load_model(const std::string& path);

// Shared-weight local-receptive-field network: one bank of small fields
// applied at every stride position of a grayscale window, combined by a
// single output neuron.
struct LrfNetwork {
    int input_width = 0;
    int input_height = 0;
    int field_width = 0;    // S_x
    int field_height = 0;   // S_y
    int stride_x = 1;       // D_x
    int stride_y = 1;       // D_y
    int n_fields = 0;       // N_lrf
    std::vector<std::vector<double>> field_weights;  // [field][S_x * S_y]
    std::vector<std::vector<double>> output_weights; // [position][field]
    std::vector<double> field_biases;                // theta_j
    double output_bias = 0.0;                        // phi
    Transfer hidden = Transfer::sigmoid;
    Transfer output = Transfer::sigmoid;

    int positions_x() const { return (input_width - field_width) / stride_x + 1; }
    int positions_y() const { return (input_height - field_height) / stride_y + 1; }
    int positions() const { return positions_x() * positions_y(); }

    void validate() const;
};

// Evaluates the shared-weight network on a window whose values are laid out
// row-major. Positions index row-major over the stride grid.
double lrf_forward(const LrfNetwork& net, const std::vector<double>& window);

// Pedestrian probability from the scalar net output: h = sigmoid yields it
// directly, otherwise the logit is squashed.
double lrf_score(const LrfNetwork& net, const std::vector<double>& window);

void save_lrf_model(const LrfNetwork& net, const std::string& path);
LrfNetwork load_lrf_model(const std::string& path);

using AnyModel = std::variant<Network, LrfNetwork>;

// Dispatches on the file's magic string.
AnyModel load_any_model(const std::string& path);

}   // namespace pedtrack
