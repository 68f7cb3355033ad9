#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lidann/error.hpp"

namespace lidann {

/// Layer widths from input to output; hidden layers are ReLU, the output
/// head is identity. Output width is 1 for every regressor here.
struct MlpSpec {
    std::vector<std::size_t> layer_sizes;

    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t output_size() const { return layer_sizes.back(); }
    std::size_t layer_count() const { return layer_sizes.size() - 1; }
    void validate() const;

    friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct MlpWeights {
    MlpSpec spec;
    std::vector<std::vector<double>> w;  // per layer, out x in row-major
    std::vector<std::vector<double>> b;  // per layer, out
};

/// Flat regression dataset: `count` rows of `dim` doubles plus one target each.
struct MlpDataset {
    std::size_t dim = 0;
    std::vector<double> inputs;
    std::vector<double> targets;

    std::size_t count() const { return targets.size(); }
    std::span<const double> row(std::size_t i) const { return {inputs.data() + i * dim, dim}; }
    void append(std::span<const double> x, double y) {
        inputs.insert(inputs.end(), x.begin(), x.end());
        targets.push_back(y);
    }
};

struct TrainConfig {
    // 0 lets the pipeline stage pick its protocol default (200 for the
    // vector-input stages, 20 for the second stage). mlp_train itself
    // requires an explicit positive value.
    std::size_t epochs = 0;
    // 0 picks the row-count-dependent batch rule (between 200 and 1000).
    std::size_t batch_size = 0;
    double learning_rate = 1e-3;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    // Called once per epoch with the epoch's mean squared error.
    std::function<void(std::size_t, double)> on_epoch;
};

/// Seeded uniform initialization in +-sqrt(6 / (fan_in + fan_out)), zero biases.
MlpWeights mlp_init(const MlpSpec& spec, std::uint64_t seed);

double mlp_forward(const MlpWeights& weights, std::span<const double> input);

/// Mini-batch gradient descent on mean squared error with momentum, seeded
/// shuffling each epoch. Fully deterministic for a given (data, config).
/// Throws TrainingError naming the epoch if the loss turns non-finite.
MlpWeights mlp_train(const MlpSpec& spec, const MlpDataset& data, const TrainConfig& config);

/// Worst relative disagreement between analytic gradients and central finite
/// differences of the batch MSE over `sample`, across every parameter.
/// Callers should screen samples whose pre-activations sit near the ReLU kink.
double mlp_gradient_check(const MlpWeights& weights, const MlpDataset& sample, double epsilon);

void mlp_save(const MlpWeights& weights, const std::string& path);
MlpWeights mlp_load(const std::string& path);

/// Per-feature affine map to zero mean / unit variance, fitted on training
/// rows and stored alongside the model so inference matches training.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> inv_std;  // 0 for constant features

    static Standardizer fit(const MlpDataset& data);
    void apply(std::span<double> row) const;
    std::vector<double> applied(std::span<const float> row) const;
};

}  // namespace lidann
