#include "lidann/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

namespace lidann {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Forward pass storing per-layer activations (needed for backprop).
// activations[0] is the input; activations[l+1] the output of layer l.
void forward_all(const MlpWeights& net, std::span<const double> input,
                 std::vector<std::vector<double>>& activations) {
    const std::size_t layers = net.spec.layer_count();
    activations.resize(layers + 1);
    activations[0].assign(input.begin(), input.end());
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = net.spec.layer_sizes[l];
        const std::size_t out = net.spec.layer_sizes[l + 1];
        auto& a = activations[l + 1];
        a.assign(out, 0.0);
        const double* prev = activations[l].data();
        const double* w = net.w[l].data();
        const bool hidden = l < layers - 1;
        for (std::size_t o = 0; o < out; ++o) {
            const double* row = w + o * in;
            double z = net.b[l][o];
            for (std::size_t j = 0; j < in; ++j) z += row[j] * prev[j];
            a[o] = (hidden && z < 0.0) ? 0.0 : z;  // ReLU on hidden layers
        }
    }
}

struct Gradients {
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> b;

    explicit Gradients(const MlpSpec& spec) {
        const std::size_t layers = spec.layer_count();
        w.resize(layers);
        b.resize(layers);
        for (std::size_t l = 0; l < layers; ++l) {
            w[l].assign(spec.layer_sizes[l] * spec.layer_sizes[l + 1], 0.0);
            b[l].assign(spec.layer_sizes[l + 1], 0.0);
        }
    }

    void zero() {
        for (auto& v : w) std::fill(v.begin(), v.end(), 0.0);
        for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
    }
};

// Accumulates the gradient of (pred - y)^2 / batch into grads; returns the
// sample's squared error.
double backprop_one(const MlpWeights& net, std::span<const double> input, double target,
                    double inv_batch, std::vector<std::vector<double>>& activations,
                    Gradients& grads) {
    forward_all(net, input, activations);
    const std::size_t layers = net.spec.layer_count();
    const double pred = activations[layers][0];
    const double err = pred - target;

    std::vector<double> delta{2.0 * err * inv_batch};
    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t in = net.spec.layer_sizes[l];
        const std::size_t out = net.spec.layer_sizes[l + 1];
        const double* prev = activations[l].data();
        std::vector<double> next_delta(in, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            const double d = delta[o];
            if (d == 0.0) continue;
            grads.b[l][o] += d;
            double* gw = grads.w[l].data() + o * in;
            const double* w = net.w[l].data() + o * in;
            for (std::size_t j = 0; j < in; ++j) {
                gw[j] += d * prev[j];
                next_delta[j] += d * w[j];
            }
        }
        if (l > 0) {
            // ReLU gate: units that were clamped pass no gradient.
            const double* act = activations[l].data();
            for (std::size_t j = 0; j < in; ++j)
                if (act[j] <= 0.0) next_delta[j] = 0.0;
        }
        delta = std::move(next_delta);
    }
    return err * err;
}

double batch_mse(const MlpWeights& net, const MlpDataset& data) {
    std::vector<std::vector<double>> activations;
    double total = 0.0;
    for (std::size_t i = 0; i < data.count(); ++i) {
        forward_all(net, data.row(i), activations);
        const double err = activations.back()[0] - data.targets[i];
        total += err * err;
    }
    return total / static_cast<double>(data.count());
}

constexpr char kMlpMagic[8] = {'L', 'A', 'N', 'N', 'M', 'L', 'P', '1'};

}  // namespace

void MlpSpec::validate() const {
    if (layer_sizes.size() < 2) throw UsageError("MlpSpec: need at least input and output sizes");
    for (std::size_t s : layer_sizes)
        if (s == 0) throw UsageError("MlpSpec: zero-width layer");
    if (layer_sizes.back() != 1) throw UsageError("MlpSpec: output width must be 1");
}

MlpWeights mlp_init(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    MlpWeights net;
    net.spec = spec;
    std::mt19937_64 rng(seed);
    const std::size_t layers = spec.layer_count();
    net.w.resize(layers);
    net.b.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = spec.layer_sizes[l];
        const std::size_t out = spec.layer_sizes[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        net.w[l].resize(in * out);
        for (auto& v : net.w[l]) v = (2.0 * uniform01(rng) - 1.0) * bound;
        net.b[l].assign(out, 0.0);
    }
    return net;
}

double mlp_forward(const MlpWeights& net, std::span<const double> input) {
    if (input.size() != net.spec.input_size())
        throw UsageError("mlp_forward: input size mismatch");
    const std::size_t layers = net.spec.layer_count();
    // Two ping-pong buffers; both sized for the widest layer.
    std::size_t widest = 0;
    for (std::size_t s : net.spec.layer_sizes) widest = std::max(widest, s);
    std::vector<double> buf_a(widest);
    std::vector<double> buf_b(widest);
    std::copy(input.begin(), input.end(), buf_a.begin());
    const double* cur = buf_a.data();
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = net.spec.layer_sizes[l];
        const std::size_t out = net.spec.layer_sizes[l + 1];
        const bool hidden = l < layers - 1;
        double* dst = (cur == buf_a.data()) ? buf_b.data() : buf_a.data();
        const double* w = net.w[l].data();
        for (std::size_t o = 0; o < out; ++o) {
            const double* row = w + o * in;
            double z = net.b[l][o];
            for (std::size_t j = 0; j < in; ++j) z += row[j] * cur[j];
            dst[o] = (hidden && z < 0.0) ? 0.0 : z;
        }
        cur = dst;
    }
    return cur[0];
}

MlpWeights mlp_train(const MlpSpec& spec, const MlpDataset& data, const TrainConfig& config) {
    spec.validate();
    if (data.count() == 0) throw UsageError("mlp_train: empty dataset");
    if (data.dim != spec.input_size()) throw UsageError("mlp_train: input size mismatch");
    if (config.batch_size == 0 || config.batch_size > data.count())
        throw UsageError("mlp_train: batch size out of range");
    if (config.epochs == 0) throw UsageError("mlp_train: epochs must be positive");
    for (double t : data.targets)
        if (!std::isfinite(t)) throw UsageError("mlp_train: non-finite target");

    MlpWeights net = mlp_init(spec, config.seed);
    Gradients grads(spec);
    Gradients velocity(spec);
    std::vector<std::vector<double>> activations;

    std::vector<std::uint32_t> order(data.count());
    std::iota(order.begin(), order.end(), 0u);
    std::mt19937_64 rng(config.seed + 0x9e3779b97f4a7c15ull);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        // Hand-rolled Fisher-Yates: identical order on every platform.
        for (std::size_t i = data.count(); i > 1; --i) {
            const std::size_t j = rng() % i;
            std::swap(order[i - 1], order[j]);
        }

        double epoch_sse = 0.0;
        for (std::size_t start = 0; start < data.count(); start += config.batch_size) {
            const std::size_t end = std::min(data.count(), start + config.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            grads.zero();
            for (std::size_t i = start; i < end; ++i)
                epoch_sse += backprop_one(net, data.row(order[i]), data.targets[order[i]],
                                          inv_batch, activations, grads);
            for (std::size_t l = 0; l < spec.layer_count(); ++l) {
                for (std::size_t j = 0; j < net.w[l].size(); ++j) {
                    velocity.w[l][j] =
                        config.momentum * velocity.w[l][j] - config.learning_rate * grads.w[l][j];
                    net.w[l][j] += velocity.w[l][j];
                }
                for (std::size_t j = 0; j < net.b[l].size(); ++j) {
                    velocity.b[l][j] =
                        config.momentum * velocity.b[l][j] - config.learning_rate * grads.b[l][j];
                    net.b[l][j] += velocity.b[l][j];
                }
            }
        }
        const double epoch_mse = epoch_sse / static_cast<double>(data.count());
        if (!std::isfinite(epoch_mse))
            throw TrainingError("mlp_train: loss diverged at epoch " + std::to_string(epoch));
        if (config.on_epoch) config.on_epoch(epoch, epoch_mse);
    }
    return net;
}

double mlp_gradient_check(const MlpWeights& weights, const MlpDataset& sample, double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1e-3)
        throw UsageError("mlp_gradient_check: epsilon must be in (0, 1e-3]");
    if (sample.count() == 0) throw UsageError("mlp_gradient_check: empty sample");

    // Analytic gradient of the mean squared error over the sample.
    Gradients analytic(weights.spec);
    std::vector<std::vector<double>> activations;
    const double inv = 1.0 / static_cast<double>(sample.count());
    for (std::size_t i = 0; i < sample.count(); ++i)
        backprop_one(weights, sample.row(i), sample.targets[i], inv, activations, analytic);

    MlpWeights probe = weights;
    double worst = 0.0;
    auto check = [&](double& param, double grad) {
        const double save = param;
        param = save + epsilon;
        const double above = batch_mse(probe, sample);
        param = save - epsilon;
        const double below = batch_mse(probe, sample);
        param = save;
        const double numeric = (above - below) / (2.0 * epsilon);
        const double scale = std::max({std::fabs(grad), std::fabs(numeric), 1e-8});
        worst = std::max(worst, std::fabs(grad - numeric) / scale);
    };
    for (std::size_t l = 0; l < weights.spec.layer_count(); ++l) {
        for (std::size_t j = 0; j < probe.w[l].size(); ++j) check(probe.w[l][j], analytic.w[l][j]);
        for (std::size_t j = 0; j < probe.b[l].size(); ++j) check(probe.b[l][j], analytic.b[l][j]);
    }
    return worst;
}

void mlp_save(const MlpWeights& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out.write(kMlpMagic, sizeof(kMlpMagic));
    const std::uint32_t n = static_cast<std::uint32_t>(net.spec.layer_sizes.size());
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    for (std::size_t s : net.spec.layer_sizes) {
        const std::uint64_t v = s;
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    for (std::size_t l = 0; l < net.spec.layer_count(); ++l) {
        out.write(reinterpret_cast<const char*>(net.w[l].data()),
                  static_cast<std::streamsize>(net.w[l].size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(net.b[l].data()),
                  static_cast<std::streamsize>(net.b[l].size() * sizeof(double)));
    }
    if (!out) throw FormatError("write failure on '" + path + "'");
}

MlpWeights mlp_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "' for reading");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMlpMagic, sizeof(magic)) != 0)
        throw FormatError(path + ": not a weight file");
    std::uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (!in || n < 2 || n > 64) throw FormatError(path + ": corrupt layer count");
    MlpWeights net;
    net.spec.layer_sizes.resize(n);
    for (auto& s : net.spec.layer_sizes) {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        if (!in || v == 0) throw FormatError(path + ": corrupt layer size");
        s = static_cast<std::size_t>(v);
    }
    net.spec.validate();
    net.w.resize(net.spec.layer_count());
    net.b.resize(net.spec.layer_count());
    for (std::size_t l = 0; l < net.spec.layer_count(); ++l) {
        net.w[l].resize(net.spec.layer_sizes[l] * net.spec.layer_sizes[l + 1]);
        net.b[l].resize(net.spec.layer_sizes[l + 1]);
        in.read(reinterpret_cast<char*>(net.w[l].data()),
                static_cast<std::streamsize>(net.w[l].size() * sizeof(double)));
        in.read(reinterpret_cast<char*>(net.b[l].data()),
                static_cast<std::streamsize>(net.b[l].size() * sizeof(double)));
        if (!in) throw FormatError(path + ": truncated weights");
    }
    // Must be at end of file.
    char extra;
    in.read(&extra, 1);
    if (!in.eof()) throw FormatError(path + ": trailing bytes");
    return net;
}

Standardizer Standardizer::fit(const MlpDataset& data) {
    Standardizer s;
    s.mean.assign(data.dim, 0.0);
    s.inv_std.assign(data.dim, 0.0);
    if (data.count() == 0) return s;
    const double inv_n = 1.0 / static_cast<double>(data.count());
    for (std::size_t i = 0; i < data.count(); ++i) {
        const auto row = data.row(i);
        for (std::size_t j = 0; j < data.dim; ++j) s.mean[j] += row[j];
    }
    for (auto& m : s.mean) m *= inv_n;
    std::vector<double> var(data.dim, 0.0);
    for (std::size_t i = 0; i < data.count(); ++i) {
        const auto row = data.row(i);
        for (std::size_t j = 0; j < data.dim; ++j) {
            const double d = row[j] - s.mean[j];
            var[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < data.dim; ++j) {
        const double v = var[j] * inv_n;
        s.inv_std[j] = v > 0.0 ? 1.0 / std::sqrt(v) : 0.0;
    }
    return s;
}

void Standardizer::apply(std::span<double> row) const {
    for (std::size_t j = 0; j < row.size(); ++j)
        row[j] = (row[j] - mean[j]) * inv_std[j];
}

std::vector<double> Standardizer::applied(std::span<const float> row) const {
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j)
        out[j] = (static_cast<double>(row[j]) - mean[j]) * inv_std[j];
    return out;
}

}  // namespace lidann
