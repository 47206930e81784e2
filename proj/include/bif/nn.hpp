#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bif/dataset.hpp"
#include "bif/rng.hpp"

namespace bif {

enum class Activation { identity, relu, selu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> w;  // out x in, row-major
    std::vector<double> b;  // out
    Activation act = Activation::identity;
};

struct DenseNet {
    std::vector<Layer> layers;

    std::size_t input_dim() const { return layers.front().in; }
    std::size_t output_dim() const { return layers.back().out; }
    std::size_t param_count() const;
    void check_shapes() const;  // throws ShapeError on a broken chain
};

// One real per parameter, shape-congruent with its DenseNet.
struct GradientSet {
    struct LayerGrad {
        std::vector<double> dw;
        std::vector<double> db;
    };
    std::vector<LayerGrad> layers;

    static GradientSet zeros_like(const DenseNet& net);
    void scale(double s);
    void axpy(double a, const GradientSet& g);  // this += a * g
    double l2_norm() const;
};

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    int epochs = 1;
    int batch_size = 64;
    double learning_rate = 1e-3;
    bool use_adam = true;
    AdamParams adam;
    std::uint64_t seed = 0;

    void validate() const;
};

struct AdamState {
    GradientSet m;
    GradientSet v;
    std::int64_t t = 0;

    static AdamState init(const DenseNet& net);
};

// Hidden layer sizes + activation; the output layer is always linear.
struct Arch {
    std::vector<std::size_t> hidden{200, 200};
    Activation act = Activation::relu;
};

// Layer-by-layer values kept from a forward pass, for the backward pass.
// inputs[l] is the input to layer l; pre[l] the pre-activation output.
struct ForwardCache {
    std::size_t batch = 0;
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> pre;
    std::vector<double> logits;  // batch x C
};

DenseNet make_net(std::size_t input_dim, const Arch& arch, std::size_t num_classes,
                  Rng& rng);

std::vector<double> forward(const DenseNet& net, std::span<const double> x);

// X is batch x input_dim, row-major.
ForwardCache forward_batch(const DenseNet& net, std::span<const double> X,
                           std::size_t batch);

std::vector<double> softmax(std::span<const double> logits);
double cross_entropy(std::span<const double> logits, int label);

// d(mean CE)/d(logits) for one row, i.e. (softmax - onehot) / batch.
void cross_entropy_grad(std::span<const double> logits, int label, double scale,
                        std::span<double> out);

// Backpropagates dL/dlogits through the cached forward pass. Accumulates
// parameter gradients into `grads`; when `dx` is non-null it receives
// dL/dinput (batch x input_dim).
void backprop(const DenseNet& net, const ForwardCache& cache,
              std::span<const double> dlogits, GradientSet& grads,
              std::vector<double>* dx = nullptr);

// Mean cross-entropy loss and mean gradients over a batch.
struct BatchResult {
    double loss = 0.0;
    GradientSet grads;
};
BatchResult backward(const DenseNet& net, std::span<const double> X,
                     std::span<const int> Y, std::size_t batch);

void sgd_step(DenseNet& net, const GradientSet& grads, double lr);
void adam_step(DenseNet& net, const GradientSet& grads, double lr,
               const AdamParams& p, AdamState& state);

// Trained classifier with weights that no caller may touch again.
class FrozenModel {
public:
    explicit FrozenModel(DenseNet net) : net_(std::move(net)) {}
    const DenseNet& net() const { return net_; }
    std::size_t input_dim() const { return net_.input_dim(); }
    std::size_t output_dim() const { return net_.output_dim(); }

private:
    DenseNet net_;
};

FrozenModel train_classifier(const Dataset& train, const Arch& arch,
                             const TrainConfig& cfg);

double accuracy(const FrozenModel& model, const Dataset& data);

}  // namespace bif
