#include "bif/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bif {

namespace {

constexpr double kSeluLambda = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

double activate(double z, Activation a) {
    switch (a) {
        case Activation::identity:
            return z;
        case Activation::relu:
            return z > 0.0 ? z : 0.0;
        case Activation::selu:
            return z > 0.0 ? kSeluLambda * z
                           : kSeluLambda * kSeluAlpha * (std::exp(z) - 1.0);
    }
    return z;
}

double activate_grad(double z, Activation a) {
    switch (a) {
        case Activation::identity:
            return 1.0;
        case Activation::relu:
            return z > 0.0 ? 1.0 : 0.0;
        case Activation::selu:
            return z > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(z);
    }
    return 1.0;
}

// out[b,o] += sum_i X[b,i] * W[o,i]
void gemm_xwt(std::span<const double> X, const Layer& L, std::size_t batch,
              std::vector<double>& out) {
    out.assign(batch * L.out, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
        const double* x = X.data() + b * L.in;
        double* o = out.data() + b * L.out;
        for (std::size_t r = 0; r < L.out; ++r) {
            const double* w = L.w.data() + r * L.in;
            double acc = L.b[r];
            for (std::size_t i = 0; i < L.in; ++i) acc += w[i] * x[i];
            o[r] = acc;
        }
    }
}

}  // namespace

std::string to_string(Activation a) {
    switch (a) {
        case Activation::identity:
            return "identity";
        case Activation::relu:
            return "relu";
        case Activation::selu:
            return "selu";
    }
    return "identity";
}

Activation activation_from_string(const std::string& s) {
    if (s == "identity") return Activation::identity;
    if (s == "relu") return Activation::relu;
    if (s == "selu") return Activation::selu;
    throw ConfigError("unknown activation: " + s);
}

std::size_t DenseNet::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

void DenseNet::check_shapes() const {
    if (layers.empty()) throw ShapeError("empty network");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.w.size() != l.in * l.out || l.b.size() != l.out)
            throw ShapeError("layer parameter size mismatch");
        if (i + 1 < layers.size() && l.out != layers[i + 1].in)
            throw ShapeError("layer dimension chain broken");
    }
    if (layers.back().act != Activation::identity)
        throw ShapeError("final layer must emit logits (identity activation)");
}

GradientSet GradientSet::zeros_like(const DenseNet& net) {
    GradientSet g;
    g.layers.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        g.layers[i].dw.assign(net.layers[i].w.size(), 0.0);
        g.layers[i].db.assign(net.layers[i].b.size(), 0.0);
    }
    return g;
}

void GradientSet::scale(double s) {
    for (auto& l : layers) {
        for (double& v : l.dw) v *= s;
        for (double& v : l.db) v *= s;
    }
}

void GradientSet::axpy(double a, const GradientSet& g) {
    if (layers.size() != g.layers.size()) throw ShapeError("gradient set mismatch");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        for (std::size_t j = 0; j < layers[i].dw.size(); ++j)
            layers[i].dw[j] += a * g.layers[i].dw[j];
        for (std::size_t j = 0; j < layers[i].db.size(); ++j)
            layers[i].db[j] += a * g.layers[i].db[j];
    }
}

double GradientSet::l2_norm() const {
    double s = 0.0;
    for (const auto& l : layers) {
        for (double v : l.dw) s += v * v;
        for (double v : l.db) s += v * v;
    }
    return std::sqrt(s);
}

void TrainConfig::validate() const {
    if (epochs < 1) throw InputError("epochs must be >= 1");
    if (batch_size < 1) throw InputError("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw InputError("learning_rate must be > 0");
}

AdamState AdamState::init(const DenseNet& net) {
    AdamState s;
    s.m = GradientSet::zeros_like(net);
    s.v = GradientSet::zeros_like(net);
    s.t = 0;
    return s;
}

DenseNet make_net(std::size_t input_dim, const Arch& arch, std::size_t num_classes,
                  Rng& rng) {
    DenseNet net;
    std::size_t in = input_dim;
    for (std::size_t h : arch.hidden) {
        Layer l;
        l.in = in;
        l.out = h;
        l.act = arch.act;
        const double bound = std::sqrt(1.0 / static_cast<double>(in));
        l.w.resize(in * h);
        l.b.resize(h);
        for (double& v : l.w) v = rng.uniform(-bound, bound);
        for (double& v : l.b) v = rng.uniform(-bound, bound);
        net.layers.push_back(std::move(l));
        in = h;
    }
    Layer out;
    out.in = in;
    out.out = num_classes;
    out.act = Activation::identity;
    const double bound = std::sqrt(1.0 / static_cast<double>(in));
    out.w.resize(in * num_classes);
    out.b.resize(num_classes);
    for (double& v : out.w) v = rng.uniform(-bound, bound);
    for (double& v : out.b) v = rng.uniform(-bound, bound);
    net.layers.push_back(std::move(out));
    net.check_shapes();
    return net;
}

ForwardCache forward_batch(const DenseNet& net, std::span<const double> X,
                           std::size_t batch) {
    if (X.size() != batch * net.input_dim())
        throw ShapeError("forward: input size does not match batch x input_dim");
    ForwardCache c;
    c.batch = batch;
    c.inputs.resize(net.layers.size());
    c.pre.resize(net.layers.size());
    std::vector<double> cur(X.begin(), X.end());
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const Layer& L = net.layers[li];
        c.inputs[li] = cur;
        gemm_xwt(cur, L, batch, c.pre[li]);
        cur.resize(batch * L.out);
        for (std::size_t j = 0; j < cur.size(); ++j)
            cur[j] = activate(c.pre[li][j], L.act);
    }
    c.logits = std::move(cur);
    return c;
}

std::vector<double> forward(const DenseNet& net, std::span<const double> x) {
    return forward_batch(net, x, 1).logits;
}

std::vector<double> softmax(std::span<const double> logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

double cross_entropy(std::span<const double> logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
        throw DomainError("cross_entropy: label out of range");
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double v : logits) z += std::exp(v - mx);
    return std::log(z) - (logits[label] - mx);
}

void cross_entropy_grad(std::span<const double> logits, int label, double scale,
                        std::span<double> out) {
    const auto p = softmax(logits);
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * scale;
    out[label] -= scale;
}

void backprop(const DenseNet& net, const ForwardCache& cache,
              std::span<const double> dlogits, GradientSet& grads,
              std::vector<double>* dx) {
    const std::size_t batch = cache.batch;
    std::vector<double> delta(dlogits.begin(), dlogits.end());
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const Layer& L = net.layers[li];
        // delta currently holds dL/d(activation output of layer li)
        for (std::size_t j = 0; j < delta.size(); ++j)
            delta[j] *= activate_grad(cache.pre[li][j], L.act);
        auto& g = grads.layers[li];
        const std::vector<double>& in = cache.inputs[li];
        for (std::size_t b = 0; b < batch; ++b) {
            const double* d = delta.data() + b * L.out;
            const double* x = in.data() + b * L.in;
            for (std::size_t r = 0; r < L.out; ++r) {
                double* gw = g.dw.data() + r * L.in;
                const double dr = d[r];
                for (std::size_t i = 0; i < L.in; ++i) gw[i] += dr * x[i];
                g.db[r] += dr;
            }
        }
        const bool need_input = li > 0 || dx != nullptr;
        if (!need_input) break;
        std::vector<double> prev(batch * L.in, 0.0);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* d = delta.data() + b * L.out;
            double* p = prev.data() + b * L.in;
            for (std::size_t r = 0; r < L.out; ++r) {
                const double* w = L.w.data() + r * L.in;
                const double dr = d[r];
                for (std::size_t i = 0; i < L.in; ++i) p[i] += dr * w[i];
            }
        }
        delta = std::move(prev);
    }
    if (dx != nullptr) *dx = std::move(delta);
}

BatchResult backward(const DenseNet& net, std::span<const double> X,
                     std::span<const int> Y, std::size_t batch) {
    if (batch == 0) throw InputError("backward: empty batch");
    auto cache = forward_batch(net, X, batch);
    const std::size_t C = net.output_dim();
    BatchResult res;
    res.grads = GradientSet::zeros_like(net);
    std::vector<double> dlogits(batch * C);
    const double scale = 1.0 / static_cast<double>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        std::span<const double> lg(cache.logits.data() + b * C, C);
        res.loss += cross_entropy(lg, Y[b]) * scale;
        cross_entropy_grad(lg, Y[b], scale, {dlogits.data() + b * C, C});
    }
    backprop(net, cache, dlogits, res.grads);
    return res;
}

void sgd_step(DenseNet& net, const GradientSet& grads, double lr) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        auto& l = net.layers[i];
        const auto& g = grads.layers[i];
        for (std::size_t j = 0; j < l.w.size(); ++j) l.w[j] -= lr * g.dw[j];
        for (std::size_t j = 0; j < l.b.size(); ++j) l.b[j] -= lr * g.db[j];
    }
}

void adam_step(DenseNet& net, const GradientSet& grads, double lr,
               const AdamParams& p, AdamState& state) {
    ++state.t;
    const double bc1 = 1.0 - std::pow(p.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(p.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        auto& l = net.layers[i];
        const auto& g = grads.layers[i];
        auto& m = state.m.layers[i];
        auto& v = state.v.layers[i];
        auto upd = [&](double& w, double grad, double& mm, double& vv) {
            mm = p.beta1 * mm + (1.0 - p.beta1) * grad;
            vv = p.beta2 * vv + (1.0 - p.beta2) * grad * grad;
            w -= lr * (mm / bc1) / (std::sqrt(vv / bc2) + p.eps);
        };
        for (std::size_t j = 0; j < l.w.size(); ++j)
            upd(l.w[j], g.dw[j], m.dw[j], v.dw[j]);
        for (std::size_t j = 0; j < l.b.size(); ++j)
            upd(l.b[j], g.db[j], m.db[j], v.db[j]);
    }
}

FrozenModel train_classifier(const Dataset& train, const Arch& arch,
                             const TrainConfig& cfg) {
    cfg.validate();
    if (train.size() == 0) throw InputError("train_classifier: empty dataset");
    const int C = train.num_classes();
    for (int y : train.labels)
        if (y < 0) throw InputError("train_classifier: negative label");
    Rng rng(cfg.seed);
    DenseNet net = make_net(train.dim, arch, std::max(C, 2), rng);
    AdamState state = AdamState::init(net);

    const std::size_t n = train.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> bx;
    std::vector<int> by;
    for (int e = 0; e < cfg.epochs; ++e) {
        // seeded Fisher-Yates per epoch
        for (std::size_t i = n; i-- > 1;)
            std::swap(order[i], order[rng.below(i + 1)]);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t bsz = std::min<std::size_t>(cfg.batch_size, n - start);
            bx.resize(bsz * train.dim);
            by.resize(bsz);
            for (std::size_t b = 0; b < bsz; ++b) {
                const auto r = train.row(order[start + b]);
                std::copy(r.begin(), r.end(), bx.begin() + b * train.dim);
                by[b] = train.labels[order[start + b]];
            }
            auto res = backward(net, bx, by, bsz);
            if (cfg.use_adam)
                adam_step(net, res.grads, cfg.learning_rate, cfg.adam, state);
            else
                sgd_step(net, res.grads, cfg.learning_rate);
        }
    }
    return FrozenModel(std::move(net));
}

double accuracy(const FrozenModel& model, const Dataset& data) {
    if (data.size() == 0) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto lg = forward(model.net(), data.row(i));
        const auto it = std::max_element(lg.begin(), lg.end());
        if (static_cast<int>(it - lg.begin()) == data.labels[i]) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(data.size());
}

}  // namespace bif
