#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bif/checkpoint.hpp"
#include "bif/nn.hpp"
#include "support/helpers.hpp"

using namespace bif;

namespace {

DenseNet single_layer(std::size_t in, std::size_t out, Activation act,
                      double wval, double bval) {
    DenseNet net;
    Layer l;
    l.in = in;
    l.out = out;
    l.act = act;
    l.w.assign(in * out, wval);
    l.b.assign(out, bval);
    net.layers.push_back(l);
    return net;
}

}  // namespace

TEST_CASE("forward: zero net gives zero logits") {
    auto net = single_layer(3, 2, Activation::identity, 0.0, 0.0);
    const auto lg = forward(net, std::vector<double>{1.5, -2.0, 0.3});
    CHECK(lg.size() == 2);
    CHECK(lg[0] == 0.0);
    CHECK(lg[1] == 0.0);
}

TEST_CASE("forward: identity layer passes input through") {
    DenseNet net;
    Layer l;
    l.in = 2;
    l.out = 2;
    l.act = Activation::identity;
    l.w = {1.0, 0.0, 0.0, 1.0};
    l.b = {0.0, 0.0};
    net.layers.push_back(l);
    const auto lg = forward(net, std::vector<double>{1.0, 2.0});
    CHECK(lg[0] == doctest::Approx(1.0));
    CHECK(lg[1] == doctest::Approx(2.0));
}

TEST_CASE("forward: matches hand-unrolled matrix arithmetic") {
    Rng rng(42);
    const auto net = make_net(3, Arch{{4}, Activation::relu}, 2, rng);
    const std::vector<double> x{0.5, -1.2, 2.0};

    // independent oracle: explicit loops over the same stored weights
    std::vector<double> h(4);
    for (std::size_t r = 0; r < 4; ++r) {
        double a = net.layers[0].b[r];
        for (std::size_t i = 0; i < 3; ++i) a += net.layers[0].w[r * 3 + i] * x[i];
        h[r] = a > 0.0 ? a : 0.0;
    }
    std::vector<double> want(2);
    for (std::size_t r = 0; r < 2; ++r) {
        double a = net.layers[1].b[r];
        for (std::size_t i = 0; i < 4; ++i) a += net.layers[1].w[r * 4 + i] * h[i];
        want[r] = a;
    }

    const auto got = forward(net, x);
    CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-12));
    CHECK(got[1] == doctest::Approx(want[1]).epsilon(1e-12));
}

TEST_CASE("forward: dimension mismatch raises shape error") {
    auto net = single_layer(3, 2, Activation::identity, 0.1, 0.0);
    CHECK_THROWS_AS(forward(net, std::vector<double>{1.0, 2.0}), ShapeError);
}

TEST_CASE("cross_entropy: uniform logits give ln 2") {
    CHECK(cross_entropy(std::vector<double>{0.0, 0.0}, 0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("cross_entropy: saturated logits do not overflow") {
    const double v = cross_entropy(std::vector<double>{1000.0, 0.0}, 0);
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("cross_entropy: matches naive formula at safe magnitudes") {
    const std::vector<double> lg{0.3, -0.2};
    // naive oracle without the log-sum-exp shift
    const double naive = -std::log(std::exp(lg[1]) / (std::exp(lg[0]) + std::exp(lg[1])));
    CHECK(cross_entropy(lg, 1) == doctest::Approx(naive).epsilon(1e-12));
}

TEST_CASE("cross_entropy: label out of range") {
    CHECK_THROWS_AS(cross_entropy(std::vector<double>{0.0, 0.0}, 2), DomainError);
    CHECK_THROWS_AS(cross_entropy(std::vector<double>{0.0, 0.0}, -1), DomainError);
}

TEST_CASE("cross_entropy: shift invariance") {
    const std::vector<double> lg{1.2, -0.7, 0.4};
    std::vector<double> shifted{lg};
    for (double& v : shifted) v += 17.5;
    for (int y = 0; y < 3; ++y)
        CHECK(std::fabs(cross_entropy(lg, y) - cross_entropy(shifted, y)) < 1e-9);
}

TEST_CASE("softmax sums to one") {
    const auto p = softmax(std::vector<double>{3.0, -1.0, 0.5, 2.2});
    double s = 0.0;
    for (double v : p) s += v;
    CHECK(std::fabs(s - 1.0) < 1e-12);
}

TEST_CASE("backward: constructed stationary point has zero gradients") {
    auto net = single_layer(2, 2, Activation::identity, 0.0, 0.0);
    // mirrored inputs and balanced labels: gradient contributions cancel
    const std::vector<double> X{1.0, 2.0, -1.0, -2.0, 1.0, 2.0, -1.0, -2.0};
    const std::vector<int> Y{0, 0, 1, 1};
    const auto res = backward(net, X, Y, 4);
    for (double v : res.grads.layers[0].dw) CHECK(std::fabs(v) < 1e-12);
    for (double v : res.grads.layers[0].db) CHECK(std::fabs(v) < 1e-12);
}

TEST_CASE("backward: gradients match central finite differences") {
    for (auto act : {Activation::identity, Activation::selu}) {
        Rng rng(7 + static_cast<int>(act));
        auto net = make_net(3, Arch{{5, 4}, act}, 3, rng);
        std::vector<double> X(4 * 3);
        for (double& v : X) v = rng.normal();
        const std::vector<int> Y{0, 2, 1, 0};

        const auto res = backward(net, X, Y, 4);
        const auto fd = testutil::fd_net_grad(net, [&](const DenseNet& n) {
            return backward(n, X, Y, 4).loss;
        });
        CHECK(testutil::max_rel_err(res.grads, fd) < 1e-4);
    }
}

TEST_CASE("backward: duplicating the batch leaves mean gradients unchanged") {
    Rng rng(11);
    auto net = make_net(2, Arch{{4}, Activation::relu}, 2, rng);
    std::vector<double> X{0.3, -1.0, 2.0, 0.7};
    const std::vector<int> Y{0, 1};
    const auto once = backward(net, X, Y, 2);
    std::vector<double> X2 = X;
    X2.insert(X2.end(), X.begin(), X.end());
    const std::vector<int> Y2{0, 1, 0, 1};
    const auto twice = backward(net, X2, Y2, 4);
    CHECK(once.loss == doctest::Approx(twice.loss).epsilon(1e-12));
    for (std::size_t li = 0; li < once.grads.layers.size(); ++li)
        for (std::size_t j = 0; j < once.grads.layers[li].dw.size(); ++j)
            CHECK(once.grads.layers[li].dw[j] ==
                  doctest::Approx(twice.grads.layers[li].dw[j]).epsilon(1e-12));
}

TEST_CASE("backward: empty batch rejected") {
    auto net = single_layer(2, 2, Activation::identity, 0.1, 0.0);
    CHECK_THROWS_AS(backward(net, std::vector<double>{}, std::vector<int>{}, 0),
                    InputError);
}

TEST_CASE("sgd step: w=1, g=2, lr=0.1 gives 0.8") {
    auto net = single_layer(1, 1, Activation::identity, 1.0, 0.5);
    GradientSet g = GradientSet::zeros_like(net);
    g.layers[0].dw[0] = 2.0;
    g.layers[0].db[0] = 1.0;
    sgd_step(net, g, 0.1);
    CHECK(net.layers[0].w[0] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(net.layers[0].b[0] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("optimizer steps: zero gradients leave parameters unchanged") {
    auto net = single_layer(2, 2, Activation::identity, 0.3, -0.1);
    const auto before = net;
    GradientSet g = GradientSet::zeros_like(net);
    sgd_step(net, g, 0.5);
    AdamState st = AdamState::init(net);
    adam_step(net, g, 0.5, AdamParams{}, st);
    for (std::size_t j = 0; j < net.layers[0].w.size(); ++j)
        CHECK(net.layers[0].w[j] == before.layers[0].w[j]);
}

TEST_CASE("adam: first step magnitude is ~lr regardless of gradient scale") {
    // hand-evaluated recurrence: m=(1-b1)g, v=(1-b2)g^2; bias-corrected
    // ratio is g/|g| so |step| = lr * |g| / (|g| + eps) ~= lr
    for (double gval : {1.0, 100.0}) {
        auto net = single_layer(1, 1, Activation::identity, 0.0, 0.0);
        GradientSet g = GradientSet::zeros_like(net);
        g.layers[0].dw[0] = gval;
        AdamState st = AdamState::init(net);
        const double lr = 0.01;
        adam_step(net, g, lr, AdamParams{}, st);
        CHECK(std::fabs(-net.layers[0].w[0] - lr) < 1e-6);
    }
}

TEST_CASE("train_classifier: separable blobs reach >= 0.99 accuracy") {
    const auto data = testutil::make_blobs(400, 3);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = 32;
    cfg.learning_rate = 0.01;
    cfg.seed = 5;
    const auto model = train_classifier(data.train_split(), Arch{{8}, Activation::relu}, cfg);
    CHECK(accuracy(model, data.train_split()) >= 0.99);
}

TEST_CASE("train_classifier: zero epochs forbidden") {
    const auto data = testutil::make_blobs(10, 1);
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(train_classifier(data, Arch{{4}, Activation::relu}, cfg),
                    InputError);
}

TEST_CASE("train_classifier: empty dataset rejected") {
    Dataset d;
    d.dim = 2;
    CHECK_THROWS_AS(train_classifier(d, Arch{{4}, Activation::relu}, TrainConfig{}),
                    InputError);
}

TEST_CASE("train_classifier: same seed gives byte-identical weights") {
    const auto data = testutil::make_blobs(100, 9);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 16;
    cfg.seed = 77;
    const auto a = train_classifier(data, Arch{{6}, Activation::selu}, cfg);
    const auto b = train_classifier(data, Arch{{6}, Activation::selu}, cfg);
    CHECK(serialize_net(a.net()) == serialize_net(b.net()));
}

TEST_CASE("check_shapes rejects broken chains and hidden-logit activation") {
    DenseNet net;
    Layer l1;
    l1.in = 2;
    l1.out = 3;
    l1.act = Activation::relu;
    l1.w.assign(6, 0.1);
    l1.b.assign(3, 0.0);
    Layer l2 = l1;  // in=2 breaks the chain after a 3-wide layer
    net.layers = {l1, l2};
    CHECK_THROWS_AS(net.check_shapes(), ShapeError);

    DenseNet relu_out;
    relu_out.layers = {l1};
    CHECK_THROWS_AS(relu_out.check_shapes(), ShapeError);
}
