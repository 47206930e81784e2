#pragma once

// Shared test utilities: finite-difference oracles and a small rendered
// digit fixture that exercises the IDX/MNIST path without external data.

#include <cmath>
#include <functional>
#include <vector>

#include "bif/dataset.hpp"
#include "bif/ingest.hpp"
#include "bif/nn.hpp"
#include "bif/rng.hpp"

namespace testutil {

// Central finite differences of `loss` with respect to every net parameter.
inline bif::GradientSet fd_net_grad(bif::DenseNet net,
                                    const std::function<double(const bif::DenseNet&)>& loss,
                                    double h = 1e-4) {
    bif::GradientSet g = bif::GradientSet::zeros_like(net);
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        auto& L = net.layers[li];
        for (std::size_t j = 0; j < L.w.size(); ++j) {
            const double orig = L.w[j];
            L.w[j] = orig + h;
            const double up = loss(net);
            L.w[j] = orig - h;
            const double dn = loss(net);
            L.w[j] = orig;
            g.layers[li].dw[j] = (up - dn) / (2.0 * h);
        }
        for (std::size_t j = 0; j < L.b.size(); ++j) {
            const double orig = L.b[j];
            L.b[j] = orig + h;
            const double up = loss(net);
            L.b[j] = orig - h;
            const double dn = loss(net);
            L.b[j] = orig;
            g.layers[li].db[j] = (up - dn) / (2.0 * h);
        }
    }
    return g;
}

// Central finite differences of `loss` over a flat parameter vector.
inline std::vector<double> fd_vec_grad(std::vector<double> theta,
                                       const std::function<double(const std::vector<double>&)>& loss,
                                       double h = 1e-4) {
    std::vector<double> g(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double orig = theta[i];
        theta[i] = orig + h;
        const double up = loss(theta);
        theta[i] = orig - h;
        const double dn = loss(theta);
        theta[i] = orig;
        g[i] = (up - dn) / (2.0 * h);
    }
    return g;
}

inline bool rel_close(double a, double b, double rtol, double atol = 1e-7) {
    return std::fabs(a - b) <= atol + rtol * std::max(std::fabs(a), std::fabs(b));
}

// Largest relative error between an analytic and a numeric gradient set.
inline double max_rel_err(const bif::GradientSet& a, const bif::GradientSet& b,
                          double atol = 1e-6) {
    double worst = 0.0;
    for (std::size_t li = 0; li < a.layers.size(); ++li) {
        for (std::size_t j = 0; j < a.layers[li].dw.size(); ++j) {
            const double x = a.layers[li].dw[j], y = b.layers[li].dw[j];
            const double scale = std::max({std::fabs(x), std::fabs(y), atol});
            worst = std::max(worst, std::fabs(x - y) / scale);
        }
        for (std::size_t j = 0; j < a.layers[li].db.size(); ++j) {
            const double x = a.layers[li].db[j], y = b.layers[li].db[j];
            const double scale = std::max({std::fabs(x), std::fabs(y), atol});
            worst = std::max(worst, std::fabs(x - y) / scale);
        }
    }
    return worst;
}

// Two 2-Gaussian blobs at +-3 along each axis; linearly separable.
inline bif::Dataset make_blobs(std::size_t n, std::uint64_t seed,
                               double train_fraction = 0.8,
                               double center = 3.0) {
    bif::Rng rng(seed);
    bif::Dataset d;
    d.dim = 2;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % 2);
        const double c = y == 0 ? -center : center;
        d.features.push_back(c + rng.normal());
        d.features.push_back(c + rng.normal());
        d.labels.push_back(y);
    }
    d.train_count = static_cast<std::size_t>(n * train_fraction);
    return d;
}

// 7x7 coarse glyphs for the digits 3 and 8; each coarse cell maps onto one
// 4x4 patch of the 28x28 grid, so patch importance has a clean ground truth
// (the cells where the two glyphs differ).
inline const char* glyph(int digit) {
    static const char* three =
        ".XXXX.."
        "....XX."
        "....XX."
        "..XXX.."
        "....XX."
        "....XX."
        ".XXXX..";
    static const char* eight =
        ".XXXX.."
        ".XX.XX."
        ".XX.XX."
        "..XXX.."
        ".XX.XX."
        ".XX.XX."
        ".XXXX..";
    return digit == 3 ? three : eight;
}

// Renders noisy 28x28 instances of the digits 3 and 8 and returns them as
// an in-memory IDX image set plus labels (values 3 and 8).
inline std::pair<bif::IdxImages, std::vector<std::uint8_t>> render_digits(
    std::size_t n, std::uint64_t seed) {
    bif::Rng rng(seed);
    bif::IdxImages imgs;
    imgs.count = n;
    imgs.rows = 28;
    imgs.cols = 28;
    imgs.pixels.assign(n * 784, 0);
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int digit = (i % 2 == 0) ? 3 : 8;
        labels[i] = static_cast<std::uint8_t>(digit);
        const char* g = glyph(digit);
        const double gain = 0.75 + 0.25 * rng.uniform();
        std::uint8_t* px = imgs.pixels.data() + i * 784;
        for (std::size_t r = 0; r < 28; ++r)
            for (std::size_t c = 0; c < 28; ++c) {
                const bool on = g[(r / 4) * 7 + (c / 4)] == 'X';
                double v = on ? 220.0 * gain : 0.0;
                v += 25.0 * rng.normal();
                v = std::min(255.0, std::max(0.0, v));
                px[r * 28 + c] = static_cast<std::uint8_t>(v);
            }
    }
    return {imgs, labels};
}

// Writes a rendered train/test digit fixture to IDX files under dir.
struct DigitFixture {
    std::string train_images, train_labels, test_images, test_labels;
};

inline DigitFixture write_digit_fixture(const std::string& dir, std::size_t n_train,
                                        std::size_t n_test, std::uint64_t seed) {
    DigitFixture f;
    f.train_images = dir + "/train-images.idx";
    f.train_labels = dir + "/train-labels.idx";
    f.test_images = dir + "/test-images.idx";
    f.test_labels = dir + "/test-labels.idx";
    const auto [ti, tl] = render_digits(n_train, seed);
    const auto [vi, vl] = render_digits(n_test, seed + 1);
    bif::write_idx_images(f.train_images, ti);
    bif::write_idx_labels(f.train_labels, tl);
    bif::write_idx_images(f.test_images, vi);
    bif::write_idx_labels(f.test_labels, vl);
    return f;
}

}  // namespace testutil
