#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bif {

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Row-major labeled dataset. The first `train_count` rows are the train
// split; the rest are the test split.
struct Dataset {
    std::size_t dim = 0;
    std::vector<double> features;      // n * dim, row-major
    std::vector<int> labels;           // n
    std::vector<std::uint8_t> truth;   // n * dim ground-truth relevance, may be empty
    std::size_t train_count = 0;
    std::vector<std::string> feature_names;  // may be empty

    std::size_t size() const { return labels.size(); }
    std::size_t test_count() const { return size() - train_count; }
    bool has_truth() const { return !truth.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * dim, dim};
    }
    std::span<const std::uint8_t> truth_row(std::size_t i) const {
        return {truth.data() + i * dim, dim};
    }

    int num_classes() const {
        int c = 0;
        for (int y : labels) c = std::max(c, y + 1);
        return c;
    }

    Dataset train_split() const { return slice(0, train_count); }
    Dataset test_split() const { return slice(train_count, size()); }

    Dataset slice(std::size_t lo, std::size_t hi) const {
        Dataset d;
        d.dim = dim;
        d.feature_names = feature_names;
        d.features.assign(features.begin() + lo * dim, features.begin() + hi * dim);
        d.labels.assign(labels.begin() + lo, labels.begin() + hi);
        if (has_truth())
            d.truth.assign(truth.begin() + lo * dim, truth.begin() + hi * dim);
        d.train_count = d.size();
        return d;
    }
};

// FNV-1a over the raw feature/label bytes; used to stamp checkpoints.
std::uint64_t dataset_fingerprint(const Dataset& d);

}  // namespace bif
