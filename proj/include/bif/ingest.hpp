#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "bif/dataset.hpp"
#include "bif/nn.hpp"

namespace bif {

struct ColumnSpec {
    std::string name;
    bool categorical = false;
};

struct TabularSchema {
    std::string label;
    std::vector<ColumnSpec> features;  // empty = every non-label, non-drop column, numeric
    std::vector<std::string> drop;
    double train_fraction = 0.8;

    void validate() const;
};

// Loads a CSV, applies ordinal coding to categorical columns and shifts
// every feature to zero mean using train-split statistics.
Dataset load_csv(const std::string& path, const TabularSchema& schema);

// --- IDX / MNIST -------------------------------------------------------

struct PatchView {
    std::size_t rows = 28;
    std::size_t cols = 28;
    std::size_t patch = 4;

    std::size_t patches_per_row() const { return cols / patch; }
    std::size_t patch_count() const { return (rows / patch) * (cols / patch); }
    std::size_t pixel_count() const { return rows * cols; }
    // group index of each pixel, length pixel_count()
    std::vector<int> pixel_groups() const;
};

std::vector<std::uint8_t> patch_expand(std::span<const std::uint8_t> patch_mask,
                                       const PatchView& view);

struct IdxImages {
    std::size_t count = 0, rows = 0, cols = 0;
    std::vector<std::uint8_t> pixels;
};

IdxImages read_idx_images(const std::string& path);
std::vector<std::uint8_t> read_idx_labels(const std::string& path);
void write_idx_images(const std::string& path, const IdxImages& imgs);
void write_idx_labels(const std::string& path,
                      std::span<const std::uint8_t> labels);

struct MnistData {
    Dataset data;  // pixels in [0,1]; labels remapped by keep order
    PatchView view;
};

// Loads an image/label IDX pair, keeps only the listed digit classes and
// remaps them to 0..k-1 in the listed order.
MnistData load_mnist(const std::string& image_path, const std::string& label_path,
                     const std::vector<int>& keep = {3, 8});

// Concatenates a train pair and test pair, preserving the split.
MnistData load_mnist_split(const std::string& train_images,
                           const std::string& train_labels,
                           const std::string& test_images,
                           const std::string& test_labels,
                           const std::vector<int>& keep = {3, 8});

// --- noisy training (DP-SGD stand-in) ----------------------------------

// Per-example gradients clipped to clip_norm in L2; Gaussian noise
// N(0, sigma^2 clip_norm^2) added per coordinate to the batch sum before
// averaging. No privacy accounting is performed; sigma is just a knob.
FrozenModel noisy_train(const Dataset& train, const Arch& arch,
                        const TrainConfig& cfg, double clip_norm, double sigma);

}  // namespace bif
