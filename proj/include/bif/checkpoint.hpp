#pragma once

#include <string>

#include "bif/bif.hpp"
#include "bif/nn.hpp"

namespace bif {

// Versioned JSON model checkpoint: layer dims, activations, row-major
// weights, biases.
std::string serialize_net(const DenseNet& net);
DenseNet deserialize_net(const std::string& json_text);

void save_model(const FrozenModel& model, const std::string& path);
FrozenModel load_model(const std::string& path);

// Importance checkpoint: {mode, alpha | network, config echo, dataset
// fingerprint}.
struct ImportanceCheckpoint {
    BifMode mode = BifMode::global;
    std::vector<double> alpha;       // global
    DenseNet network;                // local (empty layers when global)
    std::uint64_t dataset_fingerprint = 0;
    std::vector<int> feature_groups;
    double alpha0 = 0.0;
};

void save_importance(const ImportanceCheckpoint& ck, const std::string& path);
ImportanceCheckpoint load_importance(const std::string& path);

}  // namespace bif
