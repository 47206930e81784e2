#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "bif/dataset.hpp"

namespace bif {

// Paper indices are 1-based (X^[1]..X^[11]); storage is 0-based, so the
// documented feature sets below shift down by one.
enum class SynId { syn1, syn2, syn3, syn4, syn5, syn6 };

SynId syn_from_string(const std::string& s);
std::string to_string(SynId id);

struct SynSpec {
    SynId id = SynId::syn1;
    std::size_t n = 10000;
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
    // Whether the switch coordinate (index 10) counts as ground-truth
    // relevant for syn4-6.
    bool switch_in_truth = true;
};

std::size_t syn_dim(SynId id);  // 10 for syn1-3, 11 for syn4-6

// p(y=1 | x) for the generator; computed in log space so the syn3
// "-100 sin" term cannot overflow.
double label_probability(SynId id, std::span<const double> x);

Dataset generate(const SynSpec& spec);

void write_dataset_csv(const Dataset& d, const std::string& features_path,
                       const std::string& truth_path);
Dataset read_dataset_csv(const std::string& features_path,
                         const std::string& truth_path, double train_fraction);

}  // namespace bif
