#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bif/dataset.hpp"
#include "bif/dirichlet.hpp"
#include "bif/nn.hpp"

namespace bif {

struct ConfusionCounts {
    std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;
};

// Per-instance boolean selection masks, n x dim.
struct SelectionMask {
    std::size_t dim = 0;
    std::vector<std::uint8_t> rows;  // n * dim

    std::size_t size() const { return dim == 0 ? 0 : rows.size() / dim; }
    std::span<const std::uint8_t> row(std::size_t i) const {
        return {rows.data() + i * dim, dim};
    }
};

// k largest entries; ties broken toward the lowest feature index.
std::vector<std::uint8_t> topk(std::span<const double> importance, std::size_t k);

double mcc(const ConfusionCounts& c);

ConfusionCounts count_selection(const SelectionMask& masks,
                                std::span<const std::uint8_t> truth);

// Pools confusion counts over all instances and features, then applies mcc.
double score_selection(const SelectionMask& masks,
                       std::span<const std::uint8_t> truth);

// Build per-instance top-k masks from an importance matrix (n x dim).
// k = 0 means "use each instance's truth-mask cardinality".
SelectionMask topk_masks(std::span<const double> importance, std::size_t n,
                         std::size_t dim, std::size_t k,
                         std::span<const std::uint8_t> truth = {});

// Accuracy of clf on inputs with non-selected features zeroed.
double posthoc_accuracy(const FrozenModel& clf, const Dataset& data,
                        const SelectionMask& masks);

struct DivergenceReport {
    double kl_ab = 0.0;
    double kl_ba = 0.0;
    std::vector<double> mean_a;
    std::vector<double> mean_b;
    std::vector<std::size_t> rank_a;  // feature indices, most important first
    std::vector<std::size_t> rank_b;
    // top-k overlap |top_k(a) & top_k(b)| / k for k in {1,3,5} (clamped to D)
    std::vector<double> topk_overlap;
};

DivergenceReport divergence_report(const DirichletParams& a,
                                   const DirichletParams& b);

std::vector<std::size_t> importance_ranking(std::span<const double> importance);

}  // namespace bif
