#pragma once

#include <cstdint>
#include <vector>

#include "bif/bif.hpp"
#include "bif/dataset.hpp"
#include "bif/nn.hpp"

namespace bif {

struct TradeoffPoint {
    double sigma = 0.0;
    std::uint64_t model_fingerprint = 0;
    std::vector<double> alpha;
    double test_accuracy = 0.0;
    double kl_vs_baseline = 0.0;  // KL(noisy || baseline)
    double kl_baseline_vs = 0.0;  // KL(baseline || noisy)
};

struct TradeoffRun {
    std::vector<TradeoffPoint> points;  // ordered as the input grid
};

struct TradeoffConfig {
    Arch arch;
    TrainConfig train;
    BifConfig bif;       // alpha0 defaults to 0.01 for trade-off runs
    double clip_norm = 1.0;

    TradeoffConfig() { bif.alpha0 = 0.01; }
};

// For each sigma: noisy_train -> fit_global -> record accuracy and the KL
// against the sigma=0 entry. The grid must contain 0.
TradeoffRun run_tradeoff(const Dataset& dataset, const TradeoffConfig& cfg,
                         const std::vector<double>& sigma_grid);

// |top-k(sigma) intersect top-k(0)| / k per grid point.
std::vector<double> top_feature_stability(const TradeoffRun& run, std::size_t k);

double spearman_rank_correlation(const std::vector<double>& a,
                                 const std::vector<double>& b);

}  // namespace bif
