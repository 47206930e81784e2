#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bif/dataset.hpp"
#include "bif/dirichlet.hpp"
#include "bif/nn.hpp"

namespace bif {

enum class BifMode { global, local };
enum class Estimator { sampling, point_estimate };

struct BifConfig {
    BifMode mode = BifMode::global;
    Estimator estimator = Estimator::point_estimate;
    int mc_samples = 1;          // J, sampling estimator only
    double alpha0 = 0.1;         // symmetric prior
    double kl_weight = 1.0;
    int epochs = 10;
    int batch_size = 100;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
    // Maps each input feature to an importance component; empty = identity.
    // Used for pixel->patch grouping on image data.
    std::vector<int> feature_groups;
    Arch in_arch{{100, 100}, Activation::relu};

    void validate() const;
    std::size_t group_count(std::size_t input_dim) const;
};

// Unconstrained parameterization of the global Dirichlet posterior.
struct GlobalImportance {
    std::vector<double> theta;

    DirichletParams alpha() const;
    static GlobalImportance init(std::size_t dim, double initial_alpha = 1.0);
};

double softplus(double x);
double inverse_softplus(double y);

// Dense network whose softplus-mapped outputs are per-instance Dirichlet
// parameters.
struct ImportanceNetwork {
    DenseNet net;

    DirichletParams alpha_for(std::span<const double> x) const;
};

// logits = g(f expanded over groups, elementwise times x)
std::vector<double> weighted_forward(const FrozenModel& g, const SimplexVector& f,
                                     std::span<const double> x,
                                     std::span<const int> groups = {});

struct ElboResult {
    double loss = 0.0;               // negative lower bound estimate
    std::vector<double> dtheta;      // global mode
    GradientSet dnet;                // local mode
};

// Negative ELBO over a batch for the global importance vector, with the
// gradient wrt theta. kl_scale multiplies the (single) KL term; fit_global
// passes 1/batches_per_epoch so one epoch applies the regularizer once.
ElboResult neg_elbo_global(const FrozenModel& g, std::span<const double> X,
                           std::span<const int> Y, std::size_t batch,
                           const GlobalImportance& imp, const BifConfig& cfg,
                           double kl_scale, Rng& rng);

// Local counterpart: per-instance KL averaged over the batch; gradients
// reach the importance network parameters.
ElboResult neg_elbo_local(const FrozenModel& g, std::span<const double> X,
                          std::span<const int> Y, std::size_t batch,
                          const ImportanceNetwork& in_net, const BifConfig& cfg,
                          Rng& rng);

DirichletParams fit_global(const FrozenModel& g, const Dataset& dataset,
                           const BifConfig& cfg);

ImportanceNetwork fit_local(const FrozenModel& g, const Dataset& dataset,
                            const BifConfig& cfg);

struct Explanation {
    DirichletParams params;
    std::vector<double> mean;
    std::vector<double> stddev;
};

Explanation explain(const DirichletParams& params);
Explanation explain(const ImportanceNetwork& in_net, std::span<const double> x);

}  // namespace bif
