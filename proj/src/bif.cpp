#include "bif/bif.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bif {

void BifConfig::validate() const {
    if (mc_samples < 1) throw ConfigError("bif: mc_samples must be >= 1");
    if (!(alpha0 > 0.0)) throw ConfigError("bif: alpha0 must be > 0");
    if (kl_weight < 0.0) throw ConfigError("bif: kl_weight must be >= 0");
    if (epochs < 1) throw ConfigError("bif: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("bif: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("bif: learning_rate must be > 0");
}

std::size_t BifConfig::group_count(std::size_t input_dim) const {
    if (feature_groups.empty()) return input_dim;
    if (feature_groups.size() != input_dim)
        throw ConfigError("bif: feature_groups size does not match input dim");
    int mx = -1;
    for (int g : feature_groups) {
        if (g < 0) throw ConfigError("bif: negative feature group");
        mx = std::max(mx, g);
    }
    return static_cast<std::size_t>(mx) + 1;
}

double softplus(double x) {
    return x > 30.0 ? x : std::log1p(std::exp(x));
}

double inverse_softplus(double y) {
    return y > 30.0 ? y : std::log(std::expm1(y));
}

DirichletParams GlobalImportance::alpha() const {
    std::vector<double> a(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) a[i] = softplus(theta[i]) + 1e-4;
    return DirichletParams(std::move(a));
}

GlobalImportance GlobalImportance::init(std::size_t dim, double initial_alpha) {
    GlobalImportance g;
    g.theta.assign(dim, inverse_softplus(initial_alpha - 1e-4));
    return g;
}

DirichletParams ImportanceNetwork::alpha_for(std::span<const double> x) const {
    const auto t = forward(net, x);
    std::vector<double> a(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) a[i] = softplus(t[i]) + 1e-4;
    return DirichletParams(std::move(a));
}

std::vector<double> weighted_forward(const FrozenModel& g, const SimplexVector& f,
                                     std::span<const double> x,
                                     std::span<const int> groups) {
    if (x.size() != g.input_dim())
        throw ShapeError("weighted_forward: input dim mismatch");
    std::vector<double> u(x.size());
    if (groups.empty()) {
        if (f.dim() != x.size())
            throw ShapeError("weighted_forward: importance dim mismatch");
        for (std::size_t d = 0; d < x.size(); ++d) u[d] = f.f[d] * x[d];
    } else {
        if (groups.size() != x.size())
            throw ShapeError("weighted_forward: group map dim mismatch");
        for (std::size_t d = 0; d < x.size(); ++d) u[d] = f.f[groups[d]] * x[d];
    }
    return forward(g.net(), u);
}

namespace {

struct CeGradResult {
    double loss = 0.0;              // mean cross-entropy over the batch
    std::vector<double> df;         // dL/df per instance (B x G) or pooled (G)
};

// Forward f-weighted inputs through g and backprop to dL/df. When `pooled`
// the same f weights every instance (global mode) and df has size G;
// otherwise F holds one f per row and df is B x G.
CeGradResult ce_and_dfdgrad(const FrozenModel& g, std::span<const double> X,
                            std::span<const int> Y, std::size_t batch,
                            std::span<const double> F, bool pooled,
                            std::span<const int> groups, std::size_t G,
                            double scale) {
    const std::size_t D = g.input_dim();
    std::vector<double> U(batch * D);
    for (std::size_t b = 0; b < batch; ++b) {
        const double* x = X.data() + b * D;
        const double* f = pooled ? F.data() : F.data() + b * G;
        double* u = U.data() + b * D;
        for (std::size_t d = 0; d < D; ++d) {
            const std::size_t gi = groups.empty() ? d : groups[d];
            u[d] = f[gi] * x[d];
        }
    }
    auto cache = forward_batch(g.net(), U, batch);
    const std::size_t C = g.output_dim();
    CeGradResult res;
    std::vector<double> dlogits(batch * C);
    for (std::size_t b = 0; b < batch; ++b) {
        std::span<const double> lg(cache.logits.data() + b * C, C);
        res.loss += cross_entropy(lg, Y[b]) / static_cast<double>(batch);
        cross_entropy_grad(lg, Y[b], scale, {dlogits.data() + b * C, C});
    }
    GradientSet scratch = GradientSet::zeros_like(g.net());
    std::vector<double> dX;
    backprop(g.net(), cache, dlogits, scratch, &dX);
    res.df.assign(pooled ? G : batch * G, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
        const double* x = X.data() + b * D;
        const double* dx = dX.data() + b * D;
        double* df = pooled ? res.df.data() : res.df.data() + b * G;
        for (std::size_t d = 0; d < D; ++d) {
            const std::size_t gi = groups.empty() ? d : groups[d];
            df[gi] += dx[d] * x[d];
        }
    }
    return res;
}

// dL/dalpha from dL/df through the simplex mean f = alpha / sum(alpha).
void chain_mean_jacobian(std::span<const double> df, const DirichletParams& a,
                         std::span<const double> mean, std::span<double> dalpha) {
    const double S = a.sum();
    double dot = 0.0;
    for (std::size_t i = 0; i < df.size(); ++i) dot += df[i] * mean[i];
    for (std::size_t i = 0; i < df.size(); ++i)
        dalpha[i] += (df[i] - dot) / S;
}

}  // namespace

ElboResult neg_elbo_global(const FrozenModel& g, std::span<const double> X,
                           std::span<const int> Y, std::size_t batch,
                           const GlobalImportance& imp, const BifConfig& cfg,
                           double kl_scale, Rng& rng) {
    cfg.validate();
    if (batch == 0) throw InputError("neg_elbo_global: empty batch");
    const std::size_t G = cfg.group_count(g.input_dim());
    if (imp.theta.size() != G)
        throw ShapeError("neg_elbo_global: theta size mismatch");

    const DirichletParams alpha = imp.alpha();
    std::vector<double> dalpha(G, 0.0);
    ElboResult out;

    if (cfg.estimator == Estimator::point_estimate) {
        const auto mean = dirichlet_mean(alpha);
        auto ce = ce_and_dfdgrad(g, X, Y, batch, mean.f, true, cfg.feature_groups,
                                 G, 1.0 / static_cast<double>(batch));
        out.loss = ce.loss;
        chain_mean_jacobian(ce.df, alpha, mean.f, dalpha);
    } else {
        const double per = 1.0 / static_cast<double>(cfg.mc_samples);
        for (int j = 0; j < cfg.mc_samples; ++j) {
            const auto s = dirichlet_sample_with_grad(alpha, rng);
            auto ce = ce_and_dfdgrad(g, X, Y, batch, s.f.f, true,
                                     cfg.feature_groups, G,
                                     per / static_cast<double>(batch));
            out.loss += per * ce.loss;
            for (std::size_t k = 0; k < G; ++k) {
                double acc = 0.0;
                for (std::size_t i = 0; i < G; ++i) acc += ce.df[i] * s.at(i, k);
                dalpha[k] += acc;
            }
        }
    }

    if (cfg.kl_weight > 0.0) {
        const DirichletParams prior(std::vector<double>(G, cfg.alpha0));
        const double w = cfg.kl_weight * kl_scale;
        out.loss += w * kl_divergence(alpha, prior);
        const auto kg = kl_divergence_grad(alpha, prior);
        for (std::size_t i = 0; i < G; ++i) dalpha[i] += w * kg[i];
    }

    out.dtheta.resize(G);
    for (std::size_t i = 0; i < G; ++i) {
        const double sig = 1.0 / (1.0 + std::exp(-imp.theta[i]));
        out.dtheta[i] = dalpha[i] * sig;
    }
    return out;
}

ElboResult neg_elbo_local(const FrozenModel& g, std::span<const double> X,
                          std::span<const int> Y, std::size_t batch,
                          const ImportanceNetwork& in_net, const BifConfig& cfg,
                          Rng& rng) {
    cfg.validate();
    if (batch == 0) throw InputError("neg_elbo_local: empty batch");
    const std::size_t D = g.input_dim();
    const std::size_t G = cfg.group_count(D);
    if (in_net.net.output_dim() != G)
        throw ShapeError("neg_elbo_local: importance net output dim mismatch");

    auto in_cache = forward_batch(in_net.net, X, batch);
    std::vector<double> alpha_flat(batch * G);
    for (std::size_t i = 0; i < alpha_flat.size(); ++i)
        alpha_flat[i] = softplus(in_cache.logits[i]) + 1e-4;

    std::vector<double> dalpha(batch * G, 0.0);
    ElboResult out;

    const DirichletParams prior(std::vector<double>(G, cfg.alpha0));

    if (cfg.estimator == Estimator::point_estimate) {
        std::vector<double> F(batch * G);
        for (std::size_t b = 0; b < batch; ++b) {
            double S = 0.0;
            for (std::size_t k = 0; k < G; ++k) S += alpha_flat[b * G + k];
            for (std::size_t k = 0; k < G; ++k)
                F[b * G + k] = alpha_flat[b * G + k] / S;
        }
        auto ce = ce_and_dfdgrad(g, X, Y, batch, F, false, cfg.feature_groups, G,
                                 1.0 / static_cast<double>(batch));
        out.loss = ce.loss;
        for (std::size_t b = 0; b < batch; ++b) {
            DirichletParams a(std::vector<double>(alpha_flat.begin() + b * G,
                                                  alpha_flat.begin() + (b + 1) * G));
            chain_mean_jacobian({ce.df.data() + b * G, G}, a,
                                {F.data() + b * G, G},
                                {dalpha.data() + b * G, G});
        }
    } else {
        const double per = 1.0 / static_cast<double>(cfg.mc_samples);
        for (int j = 0; j < cfg.mc_samples; ++j) {
            std::vector<double> F(batch * G);
            std::vector<SampleWithGrad> samples;
            samples.reserve(batch);
            for (std::size_t b = 0; b < batch; ++b) {
                DirichletParams a(std::vector<double>(
                    alpha_flat.begin() + b * G, alpha_flat.begin() + (b + 1) * G));
                samples.push_back(dirichlet_sample_with_grad(a, rng));
                std::copy(samples.back().f.f.begin(), samples.back().f.f.end(),
                          F.begin() + b * G);
            }
            auto ce = ce_and_dfdgrad(g, X, Y, batch, F, false, cfg.feature_groups,
                                     G, per / static_cast<double>(batch));
            out.loss += per * ce.loss;
            for (std::size_t b = 0; b < batch; ++b) {
                const auto& s = samples[b];
                for (std::size_t k = 0; k < G; ++k) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < G; ++i)
                        acc += ce.df[b * G + i] * s.at(i, k);
                    dalpha[b * G + k] += acc;
                }
            }
        }
    }

    if (cfg.kl_weight > 0.0) {
        const double w = cfg.kl_weight / static_cast<double>(batch);
        for (std::size_t b = 0; b < batch; ++b) {
            DirichletParams a(std::vector<double>(alpha_flat.begin() + b * G,
                                                  alpha_flat.begin() + (b + 1) * G));
            out.loss += w * kl_divergence(a, prior);
            const auto kg = kl_divergence_grad(a, prior);
            for (std::size_t k = 0; k < G; ++k) dalpha[b * G + k] += w * kg[k];
        }
    }

    // chain softplus, then backprop through the importance network
    std::vector<double> dt(batch * G);
    for (std::size_t i = 0; i < dt.size(); ++i) {
        const double sig = 1.0 / (1.0 + std::exp(-in_cache.logits[i]));
        dt[i] = dalpha[i] * sig;
    }
    out.dnet = GradientSet::zeros_like(in_net.net);
    backprop(in_net.net, in_cache, dt, out.dnet);
    return out;
}

DirichletParams fit_global(const FrozenModel& g, const Dataset& dataset,
                           const BifConfig& cfg) {
    cfg.validate();
    if (dataset.dim != g.input_dim())
        throw InputError("fit_global: dataset feature dim does not match model");
    const Dataset train = dataset.train_split();
    const std::size_t n = train.size();
    const std::size_t G = cfg.group_count(g.input_dim());
    const std::size_t batches_per_epoch =
        (n + cfg.batch_size - 1) / cfg.batch_size;
    const double kl_scale = 1.0 / static_cast<double>(batches_per_epoch);

    Rng rng(cfg.seed);
    GlobalImportance imp = GlobalImportance::init(G);
    std::vector<double> m(G, 0.0), v(G, 0.0);
    std::int64_t t = 0;
    const AdamParams ap;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> bx;
    std::vector<int> by;
    for (int e = 0; e < cfg.epochs; ++e) {
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
            const auto res =
                neg_elbo_global(g, bx, by, bsz, imp, cfg, kl_scale, rng);
            ++t;
            const double bc1 = 1.0 - std::pow(ap.beta1, static_cast<double>(t));
            const double bc2 = 1.0 - std::pow(ap.beta2, static_cast<double>(t));
            for (std::size_t i = 0; i < G; ++i) {
                m[i] = ap.beta1 * m[i] + (1.0 - ap.beta1) * res.dtheta[i];
                v[i] = ap.beta2 * v[i] + (1.0 - ap.beta2) * res.dtheta[i] * res.dtheta[i];
                imp.theta[i] -=
                    cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + ap.eps);
            }
        }
    }
    return imp.alpha();
}

ImportanceNetwork fit_local(const FrozenModel& g, const Dataset& dataset,
                            const BifConfig& cfg) {
    cfg.validate();
    if (dataset.dim != g.input_dim())
        throw InputError("fit_local: dataset feature dim does not match model");
    const Dataset train = dataset.train_split();
    const std::size_t n = train.size();
    const std::size_t G = cfg.group_count(g.input_dim());

    Rng rng(cfg.seed);
    ImportanceNetwork in_net{make_net(train.dim, cfg.in_arch, G, rng)};
    AdamState state = AdamState::init(in_net.net);
    const AdamParams ap;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> bx;
    std::vector<int> by;
    for (int e = 0; e < cfg.epochs; ++e) {
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
            auto res = neg_elbo_local(g, bx, by, bsz, in_net, cfg, rng);
            adam_step(in_net.net, res.dnet, cfg.learning_rate, ap, state);
        }
    }
    return in_net;
}

Explanation explain(const DirichletParams& params) {
    Explanation e{params, dirichlet_mean(params).f, dirichlet_stddev(params)};
    return e;
}

Explanation explain(const ImportanceNetwork& in_net, std::span<const double> x) {
    return explain(in_net.alpha_for(x));
}

}  // namespace bif
