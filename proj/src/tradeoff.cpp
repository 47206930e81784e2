#include "bif/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "bif/checkpoint.hpp"
#include "bif/evalkit.hpp"
#include "bif/ingest.hpp"

namespace bif {

TradeoffRun run_tradeoff(const Dataset& dataset, const TradeoffConfig& cfg,
                         const std::vector<double>& sigma_grid) {
    if (std::find(sigma_grid.begin(), sigma_grid.end(), 0.0) == sigma_grid.end())
        throw ConfigError("run_tradeoff: sigma grid must contain 0");
    const Dataset test = dataset.test_split();

    TradeoffRun run;
    std::vector<double> baseline_alpha;
    // baseline first so later grid points can diff against it
    std::vector<std::size_t> order(sigma_grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return (sigma_grid[a] == 0.0) > (sigma_grid[b] == 0.0);
    });

    run.points.resize(sigma_grid.size());
    for (std::size_t oi : order) {
        const double sigma = sigma_grid[oi];
        TradeoffPoint pt;
        pt.sigma = sigma;
        const FrozenModel model = noisy_train(dataset.train_split(), cfg.arch,
                                              cfg.train, cfg.clip_norm, sigma);
        pt.model_fingerprint = std::hash<std::string>{}(serialize_net(model.net()));
        pt.test_accuracy = test.size() > 0 ? accuracy(model, test)
                                           : accuracy(model, dataset);
        const DirichletParams alpha = fit_global(model, dataset, cfg.bif);
        pt.alpha = alpha.alpha;
        if (sigma == 0.0 && baseline_alpha.empty()) baseline_alpha = alpha.alpha;
        const DirichletParams base(baseline_alpha);
        pt.kl_vs_baseline = kl_divergence(alpha, base);
        pt.kl_baseline_vs = kl_divergence(base, alpha);
        run.points[oi] = std::move(pt);
    }
    return run;
}

std::vector<double> top_feature_stability(const TradeoffRun& run, std::size_t k) {
    const TradeoffPoint* base = nullptr;
    for (const auto& p : run.points)
        if (p.sigma == 0.0) {
            base = &p;
            break;
        }
    if (base == nullptr) throw ConfigError("top_feature_stability: no baseline entry");
    const auto mask0 = topk(base->alpha, std::min(k, base->alpha.size()));
    std::vector<double> out;
    for (const auto& p : run.points) {
        const auto m = topk(p.alpha, std::min(k, p.alpha.size()));
        std::size_t common = 0;
        for (std::size_t i = 0; i < m.size(); ++i) common += m[i] && mask0[i];
        out.push_back(static_cast<double>(common) /
                      static_cast<double>(std::min(k, p.alpha.size())));
    }
    return out;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman_rank_correlation(const std::vector<double>& a,
                                 const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw InputError("spearman: need two equal-length series");
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    if (da == 0.0 || db == 0.0) return 0.0;
    return num / std::sqrt(da * db);
}

}  // namespace bif
