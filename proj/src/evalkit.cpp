#include "bif/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bif {

std::vector<std::uint8_t> topk(std::span<const double> importance, std::size_t k) {
    const std::size_t D = importance.size();
    if (k < 1 || k > D) throw InputError("topk: k out of range");
    std::vector<std::size_t> idx(D);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return importance[a] > importance[b];
    });
    std::vector<std::uint8_t> mask(D, 0);
    for (std::size_t i = 0; i < k; ++i) mask[idx[i]] = 1;
    return mask;
}

std::vector<std::size_t> importance_ranking(std::span<const double> importance) {
    std::vector<std::size_t> idx(importance.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return importance[a] > importance[b];
    });
    return idx;
}

double mcc(const ConfusionCounts& c) {
    const double num = static_cast<double>(c.tp) * c.tn -
                       static_cast<double>(c.fp) * c.fn;
    const double f1 = static_cast<double>(c.tp + c.fp);
    const double f2 = static_cast<double>(c.tp + c.fn);
    const double f3 = static_cast<double>(c.tn + c.fp);
    const double f4 = static_cast<double>(c.tn + c.fn);
    if (f1 == 0.0 || f2 == 0.0 || f3 == 0.0 || f4 == 0.0) return 0.0;
    return num / std::sqrt(f1 * f2 * f3 * f4);
}

ConfusionCounts count_selection(const SelectionMask& masks,
                                std::span<const std::uint8_t> truth) {
    if (masks.rows.size() != truth.size())
        throw ShapeError("count_selection: mask/truth size mismatch");
    ConfusionCounts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool sel = masks.rows[i] != 0;
        const bool rel = truth[i] != 0;
        if (sel && rel)
            ++c.tp;
        else if (sel && !rel)
            ++c.fp;
        else if (!sel && rel)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

double score_selection(const SelectionMask& masks,
                       std::span<const std::uint8_t> truth) {
    return mcc(count_selection(masks, truth));
}

SelectionMask topk_masks(std::span<const double> importance, std::size_t n,
                         std::size_t dim, std::size_t k,
                         std::span<const std::uint8_t> truth) {
    SelectionMask m;
    m.dim = dim;
    m.rows.resize(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t ki = k;
        if (ki == 0) {
            if (truth.empty()) throw InputError("topk_masks: k=0 requires truth masks");
            ki = 0;
            for (std::size_t j = 0; j < dim; ++j) ki += truth[i * dim + j] != 0;
        }
        auto row = topk({importance.data() + i * dim, dim}, ki);
        std::copy(row.begin(), row.end(), m.rows.begin() + i * dim);
    }
    return m;
}

double posthoc_accuracy(const FrozenModel& clf, const Dataset& data,
                        const SelectionMask& masks) {
    if (masks.dim != data.dim || masks.size() != data.size())
        throw ShapeError("posthoc_accuracy: mask shape mismatch");
    std::size_t hit = 0;
    std::vector<double> x(data.dim);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = data.row(i);
        const auto m = masks.row(i);
        for (std::size_t j = 0; j < data.dim; ++j) x[j] = m[j] ? r[j] : 0.0;
        const auto lg = forward(clf.net(), x);
        const auto it = std::max_element(lg.begin(), lg.end());
        if (static_cast<int>(it - lg.begin()) == data.labels[i]) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(data.size());
}

DivergenceReport divergence_report(const DirichletParams& a,
                                   const DirichletParams& b) {
    DivergenceReport r;
    r.kl_ab = kl_divergence(a, b);
    r.kl_ba = kl_divergence(b, a);
    r.mean_a = dirichlet_mean(a).f;
    r.mean_b = dirichlet_mean(b).f;
    r.rank_a = importance_ranking(r.mean_a);
    r.rank_b = importance_ranking(r.mean_b);
    for (std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{5}}) {
        const std::size_t kk = std::min(k, a.dim());
        const auto ma = topk(r.mean_a, kk);
        const auto mb = topk(r.mean_b, kk);
        std::size_t common = 0;
        for (std::size_t i = 0; i < ma.size(); ++i) common += ma[i] && mb[i];
        r.topk_overlap.push_back(static_cast<double>(common) /
                                 static_cast<double>(kk));
    }
    return r;
}

}  // namespace bif
