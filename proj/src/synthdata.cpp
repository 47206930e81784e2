#include "bif/synthdata.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bif/rng.hpp"

namespace bif {

SynId syn_from_string(const std::string& s) {
    if (s == "syn1") return SynId::syn1;
    if (s == "syn2") return SynId::syn2;
    if (s == "syn3") return SynId::syn3;
    if (s == "syn4") return SynId::syn4;
    if (s == "syn5") return SynId::syn5;
    if (s == "syn6") return SynId::syn6;
    throw ConfigError("unknown synthetic dataset id: " + s);
}

std::string to_string(SynId id) {
    switch (id) {
        case SynId::syn1: return "syn1";
        case SynId::syn2: return "syn2";
        case SynId::syn3: return "syn3";
        case SynId::syn4: return "syn4";
        case SynId::syn5: return "syn5";
        case SynId::syn6: return "syn6";
    }
    return "syn1";
}

std::size_t syn_dim(SynId id) {
    switch (id) {
        case SynId::syn1:
        case SynId::syn2:
        case SynId::syn3:
            return 10;
        default:
            return 11;
    }
}

namespace {

double log_odds(SynId id, std::span<const double> x) {
    switch (id) {
        case SynId::syn1:
            return x[0] * x[1];
        case SynId::syn2:
            return x[2] * x[2] + x[3] * x[3] + x[4] * x[4] + x[5] * x[5] - 4.0;
        case SynId::syn3:
            return -100.0 * std::sin(2.0 * x[6]) + 2.0 * std::fabs(x[7]) + x[8] +
                   std::exp(-x[9]);
        case SynId::syn4:
            return x[10] < 0.0 ? log_odds(SynId::syn1, x) : log_odds(SynId::syn2, x);
        case SynId::syn5:
            return x[10] < 0.0 ? log_odds(SynId::syn1, x) : log_odds(SynId::syn3, x);
        case SynId::syn6:
            return x[10] < 0.0 ? log_odds(SynId::syn2, x) : log_odds(SynId::syn3, x);
    }
    return 0.0;
}

void branch_truth(SynId branch, std::uint8_t* m) {
    switch (branch) {
        case SynId::syn1:
            m[0] = m[1] = 1;
            break;
        case SynId::syn2:
            m[2] = m[3] = m[4] = m[5] = 1;
            break;
        default:
            m[6] = m[7] = m[8] = m[9] = 1;
            break;
    }
}

}  // namespace

double label_probability(SynId id, std::span<const double> x) {
    if (x.size() != syn_dim(id)) throw ShapeError("label_probability: bad dimension");
    // p(y=1) = 1/(1+r) with r = exp(log_odds)
    const double lr = log_odds(id, x);
    return 1.0 / (1.0 + std::exp(lr));
}

Dataset generate(const SynSpec& spec) {
    if (spec.n < 1) throw InputError("generate: n must be >= 1");
    const std::size_t D = syn_dim(spec.id);
    Dataset d;
    d.dim = D;
    d.features.resize(spec.n * D);
    d.labels.resize(spec.n);
    d.truth.assign(spec.n * D, 0);
    d.feature_names.resize(D);
    for (std::size_t j = 0; j < D; ++j)
        d.feature_names[j] = "x" + std::to_string(j + 1);

    Rng rng(spec.seed);
    for (std::size_t i = 0; i < spec.n; ++i) {
        double* x = d.features.data() + i * D;
        for (std::size_t j = 0; j < D; ++j) x[j] = rng.normal();
        const double p1 = label_probability(spec.id, {x, D});
        d.labels[i] = rng.uniform() < p1 ? 1 : 0;

        std::uint8_t* m = d.truth.data() + i * D;
        switch (spec.id) {
            case SynId::syn1:
            case SynId::syn2:
            case SynId::syn3:
                branch_truth(spec.id, m);
                break;
            case SynId::syn4:
                branch_truth(x[10] < 0.0 ? SynId::syn1 : SynId::syn2, m);
                break;
            case SynId::syn5:
                branch_truth(x[10] < 0.0 ? SynId::syn1 : SynId::syn3, m);
                break;
            case SynId::syn6:
                branch_truth(x[10] < 0.0 ? SynId::syn2 : SynId::syn3, m);
                break;
        }
        if (D == 11 && spec.switch_in_truth) m[10] = 1;
    }
    d.train_count = static_cast<std::size_t>(
        static_cast<double>(spec.n) * spec.train_fraction);
    return d;
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_dataset_csv(const Dataset& d, const std::string& features_path,
                       const std::string& truth_path) {
    std::ofstream f(features_path);
    if (!f) throw InputError("cannot open for writing: " + features_path);
    for (std::size_t j = 0; j < d.dim; ++j) {
        f << (d.feature_names.empty() ? "x" + std::to_string(j + 1)
                                      : d.feature_names[j])
          << ',';
    }
    f << "y\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto r = d.row(i);
        for (double v : r) f << fmt_double(v) << ',';
        f << d.labels[i] << '\n';
    }
    if (!truth_path.empty() && d.has_truth()) {
        std::ofstream t(truth_path);
        if (!t) throw InputError("cannot open for writing: " + truth_path);
        for (std::size_t j = 0; j < d.dim; ++j)
            t << 'm' << (j + 1) << (j + 1 < d.dim ? ',' : '\n');
        for (std::size_t i = 0; i < d.size(); ++i) {
            const auto r = d.truth_row(i);
            for (std::size_t j = 0; j < d.dim; ++j)
                t << int(r[j]) << (j + 1 < d.dim ? ',' : '\n');
        }
    }
}

Dataset read_dataset_csv(const std::string& features_path,
                         const std::string& truth_path, double train_fraction) {
    std::ifstream f(features_path);
    if (!f) throw InputError("cannot open: " + features_path);
    Dataset d;
    std::string line;
    if (!std::getline(f, line)) throw FormatError("empty csv: " + features_path);
    {
        std::stringstream hs(line);
        std::string col;
        while (std::getline(hs, col, ',')) d.feature_names.push_back(col);
        if (d.feature_names.empty() || d.feature_names.back() != "y")
            throw FormatError("expected trailing label column 'y'");
        d.feature_names.pop_back();
        d.dim = d.feature_names.size();
    }
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string cell;
        for (std::size_t j = 0; j <= d.dim; ++j) {
            if (!std::getline(ls, cell, ','))
                throw FormatError("row " + std::to_string(lineno) + ": too few columns");
            if (j < d.dim)
                d.features.push_back(std::stod(cell));
            else
                d.labels.push_back(std::stoi(cell));
        }
    }
    if (!truth_path.empty()) {
        std::ifstream t(truth_path);
        if (!t) throw InputError("cannot open: " + truth_path);
        std::getline(t, line);  // header
        while (std::getline(t, line)) {
            if (line.empty()) continue;
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ','))
                d.truth.push_back(static_cast<std::uint8_t>(std::stoi(cell)));
        }
        if (d.truth.size() != d.features.size())
            throw FormatError("truth mask size does not match dataset");
    }
    d.train_count = static_cast<std::size_t>(
        static_cast<double>(d.size()) * train_fraction);
    return d;
}

}  // namespace bif
