#include "bif/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace bif {

void TabularSchema::validate() const {
    if (label.empty()) throw ConfigError("schema: label column required");
    for (const auto& d : drop)
        if (d == label) throw ConfigError("schema: label column listed in drop list");
    for (const auto& c : features) {
        if (c.name == label)
            throw ConfigError("schema: label column listed as feature");
        if (std::find(drop.begin(), drop.end(), c.name) != drop.end())
            throw ConfigError("schema: feature '" + c.name + "' is also dropped");
    }
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw ConfigError("schema: train_fraction out of (0,1]");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

Dataset load_csv(const std::string& path, const TabularSchema& schema) {
    schema.validate();
    std::ifstream f(path);
    if (!f) throw InputError("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) throw FormatError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);

    auto col_index = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw FormatError(path + ": missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };

    std::vector<ColumnSpec> cols = schema.features;
    if (cols.empty()) {
        for (const auto& h : header) {
            if (h == schema.label) continue;
            if (std::find(schema.drop.begin(), schema.drop.end(), h) !=
                schema.drop.end())
                continue;
            cols.push_back({h, false});
        }
    }
    const std::size_t label_idx = col_index(schema.label);
    std::vector<std::size_t> feat_idx;
    for (const auto& c : cols) feat_idx.push_back(col_index(c.name));

    std::vector<std::vector<std::string>> raw;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw FormatError(path + ": row " + std::to_string(lineno) +
                              " has " + std::to_string(cells.size()) +
                              " cells, expected " + std::to_string(header.size()));
        raw.push_back(std::move(cells));
    }

    Dataset d;
    d.dim = cols.size();
    for (const auto& c : cols) d.feature_names.push_back(c.name);
    d.features.resize(raw.size() * d.dim);
    d.labels.resize(raw.size());

    // Ordinal codes for categorical columns: sorted distinct values -> index.
    std::vector<std::map<std::string, double>> codes(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (!cols[j].categorical) continue;
        std::set<std::string> vals;
        for (const auto& r : raw) vals.insert(r[feat_idx[j]]);
        double code = 0.0;
        for (const auto& v : vals) codes[j][v] = code++;
    }
    // Label codes: integer if parseable, else sorted distinct strings.
    std::map<std::string, int> label_codes;
    {
        bool all_int = true;
        for (const auto& r : raw) {
            const auto& s = r[label_idx];
            if (s.empty() ||
                s.find_first_not_of("0123456789-") != std::string::npos) {
                all_int = false;
                break;
            }
        }
        if (!all_int) {
            std::set<std::string> vals;
            for (const auto& r : raw) vals.insert(r[label_idx]);
            int code = 0;
            for (const auto& v : vals) label_codes[v] = code++;
        }
    }

    for (std::size_t i = 0; i < raw.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const std::string& cell = raw[i][feat_idx[j]];
            double v;
            if (cols[j].categorical) {
                v = codes[j].at(cell);
            } else {
                try {
                    std::size_t pos = 0;
                    v = std::stod(cell, &pos);
                    if (pos != cell.size()) throw std::invalid_argument(cell);
                } catch (const std::exception&) {
                    throw FormatError(path + ": row " + std::to_string(i + 2) +
                                      ", column '" + cols[j].name +
                                      "': non-numeric value '" + cell + "'");
                }
            }
            d.features[i * d.dim + j] = v;
        }
        const std::string& lab = raw[i][label_idx];
        d.labels[i] = label_codes.empty() ? std::stoi(lab) : label_codes.at(lab);
    }

    d.train_count = static_cast<std::size_t>(
        static_cast<double>(d.size()) * schema.train_fraction);
    if (d.train_count == 0) d.train_count = d.size();

    // zero-mean shift from train-split statistics, applied to both splits
    for (std::size_t j = 0; j < d.dim; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < d.train_count; ++i)
            mean += d.features[i * d.dim + j];
        mean /= static_cast<double>(d.train_count);
        for (std::size_t i = 0; i < d.size(); ++i) d.features[i * d.dim + j] -= mean;
    }
    return d;
}

// --- IDX ----------------------------------------------------------------

namespace {

std::uint32_t read_be32(std::istream& s, const std::string& path) {
    unsigned char b[4];
    if (!s.read(reinterpret_cast<char*>(b), 4))
        throw FormatError(path + ": truncated IDX file");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& s, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    s.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

IdxImages read_idx_images(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open: " + path);
    if (read_be32(f, path) != 0x00000803u)
        throw FormatError(path + ": bad image magic number");
    IdxImages imgs;
    imgs.count = read_be32(f, path);
    imgs.rows = read_be32(f, path);
    imgs.cols = read_be32(f, path);
    imgs.pixels.resize(imgs.count * imgs.rows * imgs.cols);
    if (!f.read(reinterpret_cast<char*>(imgs.pixels.data()),
                static_cast<std::streamsize>(imgs.pixels.size())))
        throw FormatError(path + ": truncated pixel data");
    return imgs;
}

std::vector<std::uint8_t> read_idx_labels(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open: " + path);
    if (read_be32(f, path) != 0x00000801u)
        throw FormatError(path + ": bad label magic number");
    const std::uint32_t n = read_be32(f, path);
    std::vector<std::uint8_t> labels(n);
    if (!f.read(reinterpret_cast<char*>(labels.data()), n))
        throw FormatError(path + ": truncated label data");
    return labels;
}

void write_idx_images(const std::string& path, const IdxImages& imgs) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open for writing: " + path);
    write_be32(f, 0x00000803u);
    write_be32(f, static_cast<std::uint32_t>(imgs.count));
    write_be32(f, static_cast<std::uint32_t>(imgs.rows));
    write_be32(f, static_cast<std::uint32_t>(imgs.cols));
    f.write(reinterpret_cast<const char*>(imgs.pixels.data()),
            static_cast<std::streamsize>(imgs.pixels.size()));
}

void write_idx_labels(const std::string& path,
                      std::span<const std::uint8_t> labels) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open for writing: " + path);
    write_be32(f, 0x00000801u);
    write_be32(f, static_cast<std::uint32_t>(labels.size()));
    f.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

std::vector<int> PatchView::pixel_groups() const {
    std::vector<int> g(pixel_count());
    const std::size_t ppr = patches_per_row();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            g[r * cols + c] = static_cast<int>((r / patch) * ppr + (c / patch));
    return g;
}

std::vector<std::uint8_t> patch_expand(std::span<const std::uint8_t> patch_mask,
                                       const PatchView& view) {
    if (patch_mask.size() != view.patch_count())
        throw ShapeError("patch_expand: mask size does not match patch count");
    const auto groups = view.pixel_groups();
    std::vector<std::uint8_t> out(view.pixel_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = patch_mask[groups[i]];
    return out;
}

MnistData load_mnist(const std::string& image_path, const std::string& label_path,
                     const std::vector<int>& keep) {
    const auto imgs = read_idx_images(image_path);
    const auto labels = read_idx_labels(label_path);
    if (imgs.count != labels.size())
        throw FormatError("image/label counts differ");
    std::map<int, int> remap;
    for (std::size_t i = 0; i < keep.size(); ++i) remap[keep[i]] = static_cast<int>(i);

    MnistData m;
    m.view.rows = imgs.rows;
    m.view.cols = imgs.cols;
    m.data.dim = imgs.rows * imgs.cols;
    for (std::size_t i = 0; i < imgs.count; ++i) {
        const auto it = remap.find(labels[i]);
        if (it == remap.end()) continue;
        const std::uint8_t* px = imgs.pixels.data() + i * m.data.dim;
        for (std::size_t j = 0; j < m.data.dim; ++j)
            m.data.features.push_back(px[j] / 255.0);
        m.data.labels.push_back(it->second);
    }
    m.data.train_count = m.data.size();
    return m;
}

MnistData load_mnist_split(const std::string& train_images,
                           const std::string& train_labels,
                           const std::string& test_images,
                           const std::string& test_labels,
                           const std::vector<int>& keep) {
    MnistData tr = load_mnist(train_images, train_labels, keep);
    const MnistData te = load_mnist(test_images, test_labels, keep);
    tr.data.features.insert(tr.data.features.end(), te.data.features.begin(),
                            te.data.features.end());
    tr.data.labels.insert(tr.data.labels.end(), te.data.labels.begin(),
                          te.data.labels.end());
    // train_count already marks the boundary
    return tr;
}

// --- noisy training -----------------------------------------------------

FrozenModel noisy_train(const Dataset& train, const Arch& arch,
                        const TrainConfig& cfg, double clip_norm, double sigma) {
    cfg.validate();
    if (!(clip_norm > 0.0)) throw ConfigError("noisy_train: clip_norm must be > 0");
    if (sigma < 0.0) throw ConfigError("noisy_train: sigma must be >= 0");
    if (train.size() == 0) throw InputError("noisy_train: empty dataset");

    const int C = std::max(train.num_classes(), 2);
    Rng rng(cfg.seed);
    DenseNet net = make_net(train.dim, arch, C, rng);
    AdamState state = AdamState::init(net);

    const std::size_t n = train.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int e = 0; e < cfg.epochs; ++e) {
        for (std::size_t i = n; i-- > 1;)
            std::swap(order[i], order[rng.below(i + 1)]);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t bsz = std::min<std::size_t>(cfg.batch_size, n - start);
            const double scale = 1.0 / static_cast<double>(bsz);
            GradientSet sum = GradientSet::zeros_like(net);
            GradientSet g = GradientSet::zeros_like(net);
            std::vector<double> dlogits(C);
            for (std::size_t b = 0; b < bsz; ++b) {
                const std::size_t i = order[start + b];
                auto cache = forward_batch(net, train.row(i), 1);
                for (auto& l : g.layers) {
                    std::fill(l.dw.begin(), l.dw.end(), 0.0);
                    std::fill(l.db.begin(), l.db.end(), 0.0);
                }
                // scale folded in here so the sigma=0, huge-clip case adds the
                // exact same terms as the plain batch path
                cross_entropy_grad(cache.logits, train.labels[i], scale, dlogits);
                backprop(net, cache, dlogits, g);
                const double norm = g.l2_norm() / scale;  // true per-example norm
                const double factor = norm > clip_norm ? clip_norm / norm : 1.0;
                sum.axpy(factor, g);
            }
            if (sigma > 0.0) {
                const double sd = sigma * clip_norm * scale;
                for (auto& l : sum.layers) {
                    for (double& v : l.dw) v += sd * rng.normal();
                    for (double& v : l.db) v += sd * rng.normal();
                }
            }
            if (cfg.use_adam)
                adam_step(net, sum, cfg.learning_rate, cfg.adam, state);
            else
                sgd_step(net, sum, cfg.learning_rate);
        }
    }
    return FrozenModel(std::move(net));
}

}  // namespace bif
