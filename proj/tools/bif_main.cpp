// bif: dataset generation, classifier training, importance fitting,
// evaluation and privacy/explainability trade-off runs, driven by JSON
// configs for reproducibility.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "bif/bif.hpp"
#include "bif/checkpoint.hpp"
#include "bif/dataset.hpp"
#include "bif/evalkit.hpp"
#include "bif/ingest.hpp"
#include "bif/nn.hpp"
#include "bif/svg.hpp"
#include "bif/synthdata.hpp"
#include "bif/tradeoff.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

int log_level() {
    const char* v = std::getenv("BIF_LOG");
    if (v == nullptr) return 1;
    const std::string s(v);
    if (s == "error") return 0;
    if (s == "debug") return 2;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "bif: " << msg << '\n';
}

void check_keys(const ordered_json& j, const std::set<std::string>& allowed,
                const std::string& where) {
    if (!j.is_object()) throw bif::ConfigError(where + ": expected an object");
    for (const auto& [k, v] : j.items()) {
        if (allowed.count(k) == 0)
            throw bif::ConfigError(where + ": unknown key '" + k + "'");
    }
}

ordered_json load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw bif::ConfigError("cannot open config: " + path);
    try {
        return ordered_json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw bif::ConfigError(std::string("config parse error: ") + e.what());
    }
}

struct LoadedData {
    bif::Dataset data;
    bif::PatchView view;
    bool has_patches = false;
};

LoadedData load_data(const ordered_json& j) {
    check_keys(j, {"kind", "id", "n", "seed", "train_fraction", "switch_in_truth",
                   "features", "truth", "path", "schema", "train_images",
                   "train_labels", "test_images", "test_labels", "keep"},
               "data");
    const std::string kind = j.at("kind").get<std::string>();
    LoadedData out;
    if (kind == "syn") {
        bif::SynSpec spec;
        spec.id = bif::syn_from_string(j.at("id").get<std::string>());
        spec.n = j.value("n", std::size_t{10000});
        spec.seed = j.value("seed", std::uint64_t{0});
        spec.train_fraction = j.value("train_fraction", 0.8);
        spec.switch_in_truth = j.value("switch_in_truth", true);
        out.data = bif::generate(spec);
    } else if (kind == "csv") {
        out.data = bif::read_dataset_csv(j.at("features").get<std::string>(),
                                         j.value("truth", std::string{}),
                                         j.value("train_fraction", 0.8));
    } else if (kind == "tabular") {
        const auto& sj = j.at("schema");
        check_keys(sj, {"label", "features", "drop", "categorical", "train_fraction"},
                   "data.schema");
        bif::TabularSchema schema;
        schema.label = sj.at("label").get<std::string>();
        schema.drop = sj.value("drop", std::vector<std::string>{});
        schema.train_fraction = sj.value("train_fraction", 0.8);
        const auto cats = sj.value("categorical", std::vector<std::string>{});
        for (const auto& name : sj.value("features", std::vector<std::string>{})) {
            bif::ColumnSpec c;
            c.name = name;
            c.categorical =
                std::find(cats.begin(), cats.end(), name) != cats.end();
            schema.features.push_back(c);
        }
        if (schema.features.empty() && !cats.empty())
            throw bif::ConfigError(
                "data.schema: categorical columns require an explicit feature list");
        out.data = bif::load_csv(j.at("path").get<std::string>(), schema);
    } else if (kind == "mnist") {
        auto m = bif::load_mnist_split(j.at("train_images").get<std::string>(),
                                       j.at("train_labels").get<std::string>(),
                                       j.at("test_images").get<std::string>(),
                                       j.at("test_labels").get<std::string>(),
                                       j.value("keep", std::vector<int>{3, 8}));
        out.data = std::move(m.data);
        out.view = m.view;
        out.has_patches = true;
    } else {
        throw bif::ConfigError("data.kind must be syn, csv, tabular or mnist");
    }
    return out;
}

bif::Arch parse_arch(const ordered_json& j) {
    check_keys(j, {"hidden", "activation"}, "arch");
    bif::Arch a;
    a.hidden = j.value("hidden", std::vector<std::size_t>{200, 200});
    a.act = bif::activation_from_string(j.value("activation", std::string{"relu"}));
    return a;
}

bif::TrainConfig parse_train(const ordered_json& j, std::uint64_t seed_override,
                             bool have_seed_override) {
    check_keys(j, {"epochs", "batch_size", "learning_rate", "optimizer", "seed",
                   "beta1", "beta2", "eps"},
               "train");
    bif::TrainConfig c;
    c.epochs = j.value("epochs", 500);
    c.batch_size = j.value("batch_size", 100);
    c.learning_rate = j.value("learning_rate", 1e-3);
    const std::string opt = j.value("optimizer", std::string{"adam"});
    if (opt == "adam")
        c.use_adam = true;
    else if (opt == "sgd")
        c.use_adam = false;
    else
        throw bif::ConfigError("train.optimizer must be adam or sgd");
    c.adam.beta1 = j.value("beta1", 0.9);
    c.adam.beta2 = j.value("beta2", 0.999);
    c.adam.eps = j.value("eps", 1e-8);
    c.seed = have_seed_override ? seed_override : j.value("seed", std::uint64_t{0});
    c.validate();
    return c;
}

bif::BifConfig parse_bif(const ordered_json& j, std::uint64_t seed_override,
                         bool have_seed_override) {
    check_keys(j, {"mode", "estimator", "mc_samples", "alpha0", "kl_weight",
                   "epochs", "batch_size", "learning_rate", "seed", "in_hidden",
                   "in_activation", "patch_groups"},
               "bif");
    bif::BifConfig c;
    const std::string mode = j.value("mode", std::string{"global"});
    if (mode == "global")
        c.mode = bif::BifMode::global;
    else if (mode == "local")
        c.mode = bif::BifMode::local;
    else
        throw bif::ConfigError("bif.mode must be global or local");
    const std::string est = j.value("estimator", std::string{"point_estimate"});
    if (est == "point_estimate")
        c.estimator = bif::Estimator::point_estimate;
    else if (est == "sampling")
        c.estimator = bif::Estimator::sampling;
    else
        throw bif::ConfigError("bif.estimator must be point_estimate or sampling");
    c.mc_samples = j.value("mc_samples", 1);
    c.alpha0 = j.value("alpha0", 0.1);
    c.kl_weight = j.value("kl_weight", 1.0);
    c.epochs = j.value("epochs", 10);
    c.batch_size = j.value("batch_size", 100);
    c.learning_rate = j.value("learning_rate", 0.01);
    c.seed = have_seed_override ? seed_override : j.value("seed", std::uint64_t{0});
    c.in_arch.hidden = j.value("in_hidden", std::vector<std::size_t>{100, 100});
    c.in_arch.act =
        bif::activation_from_string(j.value("in_activation", std::string{"relu"}));
    c.validate();
    return c;
}

struct OutputDir {
    fs::path dir;

    OutputDir(const std::string& out, bool force) : dir(out) {
        fs::create_directories(dir);
        if (fs::exists(dir / "manifest.json") && !force)
            throw bif::ConfigError(
                "output directory already holds a run manifest; pass --force to "
                "overwrite: " +
                (dir / "manifest.json").string());
    }

    std::string path(const std::string& name) const { return (dir / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw bif::InputError("cannot open for writing: " + path);
    f << text;
}

void write_manifest(const OutputDir& out, const std::string& command,
                    const ordered_json& config, std::uint64_t seed,
                    const std::vector<std::string>& artifacts) {
    ordered_json m{{"command", command},
                   {"config_hash", std::hash<std::string>{}(config.dump())},
                   {"seed", seed},
                   {"artifacts", artifacts}};
    write_text(out.path("manifest.json"), m.dump(2) + "\n");
}

// Per-instance mean importances on the given rows (n x G).
std::vector<double> local_importance_matrix(const bif::ImportanceNetwork& in_net,
                                            const bif::Dataset& data,
                                            std::size_t G) {
    std::vector<double> imp(data.size() * G);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto e = bif::explain(in_net, data.row(i));
        std::copy(e.mean.begin(), e.mean.end(), imp.begin() + i * G);
    }
    return imp;
}

// --- subcommands --------------------------------------------------------

int cmd_gen(const ordered_json& cfg, const OutputDir& out,
            std::uint64_t seed_override, bool have_seed) {
    check_keys(cfg, {"dataset", "n", "seed", "train_fraction", "switch_in_truth"},
               "config");
    bif::SynSpec spec;
    spec.id = bif::syn_from_string(cfg.at("dataset").get<std::string>());
    spec.n = cfg.value("n", std::size_t{10000});
    spec.seed = have_seed ? seed_override : cfg.value("seed", std::uint64_t{0});
    spec.train_fraction = cfg.value("train_fraction", 0.8);
    spec.switch_in_truth = cfg.value("switch_in_truth", true);
    const auto data = bif::generate(spec);
    bif::write_dataset_csv(data, out.path("features.csv"), out.path("truth.csv"));
    log_info("wrote " + std::to_string(data.size()) + " rows of " +
             bif::to_string(spec.id));
    write_manifest(out, "gen", cfg, spec.seed, {"features.csv", "truth.csv"});
    return 0;
}

int cmd_train(const ordered_json& cfg, const OutputDir& out,
              std::uint64_t seed_override, bool have_seed) {
    check_keys(cfg, {"data", "arch", "train", "noise"}, "config");
    const auto loaded = load_data(cfg.at("data"));
    const auto arch = parse_arch(cfg.value("arch", ordered_json::object()));
    const auto tc = parse_train(cfg.value("train", ordered_json::object()),
                                seed_override, have_seed);
    bif::FrozenModel model = [&] {
        if (cfg.contains("noise")) {
            const auto& nj = cfg.at("noise");
            check_keys(nj, {"sigma", "clip_norm"}, "noise");
            return bif::noisy_train(loaded.data.train_split(), arch, tc,
                                    nj.value("clip_norm", 1.0),
                                    nj.value("sigma", 0.0));
        }
        return bif::train_classifier(loaded.data.train_split(), arch, tc);
    }();
    bif::save_model(model, out.path("model.json"));
    const double train_acc = bif::accuracy(model, loaded.data.train_split());
    const double test_acc = loaded.data.test_count() > 0
                                ? bif::accuracy(model, loaded.data.test_split())
                                : train_acc;
    ordered_json rep{{"train_accuracy", train_acc}, {"test_accuracy", test_acc}};
    write_text(out.path("train_report.json"), rep.dump(2) + "\n");
    log_info("train accuracy " + std::to_string(train_acc) + ", test accuracy " +
             std::to_string(test_acc));
    write_manifest(out, "train", cfg, tc.seed,
                   {"model.json", "train_report.json"});
    return 0;
}

int cmd_explain(const ordered_json& cfg, const OutputDir& out,
                std::uint64_t seed_override, bool have_seed) {
    check_keys(cfg, {"data", "model", "bif"}, "config");
    const auto loaded = load_data(cfg.at("data"));
    const auto model = bif::load_model(cfg.at("model").get<std::string>());
    auto bc = parse_bif(cfg.value("bif", ordered_json::object()), seed_override,
                        have_seed);
    const bool patch_groups =
        cfg.value("bif", ordered_json::object()).value("patch_groups", false);
    if (patch_groups) {
        if (!loaded.has_patches)
            throw bif::ConfigError("bif.patch_groups requires mnist data");
        bc.feature_groups = loaded.view.pixel_groups();
    }

    bif::ImportanceCheckpoint ck;
    ck.mode = bc.mode;
    ck.alpha0 = bc.alpha0;
    ck.dataset_fingerprint = bif::dataset_fingerprint(loaded.data);
    ck.feature_groups = bc.feature_groups;

    std::vector<double> mean, sd;
    if (bc.mode == bif::BifMode::global) {
        const auto alpha = bif::fit_global(model, loaded.data, bc);
        ck.alpha = alpha.alpha;
        const auto e = bif::explain(alpha);
        mean = e.mean;
        sd = e.stddev;
    } else {
        const auto in_net = bif::fit_local(model, loaded.data, bc);
        ck.network = in_net.net;
        // chart shows the average posterior over the test split
        const auto eval = loaded.data.test_count() > 0 ? loaded.data.test_split()
                                                       : loaded.data;
        const std::size_t G = bc.group_count(loaded.data.dim);
        mean.assign(G, 0.0);
        sd.assign(G, 0.0);
        for (std::size_t i = 0; i < eval.size(); ++i) {
            const auto e = bif::explain(in_net, eval.row(i));
            for (std::size_t k = 0; k < G; ++k) {
                mean[k] += e.mean[k] / static_cast<double>(eval.size());
                sd[k] += e.stddev[k] / static_cast<double>(eval.size());
            }
        }
    }
    bif::save_importance(ck, out.path("importance.json"));

    bif::BarChartSpec chart;
    chart.title = bc.mode == bif::BifMode::global ? "global importance"
                                                  : "mean local importance";
    chart.values = mean;
    chart.whiskers = sd;
    for (std::size_t i = 0; i < mean.size(); ++i)
        chart.labels.push_back(std::to_string(i + 1));
    write_text(out.path("importance.svg"), bif::svg_bar_chart(chart));
    write_manifest(out, "explain", cfg, bc.seed,
                   {"importance.json", "importance.svg"});
    return 0;
}

int cmd_eval(const ordered_json& cfg, const OutputDir& out,
             std::uint64_t seed_override, bool have_seed) {
    (void)seed_override;
    (void)have_seed;
    check_keys(cfg, {"data", "model", "importance", "k", "metrics"}, "config");
    const auto loaded = load_data(cfg.at("data"));
    const auto ck = bif::load_importance(cfg.at("importance").get<std::string>());
    const std::size_t k = cfg.value("k", std::size_t{0});
    const auto metrics =
        cfg.value("metrics", std::vector<std::string>{"mcc"});

    const bif::Dataset eval = loaded.data.test_count() > 0
                                  ? loaded.data.test_split()
                                  : loaded.data;
    const std::size_t G = ck.feature_groups.empty()
                              ? loaded.data.dim
                              : 1 + *std::max_element(ck.feature_groups.begin(),
                                                      ck.feature_groups.end());

    // importance matrix, one row per evaluated instance
    std::vector<double> imp;
    if (ck.mode == bif::BifMode::global) {
        const bif::DirichletParams alpha(ck.alpha);
        const auto m = bif::dirichlet_mean(alpha).f;
        imp.resize(eval.size() * G);
        for (std::size_t i = 0; i < eval.size(); ++i)
            std::copy(m.begin(), m.end(), imp.begin() + i * G);
    } else {
        imp = local_importance_matrix(bif::ImportanceNetwork{ck.network}, eval, G);
    }

    const auto masks = bif::topk_masks(imp, eval.size(), G, k,
                                       k == 0 ? eval.truth : std::span<const std::uint8_t>{});

    ordered_json rep;
    rep["k"] = k;
    rep["mode"] = ck.mode == bif::BifMode::global ? "global" : "local";
    std::string csv = "metric,value\n";
    for (const auto& metric : metrics) {
        if (metric == "mcc") {
            if (!eval.has_truth())
                throw bif::ConfigError("mcc metric requires ground-truth masks");
            const double v = bif::score_selection(masks, eval.truth);
            rep["mcc"] = v;
            csv += "mcc," + std::to_string(v) + "\n";
        } else if (metric == "posthoc") {
            const auto model = bif::load_model(cfg.at("model").get<std::string>());
            bif::SelectionMask pixel_masks = masks;
            if (!ck.feature_groups.empty()) {
                // expand patch selections to pixel selections
                pixel_masks.dim = loaded.data.dim;
                pixel_masks.rows.assign(eval.size() * loaded.data.dim, 0);
                for (std::size_t i = 0; i < eval.size(); ++i) {
                    const auto px = bif::patch_expand(masks.row(i), loaded.view);
                    std::copy(px.begin(), px.end(),
                              pixel_masks.rows.begin() + i * loaded.data.dim);
                }
            }
            const double v = bif::posthoc_accuracy(model, eval, pixel_masks);
            rep["posthoc_accuracy"] = v;
            csv += "posthoc_accuracy," + std::to_string(v) + "\n";
        } else {
            throw bif::ConfigError("unknown metric '" + metric + "'");
        }
    }
    write_text(out.path("report.json"), rep.dump(2) + "\n");
    write_text(out.path("report.csv"), csv);
    write_manifest(out, "eval", cfg, 0, {"report.json", "report.csv"});
    return 0;
}

int cmd_tradeoff(const ordered_json& cfg, const OutputDir& out,
                 std::uint64_t seed_override, bool have_seed) {
    check_keys(cfg, {"data", "arch", "train", "bif", "sigma_grid", "clip_norm"},
               "config");
    const auto loaded = load_data(cfg.at("data"));
    bif::TradeoffConfig tc;
    tc.arch = parse_arch(cfg.value("arch", ordered_json::object()));
    tc.train = parse_train(cfg.value("train", ordered_json::object()),
                           seed_override, have_seed);
    tc.bif = parse_bif(cfg.value("bif", ordered_json::object()), seed_override,
                       have_seed);
    if (!cfg.value("bif", ordered_json::object()).contains("alpha0"))
        tc.bif.alpha0 = 0.01;
    tc.clip_norm = cfg.value("clip_norm", 1.0);
    const auto grid = cfg.at("sigma_grid").get<std::vector<double>>();

    const auto run = bif::run_tradeoff(loaded.data, tc, grid);

    ordered_json pts = ordered_json::array();
    std::string csv = "sigma,test_accuracy,kl_vs_baseline,kl_baseline_vs\n";
    bif::LineChartSpec chart;
    chart.title = "accuracy and importance divergence vs noise";
    chart.x_label = "sigma";
    bif::LineSeries acc{"accuracy", {}, {}};
    bif::LineSeries kl{"KL vs baseline", {}, {}};
    for (const auto& p : run.points) {
        pts.push_back({{"sigma", p.sigma},
                       {"test_accuracy", p.test_accuracy},
                       {"kl_vs_baseline", p.kl_vs_baseline},
                       {"kl_baseline_vs", p.kl_baseline_vs},
                       {"alpha", p.alpha}});
        csv += std::to_string(p.sigma) + "," + std::to_string(p.test_accuracy) +
               "," + std::to_string(p.kl_vs_baseline) + "," +
               std::to_string(p.kl_baseline_vs) + "\n";
        acc.x.push_back(p.sigma);
        acc.y.push_back(p.test_accuracy);
        kl.x.push_back(p.sigma);
        kl.y.push_back(p.kl_vs_baseline);
    }
    chart.series = {acc, kl};
    const auto stability = bif::top_feature_stability(run, 2);
    ordered_json rep{{"points", pts}, {"top2_stability", stability}};
    write_text(out.path("tradeoff.json"), rep.dump(2) + "\n");
    write_text(out.path("tradeoff.csv"), csv);
    write_text(out.path("tradeoff.svg"), bif::svg_line_chart(chart));
    write_manifest(out, "tradeoff", cfg, tc.train.seed,
                   {"tradeoff.json", "tradeoff.csv", "tradeoff.svg"});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BIF: Dirichlet feature-importance toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::uint64_t seed = 0;
    bool force = false;
    int jobs = 1;
    bool have_seed = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "override config seed")
            ->each([&](const std::string&) { have_seed = true; });
        sub->add_flag("--force", force, "overwrite an existing run manifest");
        sub->add_option("--jobs", jobs, "parallel jobs (reserved)");
    };

    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    auto* train = app.add_subcommand("train", "train (optionally noisy) classifier");
    auto* explain = app.add_subcommand("explain", "fit global or local importance");
    auto* eval = app.add_subcommand("eval", "score selections against truth or post-hoc");
    auto* tradeoff = app.add_subcommand("tradeoff", "noise grid trade-off run");
    for (auto* s : {gen, train, explain, eval, tradeoff}) add_common(s);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = load_config(config_path);
        const OutputDir out(out_dir, force);
        if (gen->parsed()) return cmd_gen(cfg, out, seed, have_seed);
        if (train->parsed()) return cmd_train(cfg, out, seed, have_seed);
        if (explain->parsed()) return cmd_explain(cfg, out, seed, have_seed);
        if (eval->parsed()) return cmd_eval(cfg, out, seed, have_seed);
        if (tradeoff->parsed()) return cmd_tradeoff(cfg, out, seed, have_seed);
    } catch (const bif::ConfigError& e) {
        std::cerr << ordered_json{{"error", e.what()}, {"kind", "config"}}.dump()
                  << '\n';
        return 2;
    } catch (const bif::FormatError& e) {
        std::cerr << ordered_json{{"error", e.what()}, {"kind", "format"}}.dump()
                  << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << ordered_json{{"error", e.what()}, {"kind", "runtime"}}.dump()
                  << '\n';
        return 1;
    }
    return 0;
}
