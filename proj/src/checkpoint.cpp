#include "bif/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace bif {

using nlohmann::ordered_json;

namespace {

ordered_json net_to_json(const DenseNet& net) {
    ordered_json layers = ordered_json::array();
    for (const auto& l : net.layers) {
        layers.push_back({{"in", l.in},
                          {"out", l.out},
                          {"activation", to_string(l.act)},
                          {"weights", l.w},
                          {"biases", l.b}});
    }
    return ordered_json{{"format", "bif-net"}, {"version", 1}, {"layers", layers}};
}

DenseNet net_from_json(const ordered_json& j) {
    if (j.value("format", "") != "bif-net" || j.value("version", 0) != 1)
        throw FormatError("unrecognized model checkpoint format");
    DenseNet net;
    for (const auto& lj : j.at("layers")) {
        Layer l;
        l.in = lj.at("in").get<std::size_t>();
        l.out = lj.at("out").get<std::size_t>();
        l.act = activation_from_string(lj.at("activation").get<std::string>());
        l.w = lj.at("weights").get<std::vector<double>>();
        l.b = lj.at("biases").get<std::vector<double>>();
        net.layers.push_back(std::move(l));
    }
    net.check_shapes();
    return net;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open for writing: " + path);
    f << text;
}

ordered_json read_json(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open: " + path);
    try {
        return ordered_json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

}  // namespace

std::string serialize_net(const DenseNet& net) { return net_to_json(net).dump(); }

DenseNet deserialize_net(const std::string& json_text) {
    try {
        return net_from_json(ordered_json::parse(json_text));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("model checkpoint: ") + e.what());
    }
}

void save_model(const FrozenModel& model, const std::string& path) {
    write_file(path, net_to_json(model.net()).dump(2) + "\n");
}

FrozenModel load_model(const std::string& path) {
    return FrozenModel(net_from_json(read_json(path)));
}

void save_importance(const ImportanceCheckpoint& ck, const std::string& path) {
    ordered_json j{{"format", "bif-importance"},
                   {"version", 1},
                   {"mode", ck.mode == BifMode::global ? "global" : "local"},
                   {"alpha0", ck.alpha0},
                   {"dataset_fingerprint", ck.dataset_fingerprint},
                   {"feature_groups", ck.feature_groups}};
    if (ck.mode == BifMode::global)
        j["alpha"] = ck.alpha;
    else
        j["network"] = net_to_json(ck.network);
    write_file(path, j.dump(2) + "\n");
}

ImportanceCheckpoint load_importance(const std::string& path) {
    const auto j = read_json(path);
    if (j.value("format", "") != "bif-importance" || j.value("version", 0) != 1)
        throw FormatError(path + ": unrecognized importance checkpoint format");
    ImportanceCheckpoint ck;
    ck.mode = j.at("mode").get<std::string>() == "global" ? BifMode::global
                                                          : BifMode::local;
    ck.alpha0 = j.value("alpha0", 0.0);
    ck.dataset_fingerprint = j.value("dataset_fingerprint", std::uint64_t{0});
    ck.feature_groups = j.value("feature_groups", std::vector<int>{});
    if (ck.mode == BifMode::global)
        ck.alpha = j.at("alpha").get<std::vector<double>>();
    else
        ck.network = net_from_json(j.at("network"));
    return ck;
}

}  // namespace bif
