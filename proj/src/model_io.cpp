#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fsvr/errors.hpp"
#include "fsvr/hash.hpp"
#include "fsvr/pipeline.hpp"

namespace fsvr {

namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "fsvr-model";
constexpr int kFormatVersion = 1;

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& text) {
    if (text.size() != 18 || text.compare(0, 2, "0x") != 0)
        throw DataError("model file: bad fingerprint '" + text + "'");
    std::uint64_t v = 0;
    for (std::size_t i = 2; i < text.size(); ++i) {
        const char c = text[i];
        v <<= 4;
        if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
        else throw DataError("model file: bad fingerprint '" + text + "'");
    }
    return v;
}

json config_to_json(const PipelineConfig& config) {
    json j;
    j["som"] = {{"rows", config.som.rows},
                {"cols", config.som.cols},
                {"topology", topology_name(config.som.topology)},
                {"epochs", config.som.epochs},
                {"lr_initial", config.som.lr_initial},
                {"lr_final", config.som.lr_final},
                {"radius_initial", config.som.radius_initial},
                {"radius_final", config.som.radius_final},
                {"seed", config.som.seed}};
    j["svr"] = {{"c", config.svr.c},
                {"epsilon", config.svr.epsilon},
                {"sigma", config.svr.sigma},
                {"tolerance", config.svr.tolerance},
                {"max_passes", config.svr.max_passes}};
    if (config.refine)
        j["refine"] = {{"learning_rate", config.refine->learning_rate},
                       {"epochs", config.refine->epochs},
                       {"min_width", config.refine->min_width}};
    else
        j["refine"] = nullptr;
    j["n_test"] = config.n_test;
    j["min_cluster_size"] = config.min_cluster_size;
    j["seed"] = config.seed;
    return j;
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig config;
    const json& som = j.at("som");
    config.som.rows = som.at("rows").get<std::size_t>();
    config.som.cols = som.at("cols").get<std::size_t>();
    config.som.topology = topology_from_name(som.at("topology").get<std::string>());
    config.som.epochs = som.at("epochs").get<std::size_t>();
    config.som.lr_initial = som.at("lr_initial").get<double>();
    config.som.lr_final = som.at("lr_final").get<double>();
    config.som.radius_initial = som.at("radius_initial").get<double>();
    config.som.radius_final = som.at("radius_final").get<double>();
    config.som.seed = som.at("seed").get<std::uint64_t>();
    const json& svr = j.at("svr");
    config.svr.c = svr.at("c").get<double>();
    config.svr.epsilon = svr.at("epsilon").get<double>();
    config.svr.sigma = svr.at("sigma").get<double>();
    config.svr.tolerance = svr.at("tolerance").get<double>();
    config.svr.max_passes = svr.at("max_passes").get<std::size_t>();
    if (!j.at("refine").is_null()) {
        RefineConfig refine;
        refine.learning_rate = j["refine"].at("learning_rate").get<double>();
        refine.epochs = j["refine"].at("epochs").get<std::size_t>();
        refine.min_width = j["refine"].at("min_width").get<double>();
        config.refine = refine;
    }
    config.n_test = j.at("n_test").get<std::size_t>();
    config.min_cluster_size = j.at("min_cluster_size").get<std::size_t>();
    config.seed = j.at("seed").get<std::uint64_t>();
    return config;
}

json ruleset_to_json(const RuleSet& ruleset) {
    json j;
    j["offset"] = ruleset.offset;
    j["mode"] = ruleset.mode == InferenceMode::Normalized ? "normalized" : "additive";
    j["trivial"] = ruleset.trivial;
    json rules = json::array();
    for (const FuzzyRule& rule : ruleset.rules)
        rules.push_back({{"centers", rule.centers},
                         {"widths", rule.widths},
                         {"consequent", rule.consequent}});
    j["rules"] = std::move(rules);
    return j;
}

RuleSet ruleset_from_json(const json& j) {
    RuleSet ruleset;
    ruleset.offset = j.at("offset").get<double>();
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "normalized") ruleset.mode = InferenceMode::Normalized;
    else if (mode == "additive") ruleset.mode = InferenceMode::Additive;
    else throw DataError("model file: unknown inference mode '" + mode + "'");
    ruleset.trivial = j.at("trivial").get<bool>();
    for (const json& r : j.at("rules")) {
        FuzzyRule rule;
        rule.centers = r.at("centers").get<std::vector<double>>();
        rule.widths = r.at("widths").get<std::vector<double>>();
        rule.consequent = r.at("consequent").get<double>();
        if (rule.centers.size() != rule.widths.size())
            throw DataError("model file: rule with mismatched centers/widths");
        for (double w : rule.widths)
            if (!(w > 0.0)) throw DataError("model file: rule width must be > 0");
        ruleset.rules.push_back(std::move(rule));
    }
    if (!ruleset.trivial && ruleset.rules.empty())
        throw DataError("model file: non-trivial ruleset with no rules");
    return ruleset;
}

// Everything that determines predictions: scaling, map, rules, routing.
json state_to_json(const TwoStageModel& model) {
    json j;
    j["scaling"] = {{"mean", model.scaling.mean}, {"stddev", model.scaling.stddev}};
    j["som"] = {{"rows", model.map.config.rows},
                {"cols", model.map.config.cols},
                {"topology", topology_name(model.map.config.topology)},
                {"dim", model.map.dim},
                {"trained", model.map.trained},
                {"nodes", model.map.nodes}};
    json rulesets = json::object();
    for (const auto& [node, ruleset] : model.rulesets)
        rulesets[std::to_string(node)] = ruleset_to_json(ruleset);
    j["rulesets"] = std::move(rulesets);
    json fallback = json::object();
    for (const auto& [node, owner] : model.fallback) fallback[std::to_string(node)] = owner;
    j["fallback"] = std::move(fallback);
    return j;
}

std::size_t parse_node_key(const std::string& key) {
    if (key.empty()) throw DataError("model file: empty node index");
    std::size_t node = 0;
    for (char c : key) {
        if (c < '0' || c > '9') throw DataError("model file: bad node index '" + key + "'");
        node = node * 10 + static_cast<std::size_t>(c - '0');
    }
    return node;
}

}  // namespace

std::uint64_t state_fingerprint(const TwoStageModel& model) {
    return fnv1a64(state_to_json(model).dump());
}

std::uint64_t model_fingerprint(const TwoStageModel& model) {
    json j;
    j["state"] = state_to_json(model);
    j["config"] = config_to_json(model.config);
    j["dataset_fingerprint"] = hex64(model.provenance.dataset_fingerprint);
    return fnv1a64(j.dump());
}

std::string save_model(const TwoStageModel& model) {
    json j;
    j["format"] = kFormatTag;
    j["format_version"] = kFormatVersion;
    j["state"] = state_to_json(model);
    j["config"] = config_to_json(model.config);
    j["provenance"] = {{"dataset_fingerprint", hex64(model.provenance.dataset_fingerprint)},
                       {"timestamp", model.provenance.timestamp}};
    return j.dump(2) + "\n";
}

void save_model_file(const TwoStageModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    const std::string text = save_model(model);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DataError("failed writing model to '" + path + "'");
}

TwoStageModel load_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file is corrupted: ") + e.what());
    }
    try {
        if (!j.is_object() || j.value("format", "") != kFormatTag)
            throw DataError("not a model file (missing format tag '" + std::string(kFormatTag) +
                            "')");
        const int version = j.at("format_version").get<int>();
        if (version != kFormatVersion)
            throw DataError("model format version " + std::to_string(version) +
                            " is not supported; this build reads version " +
                            std::to_string(kFormatVersion));

        TwoStageModel model;
        const json& state = j.at("state");
        const json& scaling = state.at("scaling");
        const auto mean = scaling.at("mean").get<std::vector<double>>();
        const auto stddev = scaling.at("stddev").get<std::vector<double>>();
        if (mean.size() != kInputDim || stddev.size() != kInputDim)
            throw DataError("model file: scaling must cover " + std::to_string(kInputDim) +
                            " dimensions");
        std::copy(mean.begin(), mean.end(), model.scaling.mean.begin());
        std::copy(stddev.begin(), stddev.end(), model.scaling.stddev.begin());
        for (double sd : model.scaling.stddev)
            if (!(sd > 0.0)) throw DataError("model file: scaling stddev must be > 0");

        model.config = config_from_json(j.at("config"));
        const json& som = state.at("som");
        model.map.config = model.config.som;
        model.map.config.rows = som.at("rows").get<std::size_t>();
        model.map.config.cols = som.at("cols").get<std::size_t>();
        model.map.config.topology = topology_from_name(som.at("topology").get<std::string>());
        model.map.dim = som.at("dim").get<std::size_t>();
        model.map.trained = som.at("trained").get<bool>();
        model.map.nodes = som.at("nodes").get<std::vector<std::vector<double>>>();
        if (model.map.dim != kInputDim)
            throw DataError("model file: map dimension must be " + std::to_string(kInputDim));
        if (model.map.nodes.size() != model.map.node_count())
            throw DataError("model file: node count does not match the grid shape");
        for (const auto& node : model.map.nodes)
            if (node.size() != model.map.dim)
                throw DataError("model file: reference vector with wrong dimension");

        for (const auto& [key, value] : state.at("rulesets").items())
            model.rulesets.emplace(parse_node_key(key), ruleset_from_json(value));
        if (model.rulesets.empty()) throw DataError("model file: no rule sets");
        for (const auto& [key, value] : state.at("fallback").items()) {
            const std::size_t node = parse_node_key(key);
            const std::size_t owner = value.get<std::size_t>();
            if (!model.rulesets.count(owner))
                throw DataError("model file: fallback for node " + std::to_string(node) +
                                " points at node " + std::to_string(owner) + " which has no rules");
            model.fallback.emplace(node, owner);
        }
        for (std::size_t node = 0; node < model.map.node_count(); ++node)
            if (!model.rulesets.count(node) && !model.fallback.count(node))
                throw DataError("model file: node " + std::to_string(node) +
                                " has neither rules nor a fallback");

        const json& provenance = j.at("provenance");
        model.provenance.dataset_fingerprint =
            parse_hex64(provenance.at("dataset_fingerprint").get<std::string>());
        model.provenance.timestamp = provenance.at("timestamp").get<std::string>();
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model file is corrupted: ") + e.what());
    }
}

TwoStageModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_model(buffer.str());
}

}  // namespace fsvr
