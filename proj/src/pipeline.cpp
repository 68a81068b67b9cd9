#include "fsvr/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <sstream>

#include "fsvr/errors.hpp"
#include "fsvr/rng.hpp"

namespace fsvr {

namespace {

constexpr std::uint64_t kMapSeedSalt = 0x50;

std::string trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

double parse_double_value(const std::string& key, const std::string& text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        throw FormatError("config: bad numeric value '" + text + "' for " + key);
    return v;
}

std::uint64_t parse_u64_value(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw FormatError("config: bad integer value '" + text + "' for " + key);
    return v;
}

std::size_t parse_count_value(const std::string& key, const std::string& text) {
    return static_cast<std::size_t>(parse_u64_value(key, text));
}

bool parse_bool_value(const std::string& key, const std::string& text) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw FormatError("config: bad boolean value '" + text + "' for " + key + " (use true/false)");
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

// Standardization parameters that tolerate flat dimensions: a
// zero-variance input keeps stddev 1 so degenerate series still train
// end to end (the strict fit_scaling stays strict for direct callers).
Scaling lenient_scaling(const FeatureDataset& dataset) {
    const double n = static_cast<double>(dataset.size());
    Scaling s;
    for (std::size_t d = 0; d < kInputDim; ++d) {
        double sum = 0.0;
        for (const auto& r : dataset.records) sum += r.x[d];
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& r : dataset.records) {
            const double diff = r.x[d] - mean;
            ss += diff * diff;
        }
        const double var = dataset.size() > 1 ? ss / (n - 1.0) : 0.0;
        s.mean[d] = mean;
        s.stddev[d] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
}

std::vector<double> scale_input(const Scaling& scaling, const std::vector<double>& x_raw) {
    if (x_raw.size() != kInputDim)
        throw ParamError("predict: expected " + std::to_string(kInputDim) +
                         " inputs, got " + std::to_string(x_raw.size()));
    std::vector<double> x(kInputDim);
    for (std::size_t d = 0; d < kInputDim; ++d)
        x[d] = (x_raw[d] - scaling.mean[d]) / scaling.stddev[d];
    return x;
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig config;
    bool refine_param_seen = false;
    std::optional<bool> refine_enabled;
    RefineConfig refine;

    std::istringstream in(text);
    std::string raw_line;
    std::size_t line_no = 0;
    while (std::getline(in, raw_line)) {
        ++line_no;
        std::string line = raw_line;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + trim(raw_line) + "'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty() || value.empty())
            throw FormatError("config line " + std::to_string(line_no) +
                              ": empty key or value in '" + trim(raw_line) + "'");

        if (key == "som.rows") config.som.rows = parse_count_value(key, value);
        else if (key == "som.cols") config.som.cols = parse_count_value(key, value);
        else if (key == "som.topology") config.som.topology = topology_from_name(value);
        else if (key == "som.epochs") config.som.epochs = parse_count_value(key, value);
        else if (key == "som.lr_initial") config.som.lr_initial = parse_double_value(key, value);
        else if (key == "som.lr_final") config.som.lr_final = parse_double_value(key, value);
        else if (key == "som.radius_initial") config.som.radius_initial = parse_double_value(key, value);
        else if (key == "som.radius_final") config.som.radius_final = parse_double_value(key, value);
        else if (key == "som.seed") config.som.seed = parse_u64_value(key, value);
        else if (key == "svr.c") config.svr.c = parse_double_value(key, value);
        else if (key == "svr.epsilon") config.svr.epsilon = parse_double_value(key, value);
        else if (key == "svr.sigma") config.svr.sigma = parse_double_value(key, value);
        else if (key == "svr.tolerance") config.svr.tolerance = parse_double_value(key, value);
        else if (key == "svr.max_passes") config.svr.max_passes = parse_count_value(key, value);
        else if (key == "refine.enabled") refine_enabled = parse_bool_value(key, value);
        else if (key == "refine.learning_rate") {
            refine.learning_rate = parse_double_value(key, value);
            refine_param_seen = true;
        } else if (key == "refine.epochs") {
            refine.epochs = parse_count_value(key, value);
            refine_param_seen = true;
        } else if (key == "refine.min_width") {
            refine.min_width = parse_double_value(key, value);
            refine_param_seen = true;
        } else if (key == "n_test") config.n_test = parse_count_value(key, value);
        else if (key == "min_cluster_size") config.min_cluster_size = parse_count_value(key, value);
        else if (key == "seed") config.seed = parse_u64_value(key, value);
        else throw FormatError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }

    if (refine_enabled.value_or(refine_param_seen)) config.refine = refine;
    if (config.n_test == 0) throw FormatError("config: n_test must be > 0");
    if (config.min_cluster_size < 2) throw FormatError("config: min_cluster_size must be >= 2");
    return config;
}

std::string config_to_text(const PipelineConfig& config) {
    std::string out;
    auto kv = [&out](const std::string& key, const std::string& value) {
        out += key + " = " + value + "\n";
    };
    kv("som.rows", std::to_string(config.som.rows));
    kv("som.cols", std::to_string(config.som.cols));
    kv("som.topology", topology_name(config.som.topology));
    kv("som.epochs", std::to_string(config.som.epochs));
    kv("som.lr_initial", format_double(config.som.lr_initial));
    kv("som.lr_final", format_double(config.som.lr_final));
    kv("som.radius_initial", format_double(config.som.radius_initial));
    kv("som.radius_final", format_double(config.som.radius_final));
    kv("som.seed", std::to_string(config.som.seed));
    kv("svr.c", format_double(config.svr.c));
    kv("svr.epsilon", format_double(config.svr.epsilon));
    kv("svr.sigma", format_double(config.svr.sigma));
    kv("svr.tolerance", format_double(config.svr.tolerance));
    kv("svr.max_passes", std::to_string(config.svr.max_passes));
    kv("refine.enabled", config.refine ? "true" : "false");
    if (config.refine) {
        kv("refine.learning_rate", format_double(config.refine->learning_rate));
        kv("refine.epochs", std::to_string(config.refine->epochs));
        kv("refine.min_width", format_double(config.refine->min_width));
    }
    kv("n_test", std::to_string(config.n_test));
    kv("min_cluster_size", std::to_string(config.min_cluster_size));
    kv("seed", std::to_string(config.seed));
    return out;
}

TrainDetail train_stages_detailed(const FeatureDataset& train, const PipelineConfig& config) {
    if (train.empty()) throw DataError("train_stages: empty training dataset");
    if (config.min_cluster_size < 2) throw ParamError("train_stages: min_cluster_size must be >= 2");
    if (train.scaling)
        throw ParamError("train_stages: expected unscaled features (scaling is fitted here)");

    TrainDetail detail;
    TwoStageModel& model = detail.model;
    model.config = config;
    model.scaling = lenient_scaling(train);
    const FeatureDataset scaled = apply_scaling(train, model.scaling);
    const std::vector<std::vector<double>> rows = input_rows(scaled);
    const std::vector<double> targets = target_column(scaled);

    SomConfig som_config = config.som;
    som_config.seed = Rng::mix(config.seed, Rng::mix(config.som.seed, kMapSeedSalt));
    model.map = train_som(init_map(som_config, kInputDim, rows), rows);
    detail.partition = partition_data(model.map, rows);

    for (std::size_t node = 0; node < model.map.node_count(); ++node) {
        const std::vector<std::size_t>& members = detail.partition.clusters[node];
        if (members.size() < config.min_cluster_size) continue;
        std::vector<std::vector<double>> cluster_rows;
        std::vector<double> cluster_targets;
        cluster_rows.reserve(members.size());
        cluster_targets.reserve(members.size());
        for (std::size_t idx : members) {
            cluster_rows.push_back(rows[idx]);
            cluster_targets.push_back(targets[idx]);
        }
        SvrModel svr;
        try {
            svr = train_svr(config.svr, cluster_rows, cluster_targets);
        } catch (const TrainingError& e) {
            throw TrainingError("cluster " + std::to_string(node) + " (" +
                                    std::to_string(members.size()) + " records): " + e.what(),
                                e.best_kkt_violation);
        }
        RuleSet ruleset = extract_rules(svr);
        if (config.refine && !ruleset.trivial) {
            const RefineResult refined =
                refine_rules(ruleset, cluster_rows, cluster_targets, *config.refine);
            ruleset = refined.ruleset;
            detail.refine_diverged[node] = refined.diverged;
        }
        model.rulesets.emplace(node, std::move(ruleset));
        detail.svr_models.emplace(node, std::move(svr));
    }

    if (model.rulesets.empty()) {
        std::string sizes;
        for (const auto& cluster : detail.partition.clusters) {
            if (!sizes.empty()) sizes += ",";
            sizes += std::to_string(cluster.size());
        }
        throw TrainingError("no cluster reached min_cluster_size=" +
                            std::to_string(config.min_cluster_size) + " (cluster sizes: " + sizes +
                            ")");
    }

    for (std::size_t node = 0; node < model.map.node_count(); ++node) {
        if (model.rulesets.count(node)) continue;
        std::size_t best = model.map.node_count();
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& [owner, ruleset] : model.rulesets) {
            double d = 0.0;
            for (std::size_t k = 0; k < model.map.dim; ++k) {
                const double diff = model.map.nodes[node][k] - model.map.nodes[owner][k];
                d += diff * diff;
            }
            if (d < best_d) {
                best_d = d;
                best = owner;
            }
        }
        model.fallback.emplace(node, best);
    }

    model.provenance.dataset_fingerprint = fingerprint(train);
    model.provenance.timestamp = utc_timestamp();
    return detail;
}

TwoStageModel train_stages(const FeatureDataset& train, const PipelineConfig& config) {
    return train_stages_detailed(train, config).model;
}

TwoStageModel train_on_features(const FeatureDataset& features, const PipelineConfig& config) {
    TwoStageModel model = train_stages(split_train_test(features, config.n_test).first, config);
    model.provenance.dataset_fingerprint = fingerprint(features);
    return model;
}

TwoStageModel train_two_stage(const PriceSeries& series, const PipelineConfig& config) {
    return train_on_features(build_features(series), config);
}

std::size_t route(const TwoStageModel& model, const std::vector<double>& x_scaled) {
    const std::size_t node = bmu(model.map, x_scaled);
    if (model.rulesets.count(node)) return node;
    const auto it = model.fallback.find(node);
    if (it == model.fallback.end())
        throw ContractError("model routing is incomplete: node " + std::to_string(node) +
                            " has neither rules nor a fallback");
    return it->second;
}

double predict(const TwoStageModel& model, const std::vector<double>& x_raw) {
    const std::vector<double> x = scale_input(model.scaling, x_raw);
    return infer(model.rulesets.at(route(model, x)), x);
}

double predict(const TwoStageModel& model, const Inputs& x_raw) {
    return predict(model, std::vector<double>(x_raw.begin(), x_raw.end()));
}

std::vector<double> predict(const TwoStageModel& model, const FeatureDataset& raw) {
    if (raw.scaling)
        throw ParamError("predict: expected unscaled features (the model scales internally)");
    std::vector<double> out;
    out.reserve(raw.size());
    for (const auto& record : raw.records)
        out.push_back(predict(model, std::vector<double>(record.x.begin(), record.x.end())));
    return out;
}

MetricReport evaluate(const TwoStageModel& model, const FeatureDataset& test) {
    if (test.empty()) throw ParamError("evaluate: empty test dataset");
    return compute_metrics(target_column(test), predict(model, test));
}

std::string ExperimentReport::to_csv() const {
    std::string out = std::string(kMetricCsvHeader) + "\n";
    for (const ExperimentRow& row : rows) {
        if (row.ok)
            out += metric_csv_row(row.name, "som-fsvr", row.metrics) + "\n";
        else
            out += "# ERROR " + row.name + ": " + row.error + "\n";
    }
    return out;
}

ExperimentReport run_experiment(
    const std::vector<std::pair<std::string, PriceSeries>>& datasets,
    const PipelineConfig& config) {
    ExperimentReport report;
    report.config = config;
    for (const auto& [name, series] : datasets) {
        ExperimentRow row;
        row.name = name;
        try {
            const FeatureDataset features = build_features(series);
            auto [train, test] = split_train_test(features, config.n_test);
            TwoStageModel model = train_stages(train, config);
            model.provenance.dataset_fingerprint = fingerprint(features);
            row.metrics = evaluate(model, test);
            for (const auto& [node, ruleset] : model.rulesets)
                row.rule_counts.emplace_back(node, ruleset.rule_count());
            row.model = std::move(model);
            row.ok = true;
        } catch (const Error& e) {
            row.ok = false;
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace fsvr
