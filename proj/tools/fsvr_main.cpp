// fsvr — two-stage stock forecasting: map-partitioned support-vector
// regression with extracted fuzzy rules.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3
// training/convergence error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fsvr/errors.hpp"
#include "fsvr/pipeline.hpp"

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fsvr::DataError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fsvr::DataError("cannot open '" + path + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw fsvr::DataError("failed writing '" + path + "'");
}

// "-" means stdout.
void emit(const std::string& path, const std::string& text) {
    if (path == "-")
        std::cout << text;
    else
        write_file(path, text);
}

fsvr::PipelineConfig load_config(const std::string& path) {
    if (path.empty()) return fsvr::PipelineConfig{};
    return fsvr::parse_config(read_file(path));
}

bool looks_like_feature_csv(const std::string& text) {
    const auto end = text.find('\n');
    const std::string header = text.substr(0, end);
    return header.find("x1") != std::string::npos;
}

fsvr::FeatureDataset load_features(const std::string& path) {
    const std::string text = read_file(path);
    if (looks_like_feature_csv(text)) {
        std::istringstream in(text);
        return fsvr::parse_feature_csv(in);
    }
    return fsvr::build_features(fsvr::parse_price_csv(text));
}

int cmd_features(const std::string& input, const std::string& output) {
    const fsvr::PriceSeries series = fsvr::parse_price_csv(read_file(input));
    emit(output, fsvr::to_csv(fsvr::build_features(series)));
    return 0;
}

int cmd_train(const std::string& input, const std::string& config_path,
              const std::string& output) {
    const fsvr::PipelineConfig config = load_config(config_path);
    const fsvr::FeatureDataset features = load_features(input);
    const fsvr::TwoStageModel model = fsvr::train_on_features(features, config);
    fsvr::save_model_file(model, output);

    std::size_t rules = 0;
    for (const auto& [node, ruleset] : model.rulesets) rules += ruleset.rule_count();
    std::cerr << "trained on " << features.size() - config.n_test << " records ("
              << config.n_test << " held out); " << model.rulesets.size() << " cluster(s), "
              << rules << " rule(s); model written to " << output << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input,
                const std::string& output) {
    const fsvr::TwoStageModel model = fsvr::load_model_file(model_path);
    std::istringstream in(read_file(input));
    const fsvr::FeatureDataset dataset = fsvr::parse_feature_csv(in);
    std::string out = "date,prediction\n";
    for (const auto& record : dataset.records) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f",
                      fsvr::predict(model, std::vector<double>(record.x.begin(), record.x.end())));
        out += fsvr::format_date(record.date) + "," + buf + "\n";
    }
    emit(output, out);
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& test_path,
                 const std::string& name, const std::string& output) {
    const fsvr::TwoStageModel model = fsvr::load_model_file(model_path);
    std::istringstream in(read_file(test_path));
    const fsvr::MetricReport report = fsvr::evaluate(model, fsvr::parse_feature_csv(in));
    emit(output, std::string(fsvr::kMetricCsvHeader) + "\n" +
                     fsvr::metric_csv_row(name, "som-fsvr", report) + "\n");
    return 0;
}

int cmd_export_rules(const std::string& model_path, int node, const std::string& output) {
    const fsvr::TwoStageModel model = fsvr::load_model_file(model_path);
    std::string out;
    if (node >= 0) {
        const auto it = model.rulesets.find(static_cast<std::size_t>(node));
        if (it == model.rulesets.end())
            throw fsvr::ParamError("node " + std::to_string(node) + " has no rule set");
        out = fsvr::export_rules(it->second);
    } else {
        for (const auto& [idx, ruleset] : model.rulesets) {
            out += "# cluster " + std::to_string(idx) + "\n";
            out += fsvr::export_rules(ruleset);
        }
    }
    emit(output, out);
    return 0;
}

int cmd_experiment(const std::string& manifest_path, const std::string& config_path,
                   const std::string& out_dir) {
    const fsvr::PipelineConfig config = load_config(config_path);

    std::vector<std::pair<std::string, fsvr::PriceSeries>> datasets;
    std::istringstream manifest(read_file(manifest_path));
    const fs::path base = fs::path(manifest_path).parent_path();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(manifest, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 >= line.size())
            throw fsvr::FormatError("manifest line " + std::to_string(line_no) +
                                    ": expected 'name,path'");
        const std::string name = line.substr(0, comma);
        fs::path path = line.substr(comma + 1);
        if (path.is_relative()) path = base / path;
        datasets.emplace_back(name, fsvr::parse_price_csv(read_file(path.string())));
    }

    const fsvr::ExperimentReport report = fsvr::run_experiment(datasets, config);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_file((dir / "report.csv").string(), report.to_csv());
    write_file((dir / "config.txt").string(), fsvr::config_to_text(config));
    for (const auto& row : report.rows) {
        if (!row.ok || !row.model) continue;
        std::string rules;
        for (const auto& [idx, ruleset] : row.model->rulesets) {
            rules += "# cluster " + std::to_string(idx) + "\n";
            rules += fsvr::export_rules(ruleset);
        }
        write_file((dir / ("rules-" + row.name + ".txt")).string(), rules);
    }
    std::cout << report.to_csv();
    bool all_ok = true;
    for (const auto& row : report.rows) all_ok = all_ok && row.ok;
    if (!all_ok) std::cerr << "some datasets failed; see report.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage stock forecasting: SOM-partitioned SVR with fuzzy-rule extraction"};
    app.require_subcommand(1);

    std::string input, output = "-", config_path, model_path, test_path, name = "dataset";
    std::string manifest_path, out_dir;
    int node = -1;

    auto* features = app.add_subcommand("features", "Build model features from a price CSV");
    features->add_option("-i,--input", input, "price CSV (Date,Close columns)")->required();
    features->add_option("-o,--output", output, "feature CSV destination (- for stdout)");

    auto* train = app.add_subcommand("train", "Train a model from a price or feature CSV");
    train->add_option("-i,--input", input, "price CSV or feature CSV")->required();
    train->add_option("-c,--config", config_path, "config file (key = value lines)");
    train->add_option("-o,--output", model_path, "model file destination")->required();

    auto* predict = app.add_subcommand("predict", "Predict targets for feature rows");
    predict->add_option("-m,--model", model_path, "trained model file")->required();
    predict->add_option("-i,--input", input, "feature CSV (y column optional)")->required();
    predict->add_option("-o,--output", output, "predictions CSV destination (- for stdout)");

    auto* evaluate = app.add_subcommand("evaluate", "Score a model against labeled features");
    evaluate->add_option("-m,--model", model_path, "trained model file")->required();
    evaluate->add_option("-t,--test", test_path, "feature CSV with targets")->required();
    evaluate->add_option("-n,--name", name, "dataset label for the report row");
    evaluate->add_option("-o,--output", output, "metric CSV destination (- for stdout)");

    auto* export_rules = app.add_subcommand("export-rules", "Print a model's fuzzy rules");
    export_rules->add_option("-m,--model", model_path, "trained model file")->required();
    export_rules->add_option("--node", node, "only this map node's rules");
    export_rules->add_option("-o,--output", output, "text destination (- for stdout)");

    auto* experiment = app.add_subcommand("experiment", "Train and score a batch of datasets");
    experiment->add_option("--manifest", manifest_path, "text file of name,price-csv-path lines")
        ->required();
    experiment->add_option("-c,--config", config_path, "config file shared by all datasets");
    experiment->add_option("-d,--output-dir", out_dir, "report directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exits 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (features->parsed()) return cmd_features(input, output);
        if (train->parsed()) return cmd_train(input, config_path, model_path);
        if (predict->parsed()) return cmd_predict(model_path, input, output);
        if (evaluate->parsed()) return cmd_evaluate(model_path, test_path, name, output);
        if (export_rules->parsed()) return cmd_export_rules(model_path, node, output);
        if (experiment->parsed()) return cmd_experiment(manifest_path, config_path, out_dir);
    } catch (const fsvr::TrainingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const fsvr::ParamError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const fsvr::ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const fsvr::Error& e) {  // data, format, io
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
