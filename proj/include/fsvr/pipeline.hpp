#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fsvr/dataset.hpp"
#include "fsvr/fuzzy.hpp"
#include "fsvr/metrics.hpp"
#include "fsvr/som.hpp"
#include "fsvr/svr.hpp"

namespace fsvr {

struct PipelineConfig {
    SomConfig som;
    SvrConfig svr;
    std::optional<RefineConfig> refine;  // absent = no refinement pass
    std::size_t n_test = 200;
    std::size_t min_cluster_size = 10;
    std::uint64_t seed = 42;
};

// Parses the flat "key = value" config format ('#' comments, blank
// lines ignored). Every key is optional and defaults to the values
// above; unknown keys are rejected.
PipelineConfig parse_config(const std::string& text);
std::string config_to_text(const PipelineConfig& config);

struct Provenance {
    std::uint64_t dataset_fingerprint = 0;
    std::string timestamp;  // ISO 8601 UTC, informational only
};

// The deployable artifact: scaling + map route an input to one rule
// set; nodes whose training cluster was too small borrow the rule set
// of the nearest owning node via `fallback` (computed once, at training
// time).
struct TwoStageModel {
    Scaling scaling;
    SomMap map;
    std::map<std::size_t, RuleSet> rulesets;           // node -> rules
    std::map<std::size_t, std::size_t> fallback;       // node -> owning node
    PipelineConfig config;
    Provenance provenance;
};

// Hash of the functional state (scaling, map, rule sets, routing) —
// everything that determines predictions, nothing else.
std::uint64_t state_fingerprint(const TwoStageModel& model);

// state_fingerprint plus the config echo and dataset fingerprint;
// excludes the timestamp.
std::uint64_t model_fingerprint(const TwoStageModel& model);

// Full run: build features from the series, hold out the last n_test
// records untouched, train scaling/map/regressors/rules on the rest.
TwoStageModel train_two_stage(const PriceSeries& series, const PipelineConfig& config);

// Same, starting from an already-built (unscaled) feature dataset.
TwoStageModel train_on_features(const FeatureDataset& features, const PipelineConfig& config);

// Training core: fits everything on `train` as-is, no splitting.
TwoStageModel train_stages(const FeatureDataset& train, const PipelineConfig& config);

// train_stages plus the per-cluster intermediates, for inspection.
struct TrainDetail {
    TwoStageModel model;
    Partition partition;
    std::map<std::size_t, SvrModel> svr_models;  // node -> phase-2 regressor
    std::map<std::size_t, bool> refine_diverged;
};

TrainDetail train_stages_detailed(const FeatureDataset& train, const PipelineConfig& config);

// Node whose rule set serves this (already scaled) input.
std::size_t route(const TwoStageModel& model, const std::vector<double>& x_scaled);

// Scales the raw input, routes it, runs fuzzy inference.
double predict(const TwoStageModel& model, const std::vector<double>& x_raw);
double predict(const TwoStageModel& model, const Inputs& x_raw);

std::vector<double> predict(const TwoStageModel& model, const FeatureDataset& raw);

// Predicts every record of `test` (raw, unscaled) and scores against
// its targets.
MetricReport evaluate(const TwoStageModel& model, const FeatureDataset& test);

// Versioned JSON document; load rejects unknown versions (naming both)
// and corrupted payloads. Round-trip preserves predictions bit-exactly.
std::string save_model(const TwoStageModel& model);
void save_model_file(const TwoStageModel& model, const std::string& path);
TwoStageModel load_model(const std::string& text);
TwoStageModel load_model_file(const std::string& path);

struct ExperimentRow {
    std::string name;
    bool ok = false;
    MetricReport metrics;
    std::string error;  // set when ok is false
    std::vector<std::pair<std::size_t, std::size_t>> rule_counts;  // node -> rules
    std::optional<TwoStageModel> model;
};

struct ExperimentReport {
    PipelineConfig config;
    std::vector<ExperimentRow> rows;

    // kMetricCsvHeader table; failed datasets appear as comment lines.
    std::string to_csv() const;
};

// Trains and evaluates each named series with one shared config; a
// failing dataset becomes an error row instead of aborting the batch.
ExperimentReport run_experiment(
    const std::vector<std::pair<std::string, PriceSeries>>& datasets,
    const PipelineConfig& config);

}  // namespace fsvr
