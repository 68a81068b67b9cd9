#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <charconv>
#include <sstream>

#include "fsvr/errors.hpp"
#include "fsvr/pipeline.hpp"

namespace py = pybind11;

namespace {

std::vector<std::string> dataset_dates(const fsvr::FeatureDataset& dataset) {
    std::vector<std::string> out;
    out.reserve(dataset.size());
    for (const auto& r : dataset.records) out.push_back(fsvr::format_date(r.date));
    return out;
}

fsvr::FeatureDataset feature_dataset_from_csv(const std::string& text) {
    std::istringstream in(text);
    return fsvr::parse_feature_csv(in);
}

fsvr::PriceSeries price_series_from_lists(const std::vector<std::string>& dates,
                                          const std::vector<double>& closes) {
    if (dates.size() != closes.size())
        throw fsvr::ParamError("price_series: dates and closes must have the same length");
    std::string csv = "Date,Close\n";
    for (std::size_t i = 0; i < dates.size(); ++i) {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, closes[i]);
        csv += dates[i] + "," + std::string(buf, res.ptr) + "\n";
    }
    return fsvr::parse_price_csv(csv);
}

}  // namespace

PYBIND11_MODULE(_fsvr, m) {
    m.doc() = "Two-stage stock forecasting: SOM-partitioned SVR with fuzzy-rule extraction";

    const auto base = py::register_exception<fsvr::Error>(m, "Error");
    py::register_exception<fsvr::FormatError>(m, "FormatError", base);
    py::register_exception<fsvr::DataError>(m, "DataError", base);
    py::register_exception<fsvr::ParamError>(m, "ParamError", base);
    py::register_exception<fsvr::ContractError>(m, "ContractError", base);
    py::register_exception<fsvr::TrainingError>(m, "TrainingError", base);

    // data
    py::class_<fsvr::PriceSeries>(m, "PriceSeries")
        .def("__len__", &fsvr::PriceSeries::size)
        .def("closes", &fsvr::PriceSeries::closes);
    m.def("parse_price_csv", py::overload_cast<const std::string&>(&fsvr::parse_price_csv));
    m.def("price_series", &price_series_from_lists, py::arg("dates"), py::arg("closes"));

    py::class_<fsvr::FeatureDataset>(m, "FeatureDataset")
        .def("__len__", &fsvr::FeatureDataset::size)
        .def("dates", &dataset_dates)
        .def("inputs", &fsvr::input_rows)
        .def("targets", &fsvr::target_column)
        .def("to_csv", &fsvr::to_csv);
    m.def("parse_feature_csv", &feature_dataset_from_csv);
    m.def("ema", &fsvr::ema, py::arg("series"), py::arg("window"));
    m.def("build_features", &fsvr::build_features);
    m.def("split_train_test", &fsvr::split_train_test, py::arg("dataset"), py::arg("n_test"));
    m.def("dataset_fingerprint", py::overload_cast<const fsvr::FeatureDataset&>(&fsvr::fingerprint));

    // metrics
    py::class_<fsvr::MetricReport>(m, "MetricReport")
        .def_readonly("nmse", &fsvr::MetricReport::nmse)
        .def_readonly("mae", &fsvr::MetricReport::mae)
        .def_readonly("ds", &fsvr::MetricReport::ds)
        .def_readonly("n", &fsvr::MetricReport::n);
    m.def("nmse", &fsvr::nmse);
    m.def("mae", &fsvr::mae);
    m.def("ds", &fsvr::ds);
    m.def("compute_metrics", &fsvr::compute_metrics);

    // som
    py::enum_<fsvr::GridTopology>(m, "GridTopology")
        .value("RECTANGULAR", fsvr::GridTopology::Rectangular)
        .value("HEXAGONAL", fsvr::GridTopology::Hexagonal);
    py::class_<fsvr::SomConfig>(m, "SomConfig")
        .def(py::init<>())
        .def_readwrite("rows", &fsvr::SomConfig::rows)
        .def_readwrite("cols", &fsvr::SomConfig::cols)
        .def_readwrite("topology", &fsvr::SomConfig::topology)
        .def_readwrite("epochs", &fsvr::SomConfig::epochs)
        .def_readwrite("lr_initial", &fsvr::SomConfig::lr_initial)
        .def_readwrite("lr_final", &fsvr::SomConfig::lr_final)
        .def_readwrite("radius_initial", &fsvr::SomConfig::radius_initial)
        .def_readwrite("radius_final", &fsvr::SomConfig::radius_final)
        .def_readwrite("seed", &fsvr::SomConfig::seed);
    py::class_<fsvr::SomMap>(m, "SomMap")
        .def_readonly("dim", &fsvr::SomMap::dim)
        .def_readonly("nodes", &fsvr::SomMap::nodes)
        .def_readonly("trained", &fsvr::SomMap::trained)
        .def_property_readonly("node_count", &fsvr::SomMap::node_count);
    py::class_<fsvr::Partition>(m, "Partition")
        .def_readonly("assignment", &fsvr::Partition::assignment)
        .def_readonly("clusters", &fsvr::Partition::clusters);
    m.def("init_map", &fsvr::init_map);
    m.def("train_som", &fsvr::train_som);
    m.def("bmu", &fsvr::bmu);
    m.def("partition_data", &fsvr::partition_data);
    m.def("quantization_error", &fsvr::quantization_error);

    // svr
    py::class_<fsvr::SvrConfig>(m, "SvrConfig")
        .def(py::init<>())
        .def_readwrite("c", &fsvr::SvrConfig::c)
        .def_readwrite("epsilon", &fsvr::SvrConfig::epsilon)
        .def_readwrite("sigma", &fsvr::SvrConfig::sigma)
        .def_readwrite("tolerance", &fsvr::SvrConfig::tolerance)
        .def_readwrite("max_passes", &fsvr::SvrConfig::max_passes);
    py::class_<fsvr::SvrModel>(m, "SvrModel")
        .def_readonly("support_vectors", &fsvr::SvrModel::support_vectors)
        .def_readonly("beta", &fsvr::SvrModel::beta)
        .def_readonly("sigmas", &fsvr::SvrModel::sigmas)
        .def_readonly("bias", &fsvr::SvrModel::bias)
        .def_readonly("offset", &fsvr::SvrModel::offset)
        .def_readonly("trivial", &fsvr::SvrModel::trivial)
        .def_property_readonly("sv_count", &fsvr::SvrModel::sv_count);
    py::class_<fsvr::KktReport>(m, "KktReport")
        .def_readonly("max_violation", &fsvr::KktReport::max_violation)
        .def_readonly("converged", &fsvr::KktReport::converged);
    m.def("gaussian_kernel", &fsvr::gaussian_kernel);
    m.def("normalized_gaussian_weights", &fsvr::normalized_gaussian_weights);
    m.def("train_svr", &fsvr::train_svr);
    m.def("predict_svr",
          py::overload_cast<const fsvr::SvrModel&, const std::vector<double>&>(&fsvr::predict_svr));
    m.def("kkt_report", &fsvr::kkt_report);

    // fuzzy
    py::class_<fsvr::FuzzyRule>(m, "FuzzyRule")
        .def(py::init<>())
        .def_readwrite("centers", &fsvr::FuzzyRule::centers)
        .def_readwrite("widths", &fsvr::FuzzyRule::widths)
        .def_readwrite("consequent", &fsvr::FuzzyRule::consequent);
    py::class_<fsvr::RuleSet>(m, "RuleSet")
        .def(py::init<>())
        .def_readwrite("rules", &fsvr::RuleSet::rules)
        .def_readwrite("offset", &fsvr::RuleSet::offset)
        .def_readonly("trivial", &fsvr::RuleSet::trivial)
        .def_property_readonly("rule_count", &fsvr::RuleSet::rule_count);
    py::class_<fsvr::RefineConfig>(m, "RefineConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &fsvr::RefineConfig::learning_rate)
        .def_readwrite("epochs", &fsvr::RefineConfig::epochs)
        .def_readwrite("min_width", &fsvr::RefineConfig::min_width);
    py::class_<fsvr::RefineResult>(m, "RefineResult")
        .def_readonly("ruleset", &fsvr::RefineResult::ruleset)
        .def_readonly("diverged", &fsvr::RefineResult::diverged)
        .def_readonly("epoch_mse", &fsvr::RefineResult::epoch_mse)
        .def_readonly("best_epoch", &fsvr::RefineResult::best_epoch);
    m.def("extract_rules", &fsvr::extract_rules);
    m.def("infer",
          py::overload_cast<const fsvr::RuleSet&, const std::vector<double>&>(&fsvr::infer));
    m.def("refine_rules", &fsvr::refine_rules);
    m.def("ruleset_mse", &fsvr::ruleset_mse);
    m.def("export_rules", &fsvr::export_rules);

    // pipeline
    py::class_<fsvr::PipelineConfig>(m, "PipelineConfig")
        .def(py::init<>())
        .def_readwrite("som", &fsvr::PipelineConfig::som)
        .def_readwrite("svr", &fsvr::PipelineConfig::svr)
        .def_readwrite("refine", &fsvr::PipelineConfig::refine)
        .def_readwrite("n_test", &fsvr::PipelineConfig::n_test)
        .def_readwrite("min_cluster_size", &fsvr::PipelineConfig::min_cluster_size)
        .def_readwrite("seed", &fsvr::PipelineConfig::seed);
    py::class_<fsvr::TwoStageModel>(m, "TwoStageModel")
        .def_property_readonly("cluster_count",
                               [](const fsvr::TwoStageModel& model) { return model.rulesets.size(); })
        .def_property_readonly("rule_counts", [](const fsvr::TwoStageModel& model) {
            std::map<std::size_t, std::size_t> out;
            for (const auto& [node, ruleset] : model.rulesets) out[node] = ruleset.rule_count();
            return out;
        });
    m.def("parse_config", &fsvr::parse_config);
    m.def("config_to_text", &fsvr::config_to_text);
    m.def("train_two_stage", &fsvr::train_two_stage);
    m.def("train_on_features", &fsvr::train_on_features);
    m.def("predict", py::overload_cast<const fsvr::TwoStageModel&, const std::vector<double>&>(
                         &fsvr::predict));
    m.def("predict_dataset",
          py::overload_cast<const fsvr::TwoStageModel&, const fsvr::FeatureDataset&>(&fsvr::predict));
    m.def("evaluate", &fsvr::evaluate);
    m.def("save_model", &fsvr::save_model);
    m.def("load_model", &fsvr::load_model);
    m.def("state_fingerprint", &fsvr::state_fingerprint);
    m.def("model_fingerprint", &fsvr::model_fingerprint);
    m.def("run_experiment", &fsvr::run_experiment);

    py::class_<fsvr::ExperimentRow>(m, "ExperimentRow")
        .def_readonly("name", &fsvr::ExperimentRow::name)
        .def_readonly("ok", &fsvr::ExperimentRow::ok)
        .def_readonly("metrics", &fsvr::ExperimentRow::metrics)
        .def_readonly("error", &fsvr::ExperimentRow::error);
    py::class_<fsvr::ExperimentReport>(m, "ExperimentReport")
        .def_readonly("rows", &fsvr::ExperimentReport::rows)
        .def("to_csv", &fsvr::ExperimentReport::to_csv);
}
