#include "fsvr/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "fsvr/errors.hpp"

namespace fsvr {

namespace {

void require_same_length(const std::vector<double>& a, const std::vector<double>& b,
                         std::size_t min_n, const char* who) {
    if (a.size() != b.size())
        throw ParamError(std::string(who) + ": sequence lengths differ (" +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    if (a.size() < min_n)
        throw ParamError(std::string(who) + ": need at least " + std::to_string(min_n) +
                         " points, got " + std::to_string(a.size()));
}

}  // namespace

double nmse(const std::vector<double>& actual, const std::vector<double>& predicted) {
    require_same_length(actual, predicted, 2, "nmse");
    const std::size_t n = actual.size();
    double mean = 0.0;
    for (double y : actual) mean += y;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double y : actual) var += (y - mean) * (y - mean);
    var /= static_cast<double>(n - 1);
    if (var <= 0.0) throw DataError("nmse: actual sequence has zero variance");
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = actual[i] - predicted[i];
        sse += d * d;
    }
    return sse / (var * static_cast<double>(n));
}

double mae(const std::vector<double>& actual, const std::vector<double>& predicted) {
    require_same_length(actual, predicted, 1, "mae");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) sum += std::fabs(actual[i] - predicted[i]);
    return sum / static_cast<double>(actual.size());
}

double ds(const std::vector<double>& actual, const std::vector<double>& predicted) {
    require_same_length(actual, predicted, 2, "ds");
    const std::size_t n = actual.size();
    std::size_t hits = 0;
    for (std::size_t i = 1; i < n; ++i) {
        const double change = actual[i] - actual[i - 1];
        const double predicted_change = predicted[i] - predicted[i - 1];
        if (change * predicted_change >= 0.0) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(n - 1);
}

MetricReport compute_metrics(const std::vector<double>& actual,
                             const std::vector<double>& predicted) {
    MetricReport report;
    report.nmse = nmse(actual, predicted);
    report.mae = mae(actual, predicted);
    report.ds = ds(actual, predicted);
    report.n = actual.size();
    return report;
}

std::string metric_csv_row(const std::string& stock, const std::string& model,
                           const MetricReport& report) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%zu", report.nmse, report.mae, report.ds,
                  report.n);
    return stock + "," + model + "," + buf;
}

}  // namespace fsvr
