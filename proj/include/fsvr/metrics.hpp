#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fsvr {

// Accuracy summary for one prediction run.
struct MetricReport {
    double nmse = 0.0;  // squared error normalized by target variance
    double mae = 0.0;   // mean absolute error
    double ds = 0.0;    // percentage of correctly predicted moves, in [0, 100]
    std::size_t n = 0;  // number of evaluated points
};

// Squared error normalized by the sample variance of `actual`
// (computed with the n-1 denominator). Requires n >= 2 and a
// non-constant actual series.
double nmse(const std::vector<double>& actual, const std::vector<double>& predicted);

// Mean absolute error. Requires n >= 1.
double mae(const std::vector<double>& actual, const std::vector<double>& predicted);

// Directional symmetry: the percentage of consecutive steps where the
// predicted change has the same sign as the actual change (a zero
// product counts as a hit). Requires n >= 2.
double ds(const std::vector<double>& actual, const std::vector<double>& predicted);

MetricReport compute_metrics(const std::vector<double>& actual,
                             const std::vector<double>& predicted);

inline constexpr const char* kMetricCsvHeader = "stock,model,nmse,mae,ds,n";

// One CSV row matching kMetricCsvHeader; numeric fields use %.6f.
std::string metric_csv_row(const std::string& stock, const std::string& model,
                           const MetricReport& report);

}  // namespace fsvr
