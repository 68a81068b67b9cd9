#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fsvr {

using Date = std::chrono::year_month_day;

/// Parses ISO `YYYY-MM-DD`. Throws DataError on anything else.
Date parse_date(std::string_view text);
std::string format_date(const Date& date);

struct PricePoint {
    Date date;
    double close = 0.0;
};

/// Daily closing prices, ascending by date, no duplicates, all closes > 0.
struct PriceSeries {
    std::vector<PricePoint> entries;

    std::size_t size() const { return entries.size(); }
    std::vector<double> closes() const;
};

inline constexpr std::size_t kInputDim = 5;
using Inputs = std::array<double, kInputDim>;

/// One model sample: the deviation of the close from its 100-day EMA (x1),
/// the 5/10/15/20-day percent changes (x2..x5), and the 5-day-ahead percent
/// change of the 3-day-EMA-smoothed close (y).
struct FeatureRecord {
    Date date;
    Inputs x{};
    double y = 0.0;
};

/// Per-dimension standardization parameters fitted on training inputs only.
struct Scaling {
    std::array<double, kInputDim> mean{};
    std::array<double, kInputDim> stddev{};
};

struct FeatureDataset {
    std::vector<FeatureRecord> records;
    std::optional<Scaling> scaling;  // present once inputs have been standardized

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

// Shortest series that yields at least one record: 100 days of EMA warm-up,
// 20 days of lookback (covered by the warm-up) and a 5-day lookahead.
inline constexpr std::size_t kMinSeriesLength = 106;

/// Reads a comma-separated file with a header naming at least `Date` and
/// `Close` (Yahoo Finance download layout; extra columns ignored). Rows come
/// back sorted ascending by date.
PriceSeries parse_price_csv(std::istream& source);
PriceSeries parse_price_csv(const std::string& text);

/// Exponential moving average, alpha = 2/(window+1), seeded with the first
/// observation. Output has the same length as the input.
std::vector<double> ema(const std::vector<double>& series, std::size_t window);

/// Builds one record per day that has a full 100-day EMA history, 20 days of
/// lookback and 5 days of lookahead. No scaling is applied.
FeatureDataset build_features(const PriceSeries& series);

/// Sample mean and standard deviation (n-1 denominator) per input dimension.
/// The target is never scaled.
Scaling fit_scaling(const FeatureDataset& dataset);

FeatureDataset apply_scaling(const FeatureDataset& dataset, const Scaling& scaling);

/// Undoes apply_scaling using the parameters recorded in the dataset.
FeatureDataset invert_scaling(const FeatureDataset& dataset);

/// Chronological split: the last n_test records become the test set.
std::pair<FeatureDataset, FeatureDataset> split_train_test(const FeatureDataset& dataset,
                                                           std::size_t n_test);

/// Canonical CSV form, header `date,x1,x2,x3,x4,x5,y`, shortest round-trip
/// float formatting. Also the byte stream the dataset fingerprint hashes.
std::string to_csv(const FeatureDataset& dataset);
FeatureDataset parse_feature_csv(std::istream& source);

/// FNV-1a over the canonical CSV bytes.
std::uint64_t fingerprint(const FeatureDataset& dataset);

/// Input rows as plain vectors, the form the SOM and regressor consume.
std::vector<std::vector<double>> input_rows(const FeatureDataset& dataset);
std::vector<double> target_column(const FeatureDataset& dataset);

}  // namespace fsvr
