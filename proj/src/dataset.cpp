#include "fsvr/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

#include "fsvr/errors.hpp"
#include "fsvr/hash.hpp"

namespace fsvr {

namespace {

std::string trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        fields.push_back(trim(std::string_view(line).substr(start, pos - start)));
        start = pos + 1;
    }
    return fields;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool parse_double(std::string_view text, double& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

}  // namespace

Date parse_date(std::string_view text) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw DataError("bad date '" + std::string(text) + "': expected YYYY-MM-DD");
    auto num = [&](std::string_view part, auto& out) {
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        if (ec != std::errc() || ptr != part.data() + part.size())
            throw DataError("bad date '" + std::string(text) + "': expected YYYY-MM-DD");
    };
    num(text.substr(0, 4), y);
    num(text.substr(5, 2), m);
    num(text.substr(8, 2), d);
    Date date = std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d};
    if (!date.ok()) throw DataError("bad date '" + std::string(text) + "': not a calendar day");
    return date;
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

std::vector<double> PriceSeries::closes() const {
    std::vector<double> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.close);
    return out;
}

PriceSeries parse_price_csv(std::istream& source) {
    std::string line;
    if (!std::getline(source, line)) throw FormatError("price CSV is empty");
    // strip a UTF-8 BOM if the file carries one
    if (line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0) line.erase(0, 3);

    auto header = split_csv_line(line);
    std::ptrdiff_t date_col = -1, close_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        auto name = lower(header[i]);
        if (name == "date") date_col = static_cast<std::ptrdiff_t>(i);
        else if (name == "close") close_col = static_cast<std::ptrdiff_t>(i);
    }
    if (date_col < 0 || close_col < 0)
        throw FormatError("price CSV header must name Date and Close columns, got '" + line + "'");

    PriceSeries series;
    std::size_t line_no = 1;
    while (std::getline(source, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() <= static_cast<std::size_t>(std::max(date_col, close_col)))
            throw DataError("price CSV line " + std::to_string(line_no) + " has too few columns");
        Date date = parse_date(fields[static_cast<std::size_t>(date_col)]);
        double close = 0.0;
        if (!parse_double(fields[static_cast<std::size_t>(close_col)], close))
            throw DataError("price CSV line " + std::to_string(line_no) + " (" + format_date(date) +
                            "): unreadable close '" + fields[static_cast<std::size_t>(close_col)] + "'");
        if (!std::isfinite(close) || close <= 0.0)
            throw DataError("non-positive close " + fields[static_cast<std::size_t>(close_col)] +
                            " on " + format_date(date));
        series.entries.push_back({date, close});
    }
    if (series.entries.empty()) throw DataError("price CSV has a header but no rows");

    std::stable_sort(series.entries.begin(), series.entries.end(),
                     [](const PricePoint& a, const PricePoint& b) {
                         return std::chrono::sys_days(a.date) < std::chrono::sys_days(b.date);
                     });
    for (std::size_t i = 1; i < series.entries.size(); ++i) {
        if (series.entries[i].date == series.entries[i - 1].date)
            throw DataError("duplicate date " + format_date(series.entries[i].date));
    }
    return series;
}

PriceSeries parse_price_csv(const std::string& text) {
    std::istringstream in(text);
    return parse_price_csv(in);
}

std::vector<double> ema(const std::vector<double>& series, std::size_t window) {
    if (window == 0) throw ParamError("ema window must be >= 1");
    if (series.empty()) throw ParamError("ema input must be non-empty");
    const double alpha = 2.0 / (static_cast<double>(window) + 1.0);
    std::vector<double> out(series.size());
    out[0] = series[0];
    for (std::size_t t = 1; t < series.size(); ++t)
        out[t] = alpha * series[t] + (1.0 - alpha) * out[t - 1];
    return out;
}

FeatureDataset build_features(const PriceSeries& series) {
    const std::size_t n = series.size();
    if (n < kMinSeriesLength)
        throw DataError("need at least " + std::to_string(kMinSeriesLength) +
                        " price rows to build features, got " + std::to_string(n));

    const std::vector<double> close = series.closes();
    const std::vector<double> ema100 = ema(close, 100);
    const std::vector<double> ema3 = ema(close, 3);

    FeatureDataset dataset;
    dataset.records.reserve(n - kMinSeriesLength + 1);
    for (std::size_t i = 100; i + 5 < n; ++i) {
        FeatureRecord rec;
        rec.date = series.entries[i].date;
        rec.x[0] = close[i] - ema100[i];
        const std::size_t lags[4] = {5, 10, 15, 20};
        for (std::size_t k = 0; k < 4; ++k)
            rec.x[k + 1] = (close[i] - close[i - lags[k]]) / close[i - lags[k]] * 100.0;
        rec.y = (ema3[i + 5] - ema3[i]) / ema3[i] * 100.0;
        for (double v : rec.x)
            if (!std::isfinite(v))
                throw DataError("non-finite feature at " + format_date(rec.date));
        if (!std::isfinite(rec.y))
            throw DataError("non-finite target at " + format_date(rec.date));
        dataset.records.push_back(rec);
    }
    return dataset;
}

Scaling fit_scaling(const FeatureDataset& dataset) {
    if (dataset.empty()) throw DataError("cannot fit scaling on an empty dataset");
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
        if (var <= 0.0)
            throw DataError("input dimension x" + std::to_string(d + 1) + " has zero variance");
        s.mean[d] = mean;
        s.stddev[d] = std::sqrt(var);
    }
    return s;
}

FeatureDataset apply_scaling(const FeatureDataset& dataset, const Scaling& scaling) {
    if (dataset.scaling) throw ParamError("dataset is already scaled");
    for (double sd : scaling.stddev)
        if (!(sd > 0.0)) throw ParamError("scaling stddev must be > 0 in every dimension");
    FeatureDataset out = dataset;
    for (auto& r : out.records)
        for (std::size_t d = 0; d < kInputDim; ++d) r.x[d] = (r.x[d] - scaling.mean[d]) / scaling.stddev[d];
    out.scaling = scaling;
    return out;
}

FeatureDataset invert_scaling(const FeatureDataset& dataset) {
    if (!dataset.scaling) throw ParamError("dataset carries no scaling to invert");
    const Scaling& s = *dataset.scaling;
    FeatureDataset out = dataset;
    for (auto& r : out.records)
        for (std::size_t d = 0; d < kInputDim; ++d) r.x[d] = r.x[d] * s.stddev[d] + s.mean[d];
    out.scaling.reset();
    return out;
}

std::pair<FeatureDataset, FeatureDataset> split_train_test(const FeatureDataset& dataset,
                                                           std::size_t n_test) {
    if (n_test == 0 || n_test >= dataset.size())
        throw ParamError("n_test must satisfy 0 < n_test < " + std::to_string(dataset.size()) +
                         ", got " + std::to_string(n_test));
    FeatureDataset train, test;
    train.scaling = dataset.scaling;
    test.scaling = dataset.scaling;
    const std::size_t cut = dataset.size() - n_test;
    train.records.assign(dataset.records.begin(), dataset.records.begin() + static_cast<std::ptrdiff_t>(cut));
    test.records.assign(dataset.records.begin() + static_cast<std::ptrdiff_t>(cut), dataset.records.end());
    return {std::move(train), std::move(test)};
}

std::string to_csv(const FeatureDataset& dataset) {
    std::string out = "date,x1,x2,x3,x4,x5,y\n";
    for (const auto& r : dataset.records) {
        out += format_date(r.date);
        for (double v : r.x) {
            out += ',';
            append_double(out, v);
        }
        out += ',';
        append_double(out, r.y);
        out += '\n';
    }
    return out;
}

FeatureDataset parse_feature_csv(std::istream& source) {
    std::string line;
    if (!std::getline(source, line)) throw FormatError("feature CSV is empty");
    if (line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0) line.erase(0, 3);
    auto header = split_csv_line(line);
    std::vector<std::string> expected = {"date", "x1", "x2", "x3", "x4", "x5", "y"};
    bool has_target = true;
    if (header.size() == expected.size() - 1) has_target = false;  // prediction inputs, no y
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i >= expected.size() || lower(header[i]) != expected[i])
            throw FormatError("feature CSV header must be date,x1,x2,x3,x4,x5[,y], got '" + line + "'");
    }
    if (header.size() < expected.size() - 1)
        throw FormatError("feature CSV header must be date,x1,x2,x3,x4,x5[,y], got '" + line + "'");

    FeatureDataset dataset;
    std::size_t line_no = 1;
    while (std::getline(source, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError("feature CSV line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
        FeatureRecord rec;
        rec.date = parse_date(fields[0]);
        for (std::size_t d = 0; d < kInputDim; ++d) {
            if (!parse_double(fields[d + 1], rec.x[d]) || !std::isfinite(rec.x[d]))
                throw DataError("feature CSV line " + std::to_string(line_no) + ": unreadable x" +
                                std::to_string(d + 1) + " '" + fields[d + 1] + "'");
        }
        if (has_target) {
            if (!parse_double(fields[6], rec.y) || !std::isfinite(rec.y))
                throw DataError("feature CSV line " + std::to_string(line_no) + ": unreadable y '" +
                                fields[6] + "'");
        }
        dataset.records.push_back(rec);
    }
    if (dataset.empty()) throw DataError("feature CSV has a header but no rows");
    return dataset;
}

std::uint64_t fingerprint(const FeatureDataset& dataset) {
    return fnv1a64(to_csv(dataset));
}

std::vector<std::vector<double>> input_rows(const FeatureDataset& dataset) {
    std::vector<std::vector<double>> rows;
    rows.reserve(dataset.size());
    for (const auto& r : dataset.records) rows.emplace_back(r.x.begin(), r.x.end());
    return rows;
}

std::vector<double> target_column(const FeatureDataset& dataset) {
    std::vector<double> y;
    y.reserve(dataset.size());
    for (const auto& r : dataset.records) y.push_back(r.y);
    return y;
}

}  // namespace fsvr
