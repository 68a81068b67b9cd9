#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fsvr/dataset.hpp"
#include "fsvr/errors.hpp"
#include "support.hpp"

using namespace fsvr;

TEST_CASE("parse_date accepts ISO dates and rejects junk") {
    Date d = parse_date("2015-03-09");
    CHECK(format_date(d) == "2015-03-09");
    CHECK_THROWS_AS(parse_date("2015/03/09"), DataError);
    CHECK_THROWS_AS(parse_date("2015-13-01"), DataError);
    CHECK_THROWS_AS(parse_date("2015-02-30"), DataError);
    CHECK_THROWS_AS(parse_date("march 9"), DataError);
    CHECK_THROWS_AS(parse_date(""), DataError);
}

TEST_CASE("parse_price_csv reads Date/Close in any column order") {
    std::string csv =
        "Open,Close,Date\n"
        "1.0,10.5,2020-01-02\n"
        "1.0,11.25,2020-01-03\n";
    PriceSeries series = parse_price_csv(csv);
    REQUIRE(series.size() == 2);
    CHECK(series.entries[0].close == 10.5);
    CHECK(series.entries[1].close == 11.25);
    CHECK(format_date(series.entries[0].date) == "2020-01-02");
}

TEST_CASE("parse_price_csv sorts by date and rejects duplicates") {
    std::string csv =
        "Date,Close\n"
        "2020-01-03,11.0\n"
        "2020-01-02,10.0\n";
    PriceSeries series = parse_price_csv(csv);
    REQUIRE(series.size() == 2);
    CHECK(series.entries[0].close == 10.0);

    std::string dup =
        "Date,Close\n"
        "2020-01-02,10.0\n"
        "2020-01-02,11.0\n";
    CHECK_THROWS_AS(parse_price_csv(dup), DataError);
}

TEST_CASE("parse_price_csv rejects malformed and non-positive prices") {
    CHECK_THROWS_AS(parse_price_csv(std::string("Date,Close\n2020-01-02,abc\n")), DataError);
    CHECK_THROWS_AS(parse_price_csv(std::string("Date,Close\n2020-01-02,-3\n")), DataError);
    CHECK_THROWS_AS(parse_price_csv(std::string("Date,Close\n2020-01-02,0\n")), DataError);
    CHECK_THROWS_AS(parse_price_csv(std::string("Date,Close\n")), DataError);
    CHECK_THROWS_AS(parse_price_csv(std::string("Open,High\n1,2\n")), FormatError);
    CHECK_THROWS_AS(parse_price_csv(std::string("")), FormatError);
}

TEST_CASE("parse_price_csv strips a UTF-8 BOM") {
    std::string csv = "\xEF\xBB\xBF";
    csv += "Date,Close\n2020-01-02,10.0\n";
    PriceSeries series = parse_price_csv(csv);
    CHECK(series.size() == 1);
}

TEST_CASE("ema matches a by-hand recurrence") {
    // window 3 => alpha = 0.5; seeds with the first value.
    std::vector<double> values = {1.0, 2.0};
    std::vector<double> smoothed = ema(values, 3);
    REQUIRE(smoothed.size() == 2);
    CHECK(smoothed[0] == doctest::Approx(1.0));
    CHECK(smoothed[1] == doctest::Approx(1.5));

    std::vector<double> longer = {4.0, 2.0, 6.0};
    std::vector<double> s2 = ema(longer, 3);
    CHECK(s2[1] == doctest::Approx(3.0));
    CHECK(s2[2] == doctest::Approx(4.5));

    CHECK_THROWS_AS(ema(values, 0), ParamError);
    CHECK_THROWS_AS(ema(std::vector<double>{}, 3), ParamError);
}

TEST_CASE("ema window 1 is the identity") {
    std::vector<double> values = {3.0, 1.0, 4.0, 1.0, 5.0};
    CHECK(ema(values, 1) == values);
}

TEST_CASE("build_features produces the documented record count and columns") {
    auto series = testsup::ar_price_series(130, 7);
    FeatureDataset dataset = build_features(series);
    // usable indices are [100, n-6]
    CHECK(dataset.size() == 130 - 105);
    CHECK(!dataset.scaling.has_value());

    auto closes = series.closes();
    auto ema100 = ema(closes, 100);
    auto ema3 = ema(closes, 3);
    const std::size_t i = 100;
    const FeatureRecord& r = dataset.records.front();
    CHECK(format_date(r.date) == format_date(series.entries[i].date));
    CHECK(r.x[0] == doctest::Approx(closes[i] - ema100[i]).epsilon(1e-12));
    CHECK(r.x[1] == doctest::Approx((closes[i] - closes[i - 5]) / closes[i - 5] * 100.0));
    CHECK(r.x[2] == doctest::Approx((closes[i] - closes[i - 10]) / closes[i - 10] * 100.0));
    CHECK(r.x[3] == doctest::Approx((closes[i] - closes[i - 15]) / closes[i - 15] * 100.0));
    CHECK(r.x[4] == doctest::Approx((closes[i] - closes[i - 20]) / closes[i - 20] * 100.0));
    CHECK(r.y == doctest::Approx((ema3[i + 5] - ema3[i]) / ema3[i] * 100.0));
}

TEST_CASE("build_features needs the minimum series length") {
    CHECK_THROWS_AS(build_features(testsup::ar_price_series(kMinSeriesLength - 1, 3)), DataError);
    CHECK(build_features(testsup::ar_price_series(kMinSeriesLength, 3)).size() == 1);
}

TEST_CASE("constant prices produce all-zero features") {
    FeatureDataset dataset = build_features(testsup::constant_series(120));
    for (const auto& r : dataset.records) {
        // The EMA of a constant equals the constant, so x1 collapses too.
        for (double v : r.x) CHECK(std::fabs(v) < 1e-9);
        CHECK(std::fabs(r.y) < 1e-9);
    }
}

TEST_CASE("fit_scaling standardizes train inputs and flags zero variance") {
    auto dataset = build_features(testsup::ar_price_series(300, 11));
    Scaling scaling = fit_scaling(dataset);
    FeatureDataset scaled = apply_scaling(dataset, scaling);
    CHECK(scaled.scaling.has_value());

    for (std::size_t d = 0; d < kInputDim; ++d) {
        double mean = 0.0;
        for (const auto& r : scaled.records) mean += r.x[d];
        mean /= static_cast<double>(scaled.size());
        CHECK(std::fabs(mean) < 1e-10);
        double var = 0.0;
        for (const auto& r : scaled.records) var += (r.x[d] - mean) * (r.x[d] - mean);
        var /= static_cast<double>(scaled.size()) - 1.0;  // same n-1 convention as the fit
        CHECK(var == doctest::Approx(1.0).epsilon(1e-10));
    }

    FeatureDataset degenerate = build_features(testsup::constant_series(120));
    CHECK_THROWS_AS(fit_scaling(degenerate), DataError);
    CHECK_THROWS_AS(fit_scaling(FeatureDataset{}), DataError);
}

TEST_CASE("invert_scaling undoes apply_scaling") {
    auto dataset = build_features(testsup::ar_price_series(200, 13));
    Scaling scaling = fit_scaling(dataset);
    FeatureDataset scaled = apply_scaling(dataset, scaling);
    FeatureDataset back = invert_scaling(scaled);
    CHECK(!back.scaling.has_value());
    REQUIRE(back.size() == dataset.size());
    for (std::size_t k = 0; k < dataset.size(); ++k)
        for (std::size_t d = 0; d < kInputDim; ++d)
            CHECK(back.records[k].x[d] ==
                  doctest::Approx(dataset.records[k].x[d]).epsilon(1e-12));
    CHECK_THROWS_AS(invert_scaling(dataset), ParamError);  // nothing to invert
    CHECK_THROWS_AS(apply_scaling(scaled, scaling), ParamError);  // already scaled
}

TEST_CASE("split_train_test keeps the last n_test records for test") {
    auto dataset = build_features(testsup::ar_price_series(200, 17));
    auto [train, test] = split_train_test(dataset, 30);
    CHECK(train.size() == dataset.size() - 30);
    CHECK(test.size() == 30);
    CHECK(format_date(test.records.back().date) ==
          format_date(dataset.records.back().date));
    CHECK(format_date(train.records.front().date) ==
          format_date(dataset.records.front().date));
    CHECK_THROWS_AS(split_train_test(dataset, 0), ParamError);
    CHECK_THROWS_AS(split_train_test(dataset, dataset.size()), ParamError);
}

TEST_CASE("feature csv round-trips records exactly") {
    auto dataset = build_features(testsup::ar_price_series(180, 19));
    std::string csv = to_csv(dataset);
    std::istringstream in(csv);
    FeatureDataset parsed = parse_feature_csv(in);
    REQUIRE(parsed.size() == dataset.size());
    for (std::size_t k = 0; k < dataset.size(); ++k) {
        CHECK(format_date(parsed.records[k].date) == format_date(dataset.records[k].date));
        for (std::size_t d = 0; d < kInputDim; ++d)
            CHECK(parsed.records[k].x[d] == dataset.records[k].x[d]);
        CHECK(parsed.records[k].y == dataset.records[k].y);
    }
    CHECK(fingerprint(parsed) == fingerprint(dataset));
}

TEST_CASE("fingerprint is order- and value-sensitive") {
    auto a = build_features(testsup::ar_price_series(150, 23));
    auto b = a;
    b.records[0].x[2] += 1e-9;
    CHECK(fingerprint(a) != fingerprint(b));
    auto c = a;
    std::swap(c.records[0], c.records[1]);
    CHECK(fingerprint(a) != fingerprint(c));
}
