#pragma once

// Shared fixtures and reference implementations for the test binaries.
// The oracles here are deliberately slow and dumb: grid search instead of
// an optimizer, per-element loops instead of fused passes. They exist so
// the fast library code has something independent to disagree with.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fsvr/dataset.hpp"
#include "fsvr/fuzzy.hpp"
#include "fsvr/rng.hpp"
#include "fsvr/svr.hpp"

namespace testsup {

inline double gaussian_draw(fsvr::Rng& rng) {
    // Box-Muller; one value per call is plenty for fixtures.
    double u1 = rng.uniform();
    double u2 = rng.uniform();
    while (u1 <= 1e-300) u1 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline fsvr::Date day_offset(int offset) {
    using namespace std::chrono;
    return fsvr::Date{sys_days{year{2015} / January / 1} + days{offset}};
}

inline fsvr::PriceSeries series_from_closes(const std::vector<double>& closes) {
    fsvr::PriceSeries series;
    series.entries.reserve(closes.size());
    for (std::size_t i = 0; i < closes.size(); ++i)
        series.entries.push_back({day_offset(static_cast<int>(i)), closes[i]});
    return series;
}

// Mean-reverting log-return series: persistent returns make the horizon
// move predictable, so a sane model should beat the trivial baseline.
inline fsvr::PriceSeries ar_price_series(std::size_t n, std::uint64_t seed,
                                         double phi = 0.7, double noise = 0.01) {
    fsvr::Rng rng(seed);
    std::vector<double> closes(n);
    double log_price = std::log(100.0);
    double ret = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ret = phi * ret + noise * gaussian_draw(rng);
        log_price += ret;
        closes[i] = std::exp(log_price);
    }
    return series_from_closes(closes);
}

// Second-order autoregression with complex roots: log returns oscillate
// with a noisy ~`period`-step cycle, so the several-step-ahead move is
// genuinely forecastable from lagged returns (direction included), unlike
// the first-order case where one-step noise swamps the increments.
inline fsvr::PriceSeries ar2_price_series(std::size_t n, std::uint64_t seed, double rho = 0.97,
                                          double period = 25.0, double noise = 0.004) {
    const double theta = 2.0 * 3.14159265358979323846 / period;
    const double a1 = 2.0 * rho * std::cos(theta);
    const double a2 = -rho * rho;
    fsvr::Rng rng(seed);
    std::vector<double> closes(n);
    double log_price = std::log(100.0);
    double r1 = 0.0, r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ret = a1 * r1 + a2 * r2 + noise * gaussian_draw(rng);
        r2 = r1;
        r1 = ret;
        log_price += ret;
        closes[i] = std::exp(log_price);
    }
    return series_from_closes(closes);
}

// Independent log returns: nothing to learn, NMSE should sit near 1.
inline fsvr::PriceSeries random_walk_series(std::size_t n, std::uint64_t seed,
                                            double noise = 0.01) {
    fsvr::Rng rng(seed);
    std::vector<double> closes(n);
    double log_price = std::log(100.0);
    for (std::size_t i = 0; i < n; ++i) {
        log_price += noise * gaussian_draw(rng);
        closes[i] = std::exp(log_price);
    }
    return series_from_closes(closes);
}

inline fsvr::PriceSeries constant_series(std::size_t n, double price = 50.0) {
    return series_from_closes(std::vector<double>(n, price));
}

// ---------------------------------------------------------------------------
// Brute-force reference for the equality-constrained box dual:
//   maximize  sum z_k b_k - 0.5 b'Qb - eps * sum |b_k|
//   s.t.      sum b_k = 0,  |b_k| <= C
// The last coefficient is eliminated through the equality constraint and
// the rest are scanned on a regular grid, refined around the incumbent.

inline double dual_value(const std::vector<std::vector<double>>& q,
                         const std::vector<double>& z,
                         const std::vector<double>& beta, double epsilon) {
    const std::size_t n = beta.size();
    double value = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        value += z[k] * beta[k] - epsilon * std::fabs(beta[k]);
        for (std::size_t l = 0; l < n; ++l) value -= 0.5 * beta[k] * q[k][l] * beta[l];
    }
    return value;
}

struct GridSolution {
    std::vector<double> beta;
    double objective = 0.0;
};

inline GridSolution grid_search_dual(const std::vector<std::vector<double>>& q,
                                     const std::vector<double>& z, double c,
                                     double epsilon, int steps = 2000,
                                     int refinements = 6) {
    const std::size_t n = z.size();
    GridSolution best;
    best.beta.assign(n, 0.0);
    best.objective = dual_value(q, z, best.beta, epsilon);

    auto consider = [&](const std::vector<double>& beta) {
        double value = dual_value(q, z, beta, epsilon);
        if (value > best.objective) {
            best.objective = value;
            best.beta = beta;
        }
    };

    if (n == 2) {
        double lo = -c, hi = c;
        for (int pass = 0; pass < refinements; ++pass) {
            double width = (hi - lo) / steps;
            for (int s = 0; s <= steps; ++s) {
                double b0 = lo + s * width;
                consider({b0, -b0});
            }
            lo = std::max(-c, best.beta[0] - 2.0 * width);
            hi = std::min(c, best.beta[0] + 2.0 * width);
        }
        return best;
    }

    // n == 3: scan (b0, b1), b2 = -(b0+b1) when it fits the box.
    double lo0 = -c, hi0 = c, lo1 = -c, hi1 = c;
    int coarse = std::min(steps, 400);
    for (int pass = 0; pass < refinements; ++pass) {
        double w0 = (hi0 - lo0) / coarse;
        double w1 = (hi1 - lo1) / coarse;
        for (int s0 = 0; s0 <= coarse; ++s0) {
            double b0 = lo0 + s0 * w0;
            for (int s1 = 0; s1 <= coarse; ++s1) {
                double b1 = lo1 + s1 * w1;
                double b2 = -(b0 + b1);
                if (std::fabs(b2) > c) continue;
                consider({b0, b1, b2});
            }
        }
        lo0 = std::max(-c, best.beta[0] - 2.0 * w0);
        hi0 = std::min(c, best.beta[0] + 2.0 * w0);
        lo1 = std::max(-c, best.beta[1] - 2.0 * w1);
        hi1 = std::min(c, best.beta[1] + 2.0 * w1);
    }
    return best;
}

inline std::vector<std::vector<double>> gaussian_gram(
    const std::vector<std::vector<double>>& rows, double sigma) {
    const std::size_t n = rows.size();
    std::vector<std::vector<double>> q(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            q[i][j] = fsvr::gaussian_kernel(rows[i], rows[j], sigma);
    return q;
}

// ---------------------------------------------------------------------------
// Random fuzzy fixtures.

inline fsvr::RuleSet random_ruleset(fsvr::Rng& rng, std::size_t n_rules,
                                    std::size_t dim, double offset = 0.0) {
    fsvr::RuleSet ruleset;
    ruleset.offset = offset;
    ruleset.rules.reserve(n_rules);
    for (std::size_t r = 0; r < n_rules; ++r) {
        fsvr::FuzzyRule rule;
        rule.centers.resize(dim);
        rule.widths.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            rule.centers[i] = rng.uniform(-2.0, 2.0);
            rule.widths[i] = rng.uniform(0.3, 2.0);
        }
        rule.consequent = rng.uniform(-3.0, 3.0);
        ruleset.rules.push_back(std::move(rule));
    }
    return ruleset;
}

inline std::vector<double> random_point(fsvr::Rng& rng, std::size_t dim,
                                        double lo = -3.0, double hi = 3.0) {
    std::vector<double> x(dim);
    for (auto& v : x) v = rng.uniform(lo, hi);
    return x;
}

// A small trained model whose every training point stays a support vector:
// a noisy sine sampled sparsely, with the tube narrow enough that nothing
// lands strictly inside it.
inline std::pair<std::vector<std::vector<double>>, std::vector<double>> sine_fixture(
    std::size_t n, std::uint64_t seed, double noise = 0.05) {
    fsvr::Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    rows.reserve(n);
    targets.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(n - 1) * 6.0 - 3.0;
        rows.push_back({t});
        targets.push_back(std::sin(t) + noise * gaussian_draw(rng));
    }
    return {rows, targets};
}

}  // namespace testsup
