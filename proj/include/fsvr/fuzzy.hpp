#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fsvr/svr.hpp"

namespace fsvr {

// One IF-THEN rule: Gaussian antecedent per input dimension, scalar
// consequent.
struct FuzzyRule {
    std::vector<double> centers;
    std::vector<double> widths;  // all > 0
    double consequent = 0.0;
};

enum class InferenceMode { Normalized, Additive };

struct RuleSet {
    std::vector<FuzzyRule> rules;
    double offset = 0.0;  // added to every inference result
    InferenceMode mode = InferenceMode::Normalized;
    bool trivial = false;  // no rules; inference returns offset

    std::size_t rule_count() const { return rules.size(); }
};

struct RefineConfig {
    double learning_rate = 0.01;
    std::size_t epochs = 50;
    double min_width = 1e-3;  // floor for widths during updates
};

struct RefineResult {
    RuleSet ruleset;
    bool diverged = false;          // stopped early on sustained error growth
    std::vector<double> epoch_mse;  // entry 0 = before training, then one per epoch run
    std::size_t best_epoch = 0;     // index into epoch_mse of the returned snapshot
};

// exp(-(x-c)^2 / (2 sigma^2))
double membership(double x, double c, double sigma);

// Product of per-dimension memberships.
double rule_activation(const FuzzyRule& rule, const std::vector<double>& x);

// log(rule_activation), computed without underflow.
double log_activation(const FuzzyRule& rule, const std::vector<double>& x);

// Normalized mode: offset + sum_j z_j w_j / sum_j w_j over rule
// activations w_j, evaluated in log space. When every activation
// underflows double precision entirely, falls back to the consequent of
// the strongest rule (plus offset). Additive mode drops the
// denominator: offset + sum_j z_j w_j, with raw activations — a
// demonstration mode, not the prediction path.
double infer(const RuleSet& ruleset, const std::vector<double>& x);

std::vector<double> infer(const RuleSet& ruleset, const std::vector<std::vector<double>>& rows);

// Maps a normalized-kernel zero-bias SVR into an equivalent rule base:
// one rule per support vector (centers = SV coordinates, widths = that
// SV's kernel width in every dimension, consequent = its coefficient).
// Normalized-mode inference on the result reproduces predict_svr
// pointwise. Plain-kernel input is a contract error.
RuleSet extract_rules(const SvrModel& model);

// Partial derivatives of normalized-mode inference at x with respect to
// every rule's centers and widths, plus the value itself.
struct InferGradient {
    double value = 0.0;
    std::vector<std::vector<double>> d_center;  // [rule][dim]
    std::vector<std::vector<double>> d_width;   // [rule][dim]
};

InferGradient infer_gradient(const RuleSet& ruleset, const std::vector<double>& x);

// Mean of (infer(x) - y)^2 over the data.
double ruleset_mse(const RuleSet& ruleset, const std::vector<std::vector<double>>& rows,
                   const std::vector<double>& targets);

// Online gradient descent on squared prediction error: each epoch walks
// the records in order and moves every rule's centers and widths down
// the error gradient (consequents stay fixed; widths clamp at
// min_width). Keeps the best-epoch snapshot by training MSE; stops
// early and flags divergence after three consecutive epochs of MSE
// growth.
RefineResult refine_rules(const RuleSet& ruleset, const std::vector<std::vector<double>>& rows,
                          const std::vector<double>& targets, const RefineConfig& config);

// One line per rule: "R1: IF x1=Gaussmf(0.09,-0.11) and ... THEN
// y=0.10" with width printed before center, everything rounded to two
// decimals. A trivial ruleset exports a single comment line with its
// constant output.
std::string export_rules(const RuleSet& ruleset);

}  // namespace fsvr
