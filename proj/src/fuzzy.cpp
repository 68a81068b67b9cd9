#include "fsvr/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "fsvr/errors.hpp"

namespace fsvr {

namespace {

// Below this log-activation, exp() is a hard 0 in double precision for
// every rule, and normalized inference has no denominator to work with.
constexpr double kUnderflowLog = -745.0;

void check_rule(const FuzzyRule& rule, const std::vector<double>& x) {
    if (rule.centers.size() != x.size() || rule.widths.size() != x.size())
        throw ParamError("fuzzy rule dimension " + std::to_string(rule.centers.size()) +
                         " does not match input dimension " + std::to_string(x.size()));
}

struct NormalizedParts {
    double value = 0.0;      // inference result including offset
    double centered = 0.0;   // value minus offset
    double denom = 0.0;      // sum of shifted activations
    std::vector<double> w;   // shifted activations exp(log_j - top)
    bool underflow = false;  // every activation is exactly 0 in double
    std::size_t strongest = 0;
};

NormalizedParts normalized_inference(const RuleSet& ruleset, const std::vector<double>& x) {
    NormalizedParts parts;
    const std::size_t m = ruleset.rules.size();
    std::vector<double> logs(m);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
        logs[j] = log_activation(ruleset.rules[j], x);
        if (logs[j] > top) {
            top = logs[j];
            parts.strongest = j;
        }
    }
    if (top <= kUnderflowLog) {
        parts.underflow = true;
        parts.centered = ruleset.rules[parts.strongest].consequent;
        parts.value = parts.centered + ruleset.offset;
        return parts;
    }
    parts.w.resize(m);
    double num = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        parts.w[j] = std::exp(logs[j] - top);
        parts.denom += parts.w[j];
        num += ruleset.rules[j].consequent * parts.w[j];
    }
    parts.centered = num / parts.denom;
    parts.value = parts.centered + ruleset.offset;
    return parts;
}

// %.2f with "-0.00" folded to "0.00".
std::string format2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    if (std::strcmp(buf, "-0.00") == 0) return "0.00";
    return buf;
}

}  // namespace

double membership(double x, double c, double sigma) {
    if (!(sigma > 0.0)) throw ParamError("membership: sigma must be > 0");
    const double d = x - c;
    return std::exp(-d * d / (2.0 * sigma * sigma));
}

double rule_activation(const FuzzyRule& rule, const std::vector<double>& x) {
    check_rule(rule, x);
    double product = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        product *= membership(x[i], rule.centers[i], rule.widths[i]);
    return product;
}

double log_activation(const FuzzyRule& rule, const std::vector<double>& x) {
    check_rule(rule, x);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(rule.widths[i] > 0.0)) throw ParamError("log_activation: width must be > 0");
        const double d = x[i] - rule.centers[i];
        sum -= d * d / (2.0 * rule.widths[i] * rule.widths[i]);
    }
    return sum;
}

double infer(const RuleSet& ruleset, const std::vector<double>& x) {
    if (ruleset.trivial || ruleset.rules.empty()) return ruleset.offset;
    if (ruleset.mode == InferenceMode::Additive) {
        double acc = 0.0;
        for (const auto& rule : ruleset.rules) acc += rule.consequent * rule_activation(rule, x);
        return acc + ruleset.offset;
    }
    return normalized_inference(ruleset, x).value;
}

std::vector<double> infer(const RuleSet& ruleset, const std::vector<std::vector<double>>& rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(infer(ruleset, row));
    return out;
}

RuleSet extract_rules(const SvrModel& model) {
    if (model.kernel != KernelKind::NormalizedGaussian)
        throw ContractError("extract_rules: model must use the normalized Gaussian kernel");
    if (model.bias != 0.0)
        throw ContractError("extract_rules: model bias must be 0");
    RuleSet ruleset;
    ruleset.offset = model.offset;
    ruleset.mode = InferenceMode::Normalized;
    if (model.trivial || model.sv_count() == 0) {
        ruleset.trivial = true;
        return ruleset;
    }
    const std::size_t dim = model.support_vectors[0].size();
    ruleset.rules.reserve(model.sv_count());
    for (std::size_t j = 0; j < model.sv_count(); ++j) {
        FuzzyRule rule;
        rule.centers = model.support_vectors[j];
        rule.widths.assign(dim, model.sigmas[j]);
        rule.consequent = model.beta[j];
        ruleset.rules.push_back(std::move(rule));
    }
    return ruleset;
}

InferGradient infer_gradient(const RuleSet& ruleset, const std::vector<double>& x) {
    InferGradient grad;
    const std::size_t m = ruleset.rules.size();
    grad.d_center.assign(m, std::vector<double>(x.size(), 0.0));
    grad.d_width.assign(m, std::vector<double>(x.size(), 0.0));
    if (ruleset.trivial || m == 0) {
        grad.value = ruleset.offset;
        return grad;
    }
    const NormalizedParts parts = normalized_inference(ruleset, x);
    grad.value = parts.value;
    if (parts.underflow) return grad;  // flat fallback region
    for (std::size_t j = 0; j < m; ++j) {
        const FuzzyRule& rule = ruleset.rules[j];
        const double common = (rule.consequent - parts.centered) * parts.w[j] / parts.denom;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - rule.centers[i];
            const double s = rule.widths[i];
            grad.d_center[j][i] = common * d / (s * s);
            grad.d_width[j][i] = common * d * d / (s * s * s);
        }
    }
    return grad;
}

double ruleset_mse(const RuleSet& ruleset, const std::vector<std::vector<double>>& rows,
                   const std::vector<double>& targets) {
    if (rows.size() != targets.size()) throw ParamError("ruleset_mse: row/target count mismatch");
    if (rows.empty()) throw ParamError("ruleset_mse: no data");
    double sse = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double e = infer(ruleset, rows[r]) - targets[r];
        sse += e * e;
    }
    return sse / static_cast<double>(rows.size());
}

RefineResult refine_rules(const RuleSet& ruleset, const std::vector<std::vector<double>>& rows,
                          const std::vector<double>& targets, const RefineConfig& config) {
    if (ruleset.trivial || ruleset.rules.empty())
        throw ContractError("refine_rules: nothing to refine in a trivial ruleset");
    if (ruleset.mode != InferenceMode::Normalized)
        throw ContractError("refine_rules: only normalized-mode rulesets are refined");
    if (!(config.learning_rate > 0.0)) throw ParamError("refine_rules: learning_rate must be > 0");
    if (!(config.min_width > 0.0)) throw ParamError("refine_rules: min_width must be > 0");
    if (rows.size() != targets.size() || rows.empty())
        throw ParamError("refine_rules: need matching, non-empty rows and targets");

    RefineResult result;
    RuleSet current = ruleset;
    double best_mse = ruleset_mse(current, rows, targets);
    result.ruleset = current;
    result.epoch_mse.push_back(best_mse);
    result.best_epoch = 0;

    std::size_t growth_streak = 0;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const InferGradient g = infer_gradient(current, rows[r]);
            const double err = g.value - targets[r];
            for (std::size_t j = 0; j < current.rules.size(); ++j) {
                FuzzyRule& rule = current.rules[j];
                for (std::size_t i = 0; i < rule.centers.size(); ++i) {
                    rule.centers[i] -= config.learning_rate * err * g.d_center[j][i];
                    rule.widths[i] = std::max(
                        config.min_width,
                        rule.widths[i] - config.learning_rate * err * g.d_width[j][i]);
                }
            }
        }
        const double mse = ruleset_mse(current, rows, targets);
        result.epoch_mse.push_back(mse);
        if (mse < best_mse) {
            best_mse = mse;
            result.ruleset = current;
            result.best_epoch = epoch;
        }
        if (mse > result.epoch_mse[epoch - 1]) {
            if (++growth_streak == 3) {
                result.diverged = true;
                return result;
            }
        } else {
            growth_streak = 0;
        }
    }
    return result;
}

std::string export_rules(const RuleSet& ruleset) {
    if (ruleset.trivial || ruleset.rules.empty())
        return "# constant output: y=" + format2(ruleset.offset) + "\n";
    std::string out;
    for (std::size_t k = 0; k < ruleset.rules.size(); ++k) {
        const FuzzyRule& rule = ruleset.rules[k];
        out += "R" + std::to_string(k + 1) + ": IF";
        for (std::size_t i = 0; i < rule.centers.size(); ++i) {
            if (i > 0) out += " and";
            out += " x" + std::to_string(i + 1) + "=Gaussmf(" + format2(rule.widths[i]) + "," +
                   format2(rule.centers[i]) + ")";
        }
        out += " THEN y=" + format2(rule.consequent) + "\n";
    }
    return out;
}

}  // namespace fsvr
