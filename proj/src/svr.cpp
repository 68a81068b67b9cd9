#include "fsvr/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fsvr/errors.hpp"

namespace fsvr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Coefficients at or below this are not support vectors.
double sv_threshold(double c) { return 1e-12 * std::max(1.0, c); }

void validate_config(const SvrConfig& config) {
    if (!(config.c > 0.0)) throw ParamError("svr: C must be > 0");
    if (!(config.epsilon >= 0.0)) throw ParamError("svr: epsilon must be >= 0");
    if (!(config.sigma > 0.0)) throw ParamError("svr: sigma must be > 0");
    if (!(config.tolerance > 0.0)) throw ParamError("svr: tolerance must be > 0");
}

// Gram matrix of the model's kernel over its own support vectors:
// entry (k, l) is kernel l evaluated at support vector k.
std::vector<std::vector<double>> model_gram(const SvrModel& model) {
    const std::size_t m = model.sv_count();
    std::vector<std::vector<double>> q(m, std::vector<double>(m));
    for (std::size_t k = 0; k < m; ++k) {
        if (model.kernel == KernelKind::NormalizedGaussian) {
            q[k] = normalized_gaussian_weights(model.support_vectors[k], model.support_vectors,
                                               model.sigmas);
        } else {
            for (std::size_t l = 0; l < m; ++l)
                q[k][l] = gaussian_kernel(model.support_vectors[k], model.support_vectors[l],
                                          model.sigmas[l]);
        }
    }
    return q;
}

// Gain of increasing beta_i by an infinitesimal step (the |beta| kink
// makes the rate depend on the current sign).
double up_gain(double f, double beta, double epsilon) {
    return beta >= 0.0 ? f - epsilon : f + epsilon;
}

// Gain of decreasing beta_j.
double down_gain(double f, double beta, double epsilon) {
    return beta <= 0.0 ? -f - epsilon : -f + epsilon;
}

// Largest first-order improvement available to any feasible pair step,
// given residuals f = z - q*beta. Non-positive at an optimum.
double pair_gap(const std::vector<double>& beta, const std::vector<double>& f, double c,
                double epsilon) {
    double best_up = -kInf, best_dn = -kInf;
    for (std::size_t i = 0; i < beta.size(); ++i) {
        if (beta[i] < c) best_up = std::max(best_up, up_gain(f[i], beta[i], epsilon));
        if (beta[i] > -c) best_dn = std::max(best_dn, down_gain(f[i], beta[i], epsilon));
    }
    if (best_up == -kInf || best_dn == -kInf) return -kInf;
    return best_up + best_dn;
}

}  // namespace

double gaussian_kernel(const std::vector<double>& a, const std::vector<double>& b, double sigma) {
    if (a.size() != b.size())
        throw ParamError("gaussian_kernel: dimension mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
    if (!(sigma > 0.0)) throw ParamError("gaussian_kernel: sigma must be > 0");
    return std::exp(-sq_distance(a, b) / (2.0 * sigma * sigma));
}

std::vector<double> normalized_gaussian_weights(const std::vector<double>& x,
                                                const std::vector<std::vector<double>>& centers,
                                                const std::vector<double>& sigmas) {
    if (centers.empty()) throw ParamError("normalized_gaussian_weights: no centers");
    if (sigmas.size() != centers.size())
        throw ParamError("normalized_gaussian_weights: need one sigma per center");
    const std::size_t m = centers.size();
    std::vector<double> logs(m);
    for (std::size_t j = 0; j < m; ++j) {
        if (centers[j].size() != x.size())
            throw ParamError("normalized_gaussian_weights: center dimension mismatch");
        if (!(sigmas[j] > 0.0)) throw ParamError("normalized_gaussian_weights: sigma must be > 0");
        logs[j] = -sq_distance(x, centers[j]) / (2.0 * sigmas[j] * sigmas[j]);
    }
    // Shift by the max before exponentiating so the largest term is
    // exactly 1 and the sum can never underflow to 0.
    const double top = *std::max_element(logs.begin(), logs.end());
    std::vector<double> w(m);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        w[j] = std::exp(logs[j] - top);
        total += w[j];
    }
    for (double& v : w) v /= total;
    return w;
}

double normalized_gaussian_kernel(const std::vector<double>& x,
                                  const std::vector<std::vector<double>>& centers,
                                  const std::vector<double>& sigmas, std::size_t j) {
    if (j >= centers.size()) throw ParamError("normalized_gaussian_kernel: center index out of range");
    return normalized_gaussian_weights(x, centers, sigmas)[j];
}

double dual_objective(const std::vector<std::vector<double>>& q, const std::vector<double>& z,
                      const std::vector<double>& beta, double epsilon) {
    const std::size_t n = z.size();
    if (beta.size() != n || q.size() != n)
        throw ParamError("dual_objective: size mismatch");
    double value = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (q[k].size() != n) throw ParamError("dual_objective: gram matrix not square");
        value += z[k] * beta[k] - epsilon * std::fabs(beta[k]);
        double row = 0.0;
        for (std::size_t l = 0; l < n; ++l) row += q[k][l] * beta[l];
        value -= 0.5 * beta[k] * row;
    }
    return value;
}

std::vector<double> solve_dual(const std::vector<std::vector<double>>& q,
                               const std::vector<double>& z, double c, double epsilon,
                               double tolerance, std::size_t max_passes) {
    const std::size_t n = z.size();
    if (q.size() != n) throw ParamError("solve_dual: gram size mismatch");
    for (const auto& row : q)
        if (row.size() != n) throw ParamError("solve_dual: gram matrix not square");
    if (!(c > 0.0) || !(epsilon >= 0.0) || !(tolerance > 0.0))
        throw ParamError("solve_dual: need c > 0, epsilon >= 0, tolerance > 0");
    if (n == 0) return {};
    if (n == 1) return {0.0};  // the zero-sum constraint pins a single coefficient

    // Only the symmetric part matters to the objective; using it also
    // keeps the residual update consistent with the true gradient.
    std::vector<std::vector<double>> qs(n, std::vector<double>(n));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) qs[k][l] = 0.5 * (q[k][l] + q[l][k]);

    std::vector<double> beta(n, 0.0);
    std::vector<double> f = z;  // residuals z - qs*beta
    // Auto budget: 10n passes scales fine for big problems but starves small
    // ones (a 10-point normalized gram can need ~1000 passes), so floor it.
    const std::size_t passes = max_passes ? max_passes : std::max<std::size_t>(10 * n, 2000);
    const std::size_t update_cap = passes * n;
    double best_gap = kInf;

    auto refresh_residuals = [&] {
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t l = 0; l < n; ++l) acc += qs[k][l] * beta[l];
            f[k] = z[k] - acc;
        }
    };

    for (std::size_t update = 0; update <= update_cap; ++update) {
        // Maximal-violating pair: best index to raise, best to lower.
        std::size_t i = n, j = n;
        double best_up = -kInf, best_dn = -kInf;
        for (std::size_t k = 0; k < n; ++k) {
            if (beta[k] < c) {
                const double g = up_gain(f[k], beta[k], epsilon);
                if (g > best_up) {
                    best_up = g;
                    i = k;
                }
            }
            if (beta[k] > -c) {
                const double g = down_gain(f[k], beta[k], epsilon);
                if (g > best_dn) {
                    best_dn = g;
                    j = k;
                }
            }
        }
        const double gap = (i == n || j == n) ? -kInf : best_up + best_dn;
        best_gap = std::min(best_gap, gap);
        if (gap <= tolerance) return beta;
        if (update == update_cap) break;

        // Exact one-dimensional step: maximize
        //   delta(t) = t(f_i - f_j) - t^2 qq / 2
        //            - eps(|b_i + t| - |b_i|) - eps(|b_j - t| - |b_j|)
        // over 0 < t <= t_max. Piecewise quadratic with kinks where a
        // coefficient crosses zero; evaluating every kink, endpoint and
        // per-piece stationary point finds the maximum exactly.
        const double t_max = std::min(c - beta[i], beta[j] + c);
        const double qq = qs[i][i] + qs[j][j] - 2.0 * qs[i][j];
        const double slope = f[i] - f[j];
        const double bi = beta[i], bj = beta[j];
        auto delta = [&](double t) {
            return t * slope - 0.5 * t * t * qq -
                   epsilon * (std::fabs(bi + t) - std::fabs(bi)) -
                   epsilon * (std::fabs(bj - t) - std::fabs(bj));
        };

        double candidates[8];
        std::size_t n_cand = 0;
        auto add = [&](double t) {
            if (t > 0.0 && t <= t_max) candidates[n_cand++] = t;
        };
        add(t_max);
        if (bi < 0.0) add(-bi);
        if (bj > 0.0) add(bj);
        if (qq > 0.0) {
            // One stationary point per sign combination; out-of-piece
            // values are harmless extra candidates.
            for (double si : {-1.0, 1.0})
                for (double sj : {-1.0, 1.0}) add((slope - epsilon * si + epsilon * sj) / qq);
        }

        double best_t = 0.0, best_delta = 0.0;
        for (std::size_t k = 0; k < n_cand; ++k) {
            const double d = delta(candidates[k]);
            if (d > best_delta) {
                best_delta = d;
                best_t = candidates[k];
            }
        }
        if (best_t <= 0.0) break;  // no computable progress despite the gap

        beta[i] = std::clamp(beta[i] + best_t, -c, c);
        beta[j] = std::clamp(beta[j] - best_t, -c, c);
        if ((update + 1) % (16 * n) == 0) {
            refresh_residuals();
        } else {
            for (std::size_t k = 0; k < n; ++k) f[k] -= best_t * (qs[k][i] - qs[k][j]);
        }
    }

    throw TrainingError("svr solver did not converge: optimality gap " + std::to_string(best_gap) +
                            " above tolerance " + std::to_string(tolerance) + " after " +
                            std::to_string(passes) + " passes",
                        best_gap);
}

SvrModel train_svr(const SvrConfig& config, const std::vector<std::vector<double>>& rows,
                   const std::vector<double>& targets) {
    validate_config(config);
    if (rows.size() != targets.size())
        throw ParamError("train_svr: row/target count mismatch");
    if (rows.size() < 2) throw ParamError("train_svr: need at least 2 records");
    const std::size_t n = rows.size();
    const std::size_t dim = rows[0].size();
    if (dim == 0) throw ParamError("train_svr: empty input vectors");
    for (const auto& row : rows) {
        if (row.size() != dim) throw ParamError("train_svr: inconsistent input dimensions");
        for (double v : row)
            if (!std::isfinite(v)) throw DataError("train_svr: non-finite input value");
    }
    for (double y : targets)
        if (!std::isfinite(y)) throw DataError("train_svr: non-finite target value");

    double offset = 0.0;
    for (double y : targets) offset += y;
    offset /= static_cast<double>(n);
    std::vector<double> z(n);
    for (std::size_t k = 0; k < n; ++k) z[k] = targets[k] - offset;

    SvrModel model;
    model.kernel = KernelKind::NormalizedGaussian;
    model.offset = offset;
    const double thresh = sv_threshold(config.c);

    // Phase 1: plain Gaussian kernel over all rows picks the SV set.
    std::vector<std::vector<double>> q1(n, std::vector<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        q1[k][k] = 1.0;
        for (std::size_t l = 0; l < k; ++l) {
            const double v = gaussian_kernel(rows[k], rows[l], config.sigma);
            q1[k][l] = v;
            q1[l][k] = v;
        }
    }
    const std::vector<double> beta1 =
        solve_dual(q1, z, config.c, config.epsilon, config.tolerance, config.max_passes);

    std::vector<std::size_t> selected;
    for (std::size_t k = 0; k < n; ++k)
        if (std::fabs(beta1[k]) > thresh) selected.push_back(k);
    if (selected.empty()) {
        model.trivial = true;  // every target inside the tube
        return model;
    }

    // Phase 2: same points and targets, kernel re-anchored at the
    // phase-1 support vectors and normalized over them.
    const std::size_t m = selected.size();
    std::vector<std::vector<double>> centers(m);
    std::vector<double> z2(m);
    for (std::size_t k = 0; k < m; ++k) {
        centers[k] = rows[selected[k]];
        z2[k] = z[selected[k]];
    }
    const std::vector<double> sigmas(m, config.sigma);
    std::vector<std::vector<double>> q2(m);
    for (std::size_t k = 0; k < m; ++k)
        q2[k] = normalized_gaussian_weights(centers[k], centers, sigmas);
    const std::vector<double> beta2 =
        solve_dual(q2, z2, config.c, config.epsilon, config.tolerance, config.max_passes);

    // Keep every phase-1 center, even with tiny beta2: the normalized kernel
    // divides by the sum over all centers, so dropping one reshapes every
    // weight and the deployed function would no longer be the one optimized.
    double biggest = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        model.support_vectors.push_back(centers[k]);
        model.beta.push_back(beta2[k]);
        model.sigmas.push_back(config.sigma);
        model.sv_indices.push_back(selected[k]);
        biggest = std::max(biggest, std::fabs(beta2[k]));
    }
    if (biggest <= thresh) {
        model = SvrModel{};
        model.kernel = KernelKind::NormalizedGaussian;
        model.offset = offset;
        model.trivial = true;
    }
    return model;
}

double predict_svr(const SvrModel& model, const std::vector<double>& x) {
    if (model.trivial || model.sv_count() == 0) return model.offset;
    if (x.size() != model.support_vectors[0].size())
        throw ParamError("predict_svr: input dimension mismatch");
    double acc = 0.0;
    if (model.kernel == KernelKind::NormalizedGaussian) {
        const std::vector<double> w =
            normalized_gaussian_weights(x, model.support_vectors, model.sigmas);
        for (std::size_t j = 0; j < w.size(); ++j) acc += model.beta[j] * w[j];
    } else {
        for (std::size_t j = 0; j < model.sv_count(); ++j)
            acc += model.beta[j] * gaussian_kernel(model.support_vectors[j], x, model.sigmas[j]);
    }
    return acc + model.offset;
}

std::vector<double> predict_svr(const SvrModel& model,
                                const std::vector<std::vector<double>>& rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(predict_svr(model, row));
    return out;
}

KktReport kkt_report(const SvrModel& model, const SvrConfig& config,
                     const std::vector<std::vector<double>>& rows,
                     const std::vector<double>& targets) {
    validate_config(config);
    KktReport report;
    if (model.trivial || model.sv_count() == 0) {
        report.max_violation = 0.0;
        report.converged = true;
        return report;
    }
    const std::size_t m = model.sv_count();
    if (model.beta.size() != m || model.sigmas.size() != m || model.sv_indices.size() != m)
        throw ParamError("kkt_report: inconsistent model field sizes");
    if (rows.size() != targets.size()) throw ParamError("kkt_report: row/target count mismatch");

    double sum = 0.0, box_excess = 0.0;
    std::vector<double> z(m);
    for (std::size_t k = 0; k < m; ++k) {
        if (model.sv_indices[k] >= rows.size())
            throw ParamError("kkt_report: support index out of range of the data");
        z[k] = targets[model.sv_indices[k]] - model.offset;
        sum += model.beta[k];
        box_excess = std::max(box_excess, std::fabs(model.beta[k]) - config.c);
    }

    const std::vector<std::vector<double>> q = model_gram(model);
    std::vector<double> f(m);
    for (std::size_t k = 0; k < m; ++k) {
        double acc = 0.0;
        for (std::size_t l = 0; l < m; ++l) acc += 0.5 * (q[k][l] + q[l][k]) * model.beta[l];
        f[k] = z[k] - acc;
    }

    const double gap = pair_gap(model.beta, f, config.c, config.epsilon);
    report.max_violation = std::max({box_excess, std::fabs(sum), std::max(0.0, gap)});
    report.converged = report.max_violation <= config.tolerance;
    return report;
}

}  // namespace fsvr
