#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fsvr {

struct SvrConfig {
    double c = 10.0;          // box constraint on |beta|
    double epsilon = 0.05;    // insensitive-tube half width
    double sigma = 1.0;       // Gaussian kernel width
    double tolerance = 1e-4;  // optimality-gap threshold for convergence
    std::size_t max_passes = 0;  // pass cap, each pass = n pair updates; 0 means max(10*n, 2000)
};

enum class KernelKind { Gaussian, NormalizedGaussian };

// A trained regressor: y(x) = offset + sum_j beta_j * K(c_j, x).
// The bias term is identically zero by construction; `offset` is the
// training-target mean, removed before solving and added back at
// prediction. Entries with beta = 0 are dropped, so every stored
// coefficient is a genuine support vector.
struct SvrModel {
    KernelKind kernel = KernelKind::NormalizedGaussian;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> beta;    // dual-coefficient differences, one per SV
    std::vector<double> sigmas;  // per-SV kernel width, one per SV
    double bias = 0.0;           // kept for completeness; always 0
    double offset = 0.0;         // training-target mean
    std::vector<std::size_t> sv_indices;  // rows of the training set kept as SVs
    bool trivial = false;  // no support vectors; prediction = offset

    std::size_t sv_count() const { return support_vectors.size(); }
};

struct KktReport {
    double max_violation = 0.0;  // worst residual over box / sum / pair-gap checks
    bool converged = false;      // max_violation <= tolerance
};

// exp(-|a - b|^2 / (2 sigma^2))
double gaussian_kernel(const std::vector<double>& a, const std::vector<double>& b, double sigma);

// Weights g_j(x) / sum_i g_i(x) over the given centers, where g_j is
// the Gaussian kernel with width sigmas[j]. Computed in log space, so
// the result is finite, non-negative, and sums to 1 for any finite x.
std::vector<double> normalized_gaussian_weights(const std::vector<double>& x,
                                                const std::vector<std::vector<double>>& centers,
                                                const std::vector<double>& sigmas);

// The j-th normalized weight as a kernel value.
double normalized_gaussian_kernel(const std::vector<double>& x,
                                  const std::vector<std::vector<double>>& centers,
                                  const std::vector<double>& sigmas, std::size_t j);

// The objective the solver maximizes, for coefficients `beta` over the
// Gram matrix `q` and centered targets `z`:
//   sum_k z_k b_k - 1/2 sum_kl b_k b_l q_kl - epsilon sum_k |b_k|.
double dual_objective(const std::vector<std::vector<double>>& q, const std::vector<double>& z,
                      const std::vector<double>& beta, double epsilon);

// Pairwise coordinate ascent on the box-constrained objective above,
// restricted to sum(beta) = 0 (pairs move by equal-and-opposite
// steps). Starts at beta = 0, picks the maximal-violating pair each
// step, and solves each one-dimensional subproblem exactly. Returns
// beta once the optimality gap is <= tolerance; throws TrainingError
// (carrying the best gap reached) when the pass budget runs out first.
// Fully deterministic. `q` is used through its symmetric part only.
std::vector<double> solve_dual(const std::vector<std::vector<double>>& q,
                               const std::vector<double>& z, double c, double epsilon,
                               double tolerance, std::size_t max_passes);

// Two-phase fit on (rows, targets): a plain-Gaussian-kernel pass over
// all rows selects the support vectors, then the problem is re-solved
// over those points with the normalized Gaussian kernel anchored at
// them. Coefficients that end at zero are dropped. All targets within
// one tube width of each other yield a flagged trivial model.
SvrModel train_svr(const SvrConfig& config, const std::vector<std::vector<double>>& rows,
                   const std::vector<double>& targets);

double predict_svr(const SvrModel& model, const std::vector<double>& x);

std::vector<double> predict_svr(const SvrModel& model,
                                const std::vector<std::vector<double>>& rows);

// First-order optimality check of `model` against the training rows and
// targets it was fit on, restricted to the support set the model kept
// (rows at model.sv_indices, Gram from the model's own kernel). Reports
// the largest of: box-constraint excess, |sum(beta)|, and the pairwise
// optimality gap the solver drives below tolerance.
KktReport kkt_report(const SvrModel& model, const SvrConfig& config,
                     const std::vector<std::vector<double>>& rows,
                     const std::vector<double>& targets);

}  // namespace fsvr
