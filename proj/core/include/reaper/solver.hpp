#pragma once

#include "reaper/types.hpp"

#include <functional>
#include <optional>
#include <vector>

// The optimization core.
//
// The full problem is
//
//     minimize   sum_x ||x - P x||   over symmetric P
//     subject to 0 <= eigenvalues(P) <= 1,  trace P = d,
//
// solved by iteratively reweighted least squares: each sweep minimizes
// sum_x beta_x ||x - P x||^2 under the same constraints, which reduces to
// shrinking the eigenvalues of the weighted covariance by a water-filling
// level theta, and then refreshes the weights as beta_x = 1/max{delta, r_x}.

namespace reaper {

struct IrlsConfig {
  double d;            // target trace, 0 < d < D
  double delta = 1e-10;  // residual regularization floor
  double epsilon = 1e-15;  // stopping tolerance on the objective decrease
  int max_iter = 10000;
};

struct IrlsTrace {
  // Regularized objective F at each iterate P^(k) (see the note on
  // irls_solve below); nonincreasing up to 1e-12 slack.
  std::vector<double> objective_values;
  int iterates_count = 0;
  double final_objective_f0 = 0.0;  // unregularized objective at the output
  bool converged = false;
};

// Water-filling result: shrinkage factors nu applied to the covariance
// eigenvalues, plus the water level theta when the non-degenerate branch ran
// (theta is empty when rank(lambda) <= d and nu is the 0/1 pattern).
// active_count is the number of eigenvalues strictly above theta.
struct WaterfillResult {
  Vector nu;
  std::optional<double> theta;
  int active_count = 0;
  bool used_bisection_fallback = false;
};

// C = sum_i w_i x_i x_i^t, accumulated column by column. This direct form is
// the cross-check path; solve_weighted_ls uses the scaled-column product
// below, which is the numerically preferred route.
Matrix weighted_covariance(const Matrix& x, const Vector& w);

// C = W W^t where W has columns sqrt(w_i) x_i.
Matrix weighted_covariance_scaled(const Matrix& x, const Vector& w);

// Shrinkage factors for eigenvalues lambda (sorted nonincreasing, all >= 0)
// under the trace budget d, 0 < d < size(lambda):
//
//   - if at most d eigenvalues exceed the rank tolerance, nu is
//     (1, ..., 1, d - floor(d), 0, ..., 0) and theta is empty;
//   - otherwise nu_i = (lambda_i - theta)+ / lambda_i where theta solves
//     sum_i (lambda_i - theta)+ / lambda_i = d.
//
// theta comes from the closed-form scan theta = (i - d) / sum_{k<=i} 1/lambda_k
// accepted when lambda_i > theta >= lambda_{i+1}; a bisection fallback covers
// floating-point boundary ties (flagged in the result). Eigenvalues below
// rank_tol = max(1e-12 * lambda_1, 1e-300) are treated as exactly zero, and
// 0/0 := 0. Throws invariant_error on unsorted or negative input.
WaterfillResult waterfill(const Vector& lambda, double d);

// Minimizer of sum_i w_i ||x_i - P x_i||^2 over the constraint set above:
// P = U diag(nu) U^t where U diagonalizes the weighted covariance and nu is
// the water-filling shrinkage of its eigenvalues. Negative covariance
// eigenvalues within -1e-9 are clamped to zero; larger violations throw.
ProjectorRelaxation solve_weighted_ls(const Matrix& x, const Vector& w, double d);

// sum_x ||x - P x||.
double reaper_objective(const Matrix& x, const Matrix& p);

// sum_x H_delta(||x - P x||) with H_delta(r) = r for r >= delta and
// (r^2/delta + delta)/2 below; smooth surrogate satisfying
// F0 <= F <= F0 + delta*N/2.
double regularized_objective(const Matrix& x, const Matrix& p, double delta);

// Optional per-iteration hook; receives the iteration index (1-based) and the
// current iterate. Used by convergence studies; pass nullptr to skip the
// per-iteration projector assembly.
using IterationObserver = std::function<void(int k, const Matrix& p)>;

// IRLS loop for the full problem. Starts from unit weights, alternates
// solve_weighted_ls with the weight refresh beta_x = 1/max{delta, r_x}, and
// stops when the objective fails to decrease by more than epsilon.
//
// The recorded objective alpha^(k) is the regularized objective F at P^(k),
// the quantity the convergence theory proves nonincreasing; the final
// unregularized value lands within delta*N/2 of the true optimum. If numerics
// ever produce an increase beyond epsilon, the previous iterate is returned
// (an increase is a noise signal, not a descent step). Exhausting max_iter
// returns the last iterate with converged = false.
std::pair<ProjectorRelaxation, IrlsTrace> irls_solve(
    const Matrix& x, const IrlsConfig& cfg, const IterationObserver& observer = nullptr);

// irls_solve on the spherized dataset. Zero points survive spherization as
// zero columns and contribute nothing to any residual.
std::pair<ProjectorRelaxation, IrlsTrace> s_reaper_solve(
    const Matrix& x, const IrlsConfig& cfg, const IterationObserver& observer = nullptr);

// Caps the spectrum of a weakly feasible P (symmetric, PSD, trace d, possibly
// eigenvalues > 1) to [0, 1] without changing its eigenbasis or trace:
// lambda'_i = 1 for i < i*, 1 - i* + sum_{j<=i*} lambda_j at i*, lambda_i
// after, where i* is the smallest index with sum_{j<=i*} lambda_j <= i*.
// Never increases the objective sum_x ||x - P x|| for any dataset, since
// every (1 - lambda'_i)^2 <= (1 - lambda_i)^2. Already-feasible input is
// returned unchanged. Throws invariant_error on asymmetry, trace mismatch
// with d, or eigenvalues below -1e-9.
ProjectorRelaxation cap_to_strong_feasible(const Matrix& p, double d);

}  // namespace reaper
