#pragma once

#include "reaper/rng.hpp"
#include "reaper/types.hpp"

// Reference solvers used only by the test suites. Each one reaches the
// quantity under test along a different computational route than the library
// (bisection instead of closed-form scans, projected descent instead of
// spectral shrinkage, grids instead of optimization), so agreement is
// evidence rather than tautology. Slow and simple on purpose.

namespace reaper::oracle {

// Water level theta solving sum_i (lambda_i - theta)_+ / lambda_i = d by
// bisection on [0, lambda_1]. Requires rank(lambda) > d so a positive
// solution exists.
double waterfill_theta(const Vector& lambda, double d);

// Euclidean projection of v onto { nu : 0 <= nu_i <= 1, sum nu_i = d } by
// bisection on the dual shift.
Vector capped_simplex_projection(const Vector& v, double d);

// Euclidean projection of a symmetric matrix onto the solver's feasible set
// { P symmetric : 0 <= P <= I, tr P = d }.
Matrix feasible_projection(const Matrix& s, double d);

// A random feasible matrix: Haar-ish orthogonal basis from a Gaussian QR and
// eigenvalues projected onto the capped simplex.
Matrix random_feasible(Rng& rng, int ambient_dim, double d);

// min_P sum_i w_i ||x_i - P x_i||^2 over the feasible set, by projected
// gradient descent with the exact smoothness constant, run until the
// projected-gradient residual drops below stat_tol. Returns the minimizer.
Matrix weighted_ls_minimizer(const Matrix& x, const Vector& w, double d,
                             double stat_tol = 1e-10, int max_iter = 2000000);

// min_P sum_i ||x_i - P x_i|| over the feasible set, by projected subgradient
// descent with geometrically decaying step lengths and best-iterate tracking.
// Returns the best iterate found; its objective upper-bounds the optimum and
// is accurate to roughly the final step length on these small instances.
Matrix reaper_minimizer(const Matrix& x, double d, int epochs = 80,
                        int iters_per_epoch = 500, double step0 = 1.0,
                        double decay = 0.75);

// min over unit directions u in the span of an orthonormal 2-column basis of
// sum_i |<u, x_i>|, by a dense half-circle sweep.
double min_directional_sum_grid(const Matrix& basis2, const Matrix& points,
                                int grid = 1000000);

}  // namespace reaper::oracle
