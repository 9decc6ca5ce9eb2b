#pragma once

#include "reaper/types.hpp"

// Classical geometric primitives: spherization, the Euclidean median, PCA
// baselines, dominant invariant subspaces, and principal angles.

namespace reaper {

// x / ||x|| for nonzero x, the zero vector otherwise.
// Throws invariant_error on non-finite input.
Vector spherize(const Vector& x);

// Column-wise spherization; shape and column order preserved.
Matrix spherize_dataset(const Matrix& x);

// Minimizer of c -> sum_i ||x_i - c|| (the geometric median), computed with
// the Weiszfeld fixed-point iteration plus the standard data-point safeguard:
// when an iterate lands within 1e-12 of a data point, that point's optimality
// is decided by the subgradient test ||R|| <= multiplicity, and otherwise the
// iterate steps along the negative subgradient.
//
// Stops when the (sub)gradient norm is at most tol or a data point passes the
// optimality test. Throws convergence_error (carrying the best iterate) after
// max_iter iterations without convergence.
Vector euclidean_median(const Matrix& x, double tol = 1e-10, int max_iter = 10000);

// Eigendecomposition of the symmetrized matrix (S + S^t)/2, eigenvalues
// sorted nonincreasing. Output is deterministic: every eigenvector has its
// first component of magnitude > 1e-12 made positive, and within each group
// of equal eigenvalues (relative gap <= 1e-12) the vectors are reordered
// lexicographically decreasing.
Spectrum compute_spectrum(const Matrix& s);

// Span of the top-d eigenvectors of X * X^t (equivalently the top-d left
// singular vectors of X). No centering is applied. Ties follow the
// compute_spectrum convention. Throws invariant_error unless 0 < d < D.
Subspace pca_fit(const Matrix& x, int d);

// pca_fit applied to the spherized dataset.
Subspace spherical_pca_fit(const Matrix& x, int d);

// Span of the d eigenvectors of P with largest eigenvalues, with the same
// deterministic tie rule. Throws invariant_error unless 0 < d < D.
Subspace dominant_subspace(const ProjectorRelaxation& p, int d);

// Largest principal angle between two subspaces of the same ambient space,
// in [0, pi/2]; symmetric in its arguments. Computed as atan2(s, c) with
// c = sigma_min(A^t B) and s the spectral norm of the lower-dimensional basis
// projected onto the other subspace's complement, which stays accurate at
// both ends of the range.
double subspace_angle(const Subspace& a, const Subspace& b);

}  // namespace reaper
