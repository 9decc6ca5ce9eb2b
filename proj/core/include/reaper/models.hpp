#pragma once

#include "reaper/recovery.hpp"
#include "reaper/types.hpp"

#include <cstdint>
#include <optional>

// Seeded generators for the synthetic experiment models. Everything here is
// a pure function of its arguments: a fixed seed reproduces a dataset bit for
// bit, and parallel trials use disjoint derived streams (see rng.hpp).

namespace reaper {

// Gaussian inliers on a d-dimensional subspace, Gaussian outliers filling the
// ambient space:
//   inliers  ~ normal(0, (sigma_in^2 / d)  * Pi_L),
//   outliers ~ normal(0, (sigma_out^2 / D) * I).
// The sampling ratios rho_in = N_in/d and rho_out = N_out/D drive the theory.
struct HaystackParams {
  int ambient_dim = 0;     // D
  int subspace_dim = 0;    // d, 1 <= d < D
  int n_inliers = 0;       // N_in >= 0
  int n_outliers = 0;      // N_out >= 0
  double sigma_in = 1.0;
  double sigma_out = 1.0;
  std::uint64_t seed = 0;

  double rho_in() const { return static_cast<double>(n_inliers) / subspace_dim; }
  double rho_out() const { return static_cast<double>(n_outliers) / ambient_dim; }
};

// Draws a dataset from the model. If subspace is empty, a uniformly random
// d-dimensional subspace is drawn (orthonormalized Gaussian) from its own
// substream, so supplying L versus drawing it does not shift the point draws.
//
// Inliers are built as B * (sigma_in/sqrt(d)) * G with B an orthonormal basis
// of L and G standard normal d x N_in coefficients, so they lie in L exactly
// and their Gram matrix does not depend on the basis choice. An outlier that
// lands in L (measure zero, but reachable at tiny D) is redrawn;
// resample_count records how often. Throws invariant_error on invalid params.
struct HaystackSample {
  InOutDataset dataset;
  int resample_count = 0;
};
HaystackSample sample_haystack(const HaystackParams& params,
                               const std::optional<Subspace>& subspace = std::nullopt);

// Noisy needle: N_in inliers x_i = g_i v + z_i with g_i standard normal and
// z_i ~ normal(0, noise_scale^2 * I), around a random unit direction v, plus
// N_out outliers ~ normal(0, I/D). The default noise_scale for ambient
// dimension D is syringe_default_noise(D) = 1/(4 sqrt(D)), i.e. noise
// covariance (16 D)^{-1} I; noise_scale = 0 puts the inliers exactly on the
// line. Columns are inliers first, then outliers.
struct SyringeSample {
  Matrix points;      // D x (N_in + N_out)
  Subspace direction; // the 1-dimensional truth span(v)
};
double syringe_default_noise(int ambient_dim);
SyringeSample sample_syringe(int ambient_dim, int n_inliers, int n_outliers,
                             double noise_scale, std::uint64_t seed);

// True iff the labeling invariants hold: every inlier within relative 1e-10
// of the subspace, every outlier strictly farther.
bool validate_in_out(const InOutDataset& ds);

}  // namespace reaper
