#pragma once

#include "reaper/solver.hpp"
#include "reaper/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

// The two showcase experiments behind `reaper demo-needle`: recovering a
// one-dimensional subspace hidden among ambient Gaussian noise, exactly
// (needle) and with noisy inliers (syringe).

namespace reaper::cli {

struct NeedleConfig {
  int ambient_dim = 100;
  int n_inliers = 13;
  int n_outliers = 200;
  double success_threshold = 1e-5;  // spectral-norm error declaring success
  IrlsConfig irls{};                // irls.d is forced to 1 per trial
};

struct NeedleTrial {
  double angle_degrees = 0.0;   // dominant direction vs the true line
  double spectral_error = 0.0;  // ||P - Pi||
  bool success = false;
};

struct NeedleOutcome {
  std::vector<NeedleTrial> trials;
  int success_count = 0;
  double mean_angle_degrees = 0.0;
};

// Haystack draws with a one-dimensional subspace, solved on spherized data
// with d = 1. Trial t draws from a stream derived from (seed, t), so the
// outcome is reproducible and independent of trial order.
NeedleOutcome run_needle_trials(const NeedleConfig& config, int trials, std::uint64_t seed);

struct SyringeConfig {
  int ambient_dim = 100;
  int n_inliers = 10;
  int n_outliers = 200;
  double noise_scale = -1.0;  // negative = syringe_default_noise(ambient_dim)
  IrlsConfig irls{};
};

struct SyringeTrial {
  double angle_degrees = 0.0;  // model direction vs the first inlier principal component
};

struct SyringeOutcome {
  std::vector<SyringeTrial> trials;
  double mean_angle_degrees = 0.0;
};

// Noisy-line draws, solved on spherized data with d = 1. The reported angle
// compares the dominant direction of the solution against the first principal
// component of a rank-2 uncentered PCA fit to the inliers alone, i.e. the
// model a clairvoyant observer would pick.
SyringeOutcome run_syringe_trials(const SyringeConfig& config, int trials, std::uint64_t seed);

// "experiment,trial,angle_degrees,success" with a header row; the success
// column is empty for syringe trials, which have no exact-recovery criterion.
std::string demo_trials_to_csv(const NeedleOutcome& needle, const SyringeOutcome& syringe);

}  // namespace reaper::cli
