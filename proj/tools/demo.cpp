#include "demo.hpp"

#include "reaper/geometry.hpp"
#include "reaper/models.hpp"
#include "reaper/recovery.hpp"
#include "reaper/rng.hpp"

#include <cstdio>
#include <numbers>

namespace reaper::cli {
namespace {

constexpr std::uint64_t kNeedleLane = 0;
constexpr std::uint64_t kSyringeLane = 1;

// Each experiment owns a lane so the needle and syringe draws stay disjoint
// under a shared master seed; each trial then owns a stream within its lane.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t lane, int trial) {
  const std::uint64_t lane_seed = Rng::substream(seed, lane).next_u64();
  return Rng::substream(lane_seed, static_cast<std::uint64_t>(trial)).next_u64();
}

double degrees(double radians) { return radians * 180.0 / std::numbers::pi; }

}  // namespace

NeedleOutcome run_needle_trials(const NeedleConfig& config, int trials, std::uint64_t seed) {
  if (trials < 1) throw invariant_error("needle demo requires at least one trial");

  HaystackParams params;
  params.ambient_dim = config.ambient_dim;
  params.subspace_dim = 1;
  params.n_inliers = config.n_inliers;
  params.n_outliers = config.n_outliers;

  IrlsConfig irls = config.irls;
  irls.d = 1.0;

  NeedleOutcome outcome;
  outcome.trials.reserve(trials);
  double angle_sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    params.seed = trial_seed(seed, kNeedleLane, t);
    const HaystackSample sample = sample_haystack(params);
    Matrix points(params.ambient_dim, params.n_inliers + params.n_outliers);
    points << sample.dataset.inliers, sample.dataset.outliers;

    const ProjectorRelaxation p = s_reaper_solve(points, irls).first;

    NeedleTrial trial;
    trial.spectral_error = spectral_norm(p.matrix - sample.dataset.subspace.projector());
    trial.success = trial.spectral_error < config.success_threshold;
    trial.angle_degrees = degrees(subspace_angle(dominant_subspace(p, 1), sample.dataset.subspace));
    outcome.success_count += trial.success ? 1 : 0;
    angle_sum += trial.angle_degrees;
    outcome.trials.push_back(trial);
  }
  outcome.mean_angle_degrees = angle_sum / trials;
  return outcome;
}

SyringeOutcome run_syringe_trials(const SyringeConfig& config, int trials, std::uint64_t seed) {
  if (trials < 1) throw invariant_error("syringe demo requires at least one trial");

  const double noise_scale = config.noise_scale < 0.0
                                 ? syringe_default_noise(config.ambient_dim)
                                 : config.noise_scale;
  IrlsConfig irls = config.irls;
  irls.d = 1.0;

  SyringeOutcome outcome;
  outcome.trials.reserve(trials);
  double angle_sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    const SyringeSample sample =
        sample_syringe(config.ambient_dim, config.n_inliers, config.n_outliers, noise_scale,
                       trial_seed(seed, kSyringeLane, t));

    const ProjectorRelaxation p = s_reaper_solve(sample.points, irls).first;
    const Subspace model = dominant_subspace(p, 1);
    const Subspace oracle = pca_fit(sample.points.leftCols(config.n_inliers), 2);
    const Subspace first_component{oracle.basis.col(0)};

    SyringeTrial trial;
    trial.angle_degrees = degrees(subspace_angle(model, first_component));
    angle_sum += trial.angle_degrees;
    outcome.trials.push_back(trial);
  }
  outcome.mean_angle_degrees = angle_sum / trials;
  return outcome;
}

std::string demo_trials_to_csv(const NeedleOutcome& needle, const SyringeOutcome& syringe) {
  std::string csv = "experiment,trial,angle_degrees,success\n";
  char buf[128];
  for (std::size_t t = 0; t < needle.trials.size(); ++t) {
    std::snprintf(buf, sizeof buf, "needle,%zu,%.17g,%d\n", t, needle.trials[t].angle_degrees,
                  needle.trials[t].success ? 1 : 0);
    csv += buf;
  }
  for (std::size_t t = 0; t < syringe.trials.size(); ++t) {
    std::snprintf(buf, sizeof buf, "syringe,%zu,%.17g,\n", t, syringe.trials[t].angle_degrees);
    csv += buf;
  }
  return csv;
}

}  // namespace reaper::cli
