#pragma once

#include "reaper/solver.hpp"
#include "reaper/types.hpp"

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Phase-transition experiment: sweep a grid of sampling ratios, run seeded
// recovery trials per cell, extract per-row 50% failure thresholds, and fit
// the linear trend of the transition boundary.

namespace reaper::cli {

struct PhaseGridSpec {
  int ambient_dim = 0;                   // D
  int subspace_dim = 0;                  // d
  std::vector<double> rho_in_values;     // N_in = round(rho_in * d) per cell
  std::vector<double> rho_out_values;    // N_out = round(rho_out * D) per cell
  int trials = 25;
  double success_threshold = 1e-5;       // spectral-norm error declaring success
  std::uint64_t seed = 0;
  double sigma_in = 1.0;
  double sigma_out = 1.0;
  IrlsConfig irls{};                     // irls.d is overwritten per solve
};

PhaseGridSpec parse_phase_spec(const std::string& json_text);
PhaseGridSpec load_phase_spec(const std::string& path);

struct PhaseCell {
  double rho_in = 0.0;
  double rho_out = 0.0;
  int successes = 0;
  int trials = 0;
  bool completed = false;
};

// Threshold of one rho_in row: the smallest grid rho_out whose empirical
// success probability falls below one half, scanning rho_out upward. Rows
// that never fall below (censored high) or that already start below
// (censored low) do not bracket the transition and are excluded from the
// trend fit.
struct PhaseThreshold {
  double rho_in = 0.0;
  std::optional<double> threshold_rho_out;
  bool bracketed = false;
};

struct PhaseTrendFit {
  // Least squares of rho_out on rho_in over the bracketed rows, plus the
  // inverted form for comparison with boundaries quoted as
  // rho_in = a * rho_out + b.
  double slope_rho_out_per_rho_in = 0.0;
  double intercept_rho_out = 0.0;
  double slope_rho_in_per_rho_out = 0.0;
  double intercept_rho_in = 0.0;
  int rows_used = 0;
};

struct PhaseGridResult {
  std::vector<PhaseCell> cells;  // row-major: rho_in outer, rho_out inner
  std::vector<PhaseThreshold> thresholds;
  std::optional<PhaseTrendFit> fit;  // absent with fewer than two bracketed rows
  bool interrupted = false;
};

// Runs the grid with the given worker count. Each (cell, trial) pair owns a
// derived RNG stream, so results do not depend on scheduling. If stop is
// non-null and becomes true, finishes the in-flight trials and returns the
// completed cells with interrupted = true.
PhaseGridResult run_phase_grid(const PhaseGridSpec& spec, int threads = 1,
                               const std::atomic<bool>* stop = nullptr);

// Threshold extraction and trend fit, separated for testing.
std::vector<PhaseThreshold> extract_thresholds(const PhaseGridSpec& spec,
                                               const std::vector<PhaseCell>& cells);
std::optional<PhaseTrendFit> fit_trend(const std::vector<PhaseThreshold>& thresholds);

// "rho_in,rho_out,successes,trials" rows for completed cells, no header.
std::string cells_to_csv(const PhaseGridResult& result);
std::string summary_to_json(const PhaseGridSpec& spec, const PhaseGridResult& result);

}  // namespace reaper::cli
