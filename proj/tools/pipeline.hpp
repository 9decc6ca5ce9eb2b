#pragma once

#include "reaper/solver.hpp"
#include "reaper/types.hpp"

#include <optional>
#include <string>

// The end-to-end fitting pipeline behind `reaper fit`: optional robust
// centering, optional spherization, the IRLS solve, and the rounding of the
// relaxed solution to a subspace.

namespace reaper::cli {

enum class Rounding { kDominant, kBisectTrace };

struct PipelineConfig {
  bool center = false;
  bool spherize = false;
  double d = 0.0;
  IrlsConfig irls{};  // irls.d is overwritten by d at run time
  Rounding rounding = Rounding::kDominant;
};

// Parses {"center": bool, "spherize": bool, "d": real, "irls": {"delta",
// "epsilon", "max_iter"}, "rounding": "dominant"|"bisect_trace"}; only "d"
// is required. Throws std::runtime_error with a readable message.
PipelineConfig parse_pipeline_config(const std::string& json_text);
PipelineConfig load_pipeline_config(const std::string& path);

struct FitResult {
  std::optional<Vector> centering;     // present when config.center
  ProjectorRelaxation relaxation;      // the solved relaxed projector
  Subspace model;                      // rounded subspace
  Vector eigenvalues;                  // spectrum of the relaxation
  Vector residuals;                    // ||x_c - Pi x_c|| per (centered) point
  IrlsTrace trace;
};

FitResult run_fit(const Matrix& points, const PipelineConfig& config);

// Serializes a FitResult to the documented snake_case JSON layout.
std::string fit_result_to_json(const FitResult& result, const PipelineConfig& config);

}  // namespace reaper::cli
