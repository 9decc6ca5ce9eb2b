#include "pipeline.hpp"

#include "reaper/geometry.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <stdexcept>

namespace reaper::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error(what); }

// Every key a config can hold is optional except d, so a typo would silently
// fall back to the default instead of doing what the file says. Reject it.
void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    bool recognized = false;
    for (const char* key : known) {
      if (item.key() == key) {
        recognized = true;
        break;
      }
    }
    if (!recognized) fail(where + ": unknown key \"" + item.key() + "\"");
  }
}

int relaxation_rank(const ProjectorRelaxation& p, double tol = 1e-6) {
  const Spectrum s = compute_spectrum(p.matrix);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    if (s.eigenvalues(i) > tol) ++rank;
  }
  return rank;
}

// Rounding by trace bisection: shrink the trace budget until the relaxation
// concentrates on an integer-rank projector, then read off its range. When
// the solution at the requested budget already has the right rank (the exact
// recovery regime), the first probe accepts and this coincides with the
// dominant-eigenvector rounding.
Subspace round_by_trace_bisection(const Matrix& solve_data, const PipelineConfig& config,
                                  const ProjectorRelaxation& at_full_budget) {
  const int want = static_cast<int>(std::ceil(config.d));
  if (relaxation_rank(at_full_budget) <= want) {
    return dominant_subspace(at_full_budget, want);
  }
  IrlsConfig irls = config.irls;
  double lo = 0.0;
  double hi = config.d;
  ProjectorRelaxation best = at_full_budget;
  bool found = false;
  for (int probe = 0; probe < 12; ++probe) {
    const double t = 0.5 * (lo + hi);
    irls.d = t;
    ProjectorRelaxation p = irls_solve(solve_data, irls).first;
    if (relaxation_rank(p) <= want) {
      best = std::move(p);
      found = true;
      lo = t;  // feasible; push the budget back up toward d
    } else {
      hi = t;
    }
  }
  if (!found) fail("trace bisection found no budget with rank <= ceil(d)");
  return dominant_subspace(best, want);
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("malformed fit config: ") + e.what());
  }

  PipelineConfig config;
  try {
    reject_unknown_keys(doc, {"d", "center", "spherize", "irls", "rounding"}, "fit config");
    config.d = doc.at("d").get<double>();
    config.center = doc.value("center", false);
    config.spherize = doc.value("spherize", false);
    if (doc.contains("irls")) {
      const auto& irls = doc["irls"];
      reject_unknown_keys(irls, {"delta", "epsilon", "max_iter"}, "fit config irls");
      config.irls.delta = irls.value("delta", config.irls.delta);
      config.irls.epsilon = irls.value("epsilon", config.irls.epsilon);
      config.irls.max_iter = irls.value("max_iter", config.irls.max_iter);
    }
    const std::string rounding = doc.value("rounding", "dominant");
    if (rounding == "dominant") {
      config.rounding = Rounding::kDominant;
    } else if (rounding == "bisect_trace") {
      config.rounding = Rounding::kBisectTrace;
    } else {
      fail("unknown rounding mode: " + rounding);
    }
  } catch (const json::exception& e) {
    fail(std::string("invalid fit config: ") + e.what());
  }
  if (!(config.d > 0.0) || !std::isfinite(config.d)) {
    fail("fit config: d must be a positive real");
  }
  return config;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open fit config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_pipeline_config(text);
}

FitResult run_fit(const Matrix& points, const PipelineConfig& config) {
  validate_data_matrix(points);
  if (config.d >= static_cast<double>(points.rows())) {
    fail("fit config: d must be below the ambient dimension");
  }

  FitResult result;
  Matrix centered = points;
  if (config.center) {
    const Vector c = euclidean_median(points);
    centered.colwise() -= c;
    result.centering = c;
  }

  IrlsConfig irls = config.irls;
  irls.d = config.d;
  auto [relaxation, trace] =
      config.spherize ? s_reaper_solve(centered, irls) : irls_solve(centered, irls);

  const int model_dim = static_cast<int>(std::ceil(config.d));
  result.model = config.rounding == Rounding::kDominant
                     ? dominant_subspace(relaxation, model_dim)
                     : round_by_trace_bisection(config.spherize ? spherize_dataset(centered)
                                                                : centered,
                                                config, relaxation);
  result.eigenvalues = compute_spectrum(relaxation.matrix).eigenvalues;
  const Matrix pi = result.model.projector();
  result.residuals = (centered - pi * centered).colwise().norm().transpose();
  result.relaxation = std::move(relaxation);
  result.trace = std::move(trace);
  return result;
}

std::string fit_result_to_json(const FitResult& result, const PipelineConfig& config) {
  json doc;
  if (result.centering.has_value()) {
    doc["centering"] = std::vector<double>(result.centering->data(),
                                           result.centering->data() + result.centering->size());
  } else {
    doc["centering"] = nullptr;
  }
  doc["spherized"] = config.spherize;
  doc["target_dim"] = config.d;
  doc["rounding"] = config.rounding == Rounding::kDominant ? "dominant" : "bisect_trace";
  doc["eigenvalues"] = std::vector<double>(result.eigenvalues.data(),
                                           result.eigenvalues.data() + result.eigenvalues.size());
  json basis = json::array();
  for (Eigen::Index j = 0; j < result.model.basis.cols(); ++j) {
    json col = json::array();
    for (Eigen::Index i = 0; i < result.model.basis.rows(); ++i) {
      col.push_back(result.model.basis(i, j));
    }
    basis.push_back(std::move(col));
  }
  doc["basis"] = std::move(basis);
  doc["residuals"] = std::vector<double>(result.residuals.data(),
                                         result.residuals.data() + result.residuals.size());
  doc["trace"] = {{"iterations", result.trace.iterates_count},
                  {"objective_values", result.trace.objective_values},
                  {"final_objective", result.trace.final_objective_f0},
                  {"converged", result.trace.converged}};
  return doc.dump(2) + "\n";
}

}  // namespace reaper::cli
