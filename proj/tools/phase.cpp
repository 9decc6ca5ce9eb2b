#include "phase.hpp"

#include "reaper/models.hpp"
#include "reaper/recovery.hpp"
#include "reaper/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace reaper::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error(what); }

// Every key a spec can hold is optional except the grid itself, so a typo
// would silently fall back to the default instead of doing what the file
// says. Reject it.
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

// One recovery trial: draw a haystack dataset with a derived seed, solve the
// spherized program, and compare against the planted projector.
bool run_trial(const PhaseGridSpec& spec, int n_inliers, int n_outliers,
               std::uint64_t trial_seed) {
  HaystackParams params;
  params.ambient_dim = spec.ambient_dim;
  params.subspace_dim = spec.subspace_dim;
  params.n_inliers = n_inliers;
  params.n_outliers = n_outliers;
  params.sigma_in = spec.sigma_in;
  params.sigma_out = spec.sigma_out;
  params.seed = trial_seed;
  const HaystackSample sample = sample_haystack(params);

  Matrix points(spec.ambient_dim, n_inliers + n_outliers);
  points.leftCols(n_inliers) = sample.dataset.inliers;
  points.rightCols(n_outliers) = sample.dataset.outliers;

  IrlsConfig irls = spec.irls;
  irls.d = static_cast<double>(spec.subspace_dim);
  const ProjectorRelaxation p = s_reaper_solve(points, irls).first;
  const Matrix truth = sample.dataset.subspace.projector();
  return spectral_norm(p.matrix - truth) < spec.success_threshold;
}

}  // namespace

PhaseGridSpec parse_phase_spec(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("malformed phase spec: ") + e.what());
  }

  PhaseGridSpec spec;
  try {
    reject_unknown_keys(doc,
                        {"ambient_dim", "subspace_dim", "rho_in_values", "rho_out_values",
                         "trials", "success_threshold", "seed", "sigma_in", "sigma_out", "irls"},
                        "phase spec");
    spec.ambient_dim = doc.at("ambient_dim").get<int>();
    spec.subspace_dim = doc.at("subspace_dim").get<int>();
    spec.rho_in_values = doc.at("rho_in_values").get<std::vector<double>>();
    spec.rho_out_values = doc.at("rho_out_values").get<std::vector<double>>();
    spec.trials = doc.value("trials", 25);
    spec.success_threshold = doc.value("success_threshold", 1e-5);
    spec.seed = doc.value("seed", std::uint64_t{0});
    spec.sigma_in = doc.value("sigma_in", 1.0);
    spec.sigma_out = doc.value("sigma_out", 1.0);
    if (doc.contains("irls")) {
      const auto& irls = doc["irls"];
      reject_unknown_keys(irls, {"delta", "epsilon", "max_iter"}, "phase spec irls");
      spec.irls.delta = irls.value("delta", spec.irls.delta);
      spec.irls.epsilon = irls.value("epsilon", spec.irls.epsilon);
      spec.irls.max_iter = irls.value("max_iter", spec.irls.max_iter);
    }
  } catch (const json::exception& e) {
    fail(std::string("invalid phase spec: ") + e.what());
  }

  if (spec.ambient_dim < 2 || spec.subspace_dim < 1 ||
      spec.subspace_dim >= spec.ambient_dim) {
    fail("phase spec: need 1 <= subspace_dim < ambient_dim");
  }
  if (spec.trials < 1) fail("phase spec: trials must be >= 1");
  if (!(spec.success_threshold > 0.0)) fail("phase spec: success_threshold must be > 0");
  if (spec.rho_in_values.empty() || spec.rho_out_values.empty()) {
    fail("phase spec: rho grids must be non-empty");
  }
  for (double r : spec.rho_in_values) {
    if (!(r >= 0.0) || !std::isfinite(r)) fail("phase spec: rho_in values must be >= 0");
  }
  for (double r : spec.rho_out_values) {
    if (!(r >= 0.0) || !std::isfinite(r)) fail("phase spec: rho_out values must be >= 0");
  }
  return spec;
}

PhaseGridSpec load_phase_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open phase spec: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_phase_spec(text);
}

PhaseGridResult run_phase_grid(const PhaseGridSpec& spec, int threads,
                               const std::atomic<bool>* stop) {
  const auto n_in_rows = spec.rho_in_values.size();
  const auto n_out_cols = spec.rho_out_values.size();
  const size_t n_cells = n_in_rows * n_out_cols;

  PhaseGridResult result;
  result.cells.resize(n_cells);
  for (size_t ci = 0; ci < n_cells; ++ci) {
    result.cells[ci].rho_in = spec.rho_in_values[ci / n_out_cols];
    result.cells[ci].rho_out = spec.rho_out_values[ci % n_out_cols];
  }

  // Flattened (cell, trial) work items; per-cell success counts aggregate
  // order-independently so the worker count cannot change the outcome.
  std::vector<std::atomic<int>> successes(n_cells);
  std::vector<std::atomic<int>> done(n_cells);
  for (auto& a : successes) a.store(0, std::memory_order_relaxed);
  for (auto& a : done) a.store(0, std::memory_order_relaxed);

  const size_t n_items = n_cells * static_cast<size_t>(spec.trials);
  std::atomic<size_t> next_item{0};

  const auto worker = [&]() {
    for (;;) {
      if (stop != nullptr && stop->load(std::memory_order_relaxed)) return;
      const size_t item = next_item.fetch_add(1, std::memory_order_relaxed);
      if (item >= n_items) return;
      const size_t ci = item / static_cast<size_t>(spec.trials);
      const PhaseCell& cell = result.cells[ci];
      const int n_inliers =
          static_cast<int>(std::lround(cell.rho_in * spec.subspace_dim));
      const int n_outliers =
          static_cast<int>(std::lround(cell.rho_out * spec.ambient_dim));

      // A cell without inliers can never meet the spectral threshold; skip
      // the solve but still record the trial.
      bool success = false;
      if (n_inliers > 0) {
        const std::uint64_t trial_seed = Rng::substream(spec.seed, item).next_u64();
        success = run_trial(spec, n_inliers, n_outliers, trial_seed);
      }
      if (success) successes[ci].fetch_add(1, std::memory_order_relaxed);
      done[ci].fetch_add(1, std::memory_order_relaxed);
    }
  };

  const int n_workers = std::max(1, threads);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (size_t ci = 0; ci < n_cells; ++ci) {
    result.cells[ci].successes = successes[ci].load();
    result.cells[ci].trials = done[ci].load();
    result.cells[ci].completed = result.cells[ci].trials == spec.trials;
  }
  result.interrupted = stop != nullptr && stop->load();
  if (!result.interrupted) {
    result.thresholds = extract_thresholds(spec, result.cells);
    result.fit = fit_trend(result.thresholds);
  }
  return result;
}

std::vector<PhaseThreshold> extract_thresholds(const PhaseGridSpec& spec,
                                               const std::vector<PhaseCell>& cells) {
  // Scan each rho_in row through increasing rho_out for the first cell whose
  // empirical success probability drops below one half.
  std::vector<size_t> order(spec.rho_out_values.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return spec.rho_out_values[a] < spec.rho_out_values[b];
  });

  std::vector<PhaseThreshold> thresholds;
  const size_t n_out_cols = spec.rho_out_values.size();
  for (size_t ri = 0; ri < spec.rho_in_values.size(); ++ri) {
    PhaseThreshold row;
    row.rho_in = spec.rho_in_values[ri];
    size_t position = 0;
    for (size_t k = 0; k < order.size(); ++k) {
      const PhaseCell& cell = cells[ri * n_out_cols + order[k]];
      const double rate =
          cell.trials > 0 ? static_cast<double>(cell.successes) / cell.trials : 0.0;
      if (rate < 0.5) {
        row.threshold_rho_out = cell.rho_out;
        position = k;
        break;
      }
    }
    // Bracketed only when the crossing happens strictly inside the grid:
    // a threshold at the smallest rho_out means the row never succeeded.
    row.bracketed = row.threshold_rho_out.has_value() && position > 0;
    thresholds.push_back(std::move(row));
  }
  return thresholds;
}

std::optional<PhaseTrendFit> fit_trend(const std::vector<PhaseThreshold>& thresholds) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (const auto& row : thresholds) {
    if (!row.bracketed) continue;
    const double x = row.rho_in;
    const double y = *row.threshold_rho_out;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) return std::nullopt;

  PhaseTrendFit fit;
  fit.rows_used = n;
  fit.slope_rho_out_per_rho_in = (n * sxy - sx * sy) / denom;
  fit.intercept_rho_out = (sy - fit.slope_rho_out_per_rho_in * sx) / n;
  if (std::abs(fit.slope_rho_out_per_rho_in) < 1e-12) return fit;  // vertical inverse undefined
  fit.slope_rho_in_per_rho_out = 1.0 / fit.slope_rho_out_per_rho_in;
  fit.intercept_rho_in = -fit.intercept_rho_out / fit.slope_rho_out_per_rho_in;
  return fit;
}

std::string cells_to_csv(const PhaseGridResult& result) {
  std::ostringstream out;
  char buf[128];
  for (const PhaseCell& cell : result.cells) {
    if (!cell.completed && cell.trials == 0) continue;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%d\n", cell.rho_in, cell.rho_out,
                  cell.successes, cell.trials);
    out << buf;
  }
  return out.str();
}

std::string summary_to_json(const PhaseGridSpec& spec, const PhaseGridResult& result) {
  json doc;
  doc["ambient_dim"] = spec.ambient_dim;
  doc["subspace_dim"] = spec.subspace_dim;
  doc["trials_per_cell"] = spec.trials;
  doc["success_threshold"] = spec.success_threshold;
  doc["seed"] = spec.seed;
  doc["interrupted"] = result.interrupted;

  json thresholds = json::array();
  for (const auto& row : result.thresholds) {
    json entry;
    entry["rho_in"] = row.rho_in;
    if (row.threshold_rho_out.has_value()) {
      entry["threshold_rho_out"] = *row.threshold_rho_out;
    } else {
      entry["threshold_rho_out"] = nullptr;
    }
    entry["bracketed"] = row.bracketed;
    thresholds.push_back(std::move(entry));
  }
  doc["thresholds"] = std::move(thresholds);

  if (result.fit.has_value()) {
    doc["fit"] = {{"slope_rho_out_per_rho_in", result.fit->slope_rho_out_per_rho_in},
                  {"intercept_rho_out", result.fit->intercept_rho_out},
                  {"slope_rho_in_per_rho_out", result.fit->slope_rho_in_per_rho_out},
                  {"intercept_rho_in", result.fit->intercept_rho_in},
                  {"rows_used", result.fit->rows_used}};
  } else {
    doc["fit"] = nullptr;
  }
  return doc.dump(2) + "\n";
}

}  // namespace reaper::cli
