#include "demo.hpp"
#include "io.hpp"
#include "phase.hpp"
#include "pipeline.hpp"

#include "reaper/models.hpp"
#include "reaper/recovery.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

// Command-line front end. Exit codes: 0 success, 2 input error (bad flags,
// unreadable or malformed files, invalid parameters), 3 solver ran out of
// iterations (the result file is still written).

namespace {

using namespace reaper;
using namespace reaper::cli;

std::atomic<bool> g_interrupted{false};

void handle_interrupt(int) { g_interrupted.store(true); }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed while writing " + path);
}

void require_output(const std::string& output, const char* subcommand) {
  if (output.empty()) {
    throw std::runtime_error(std::string("--output is required for ") + subcommand);
  }
}

struct GenerateOptions {
  std::string model;
  int ambient_dim = 100;
  int subspace_dim = 1;
  int n_inliers = -1;  // -1 = model default (13 haystack, 10 syringe)
  int n_outliers = 200;
  double sigma_in = 1.0;
  double sigma_out = 1.0;
  double noise_scale = -1.0;  // syringe; negative = syringe_default_noise
};

int run_generate(const GenerateOptions& opt, std::uint64_t seed, const std::string& output) {
  require_output(output, "generate");

  Matrix points;
  TruthSidecar truth;
  truth.model = opt.model;
  truth.seed = seed;

  if (opt.model == "haystack") {
    HaystackParams params;
    params.ambient_dim = opt.ambient_dim;
    params.subspace_dim = opt.subspace_dim;
    params.n_inliers = opt.n_inliers < 0 ? 13 : opt.n_inliers;
    params.n_outliers = opt.n_outliers;
    params.sigma_in = opt.sigma_in;
    params.sigma_out = opt.sigma_out;
    params.seed = seed;

    const HaystackSample sample = sample_haystack(params);
    points.resize(params.ambient_dim, params.n_inliers + params.n_outliers);
    points << sample.dataset.inliers, sample.dataset.outliers;

    truth.basis = sample.dataset.subspace.basis;
    truth.labels.assign(params.n_inliers, 1);
    truth.labels.insert(truth.labels.end(), params.n_outliers, 0);
    truth.sigma_in = params.sigma_in;
    truth.sigma_out = params.sigma_out;
  } else {
    if (opt.subspace_dim != 1) {
      throw std::runtime_error("the syringe model is one-dimensional; drop --subspace-dim");
    }
    const int n_inliers = opt.n_inliers < 0 ? 10 : opt.n_inliers;
    const double noise = opt.noise_scale < 0.0 ? syringe_default_noise(opt.ambient_dim)
                                               : opt.noise_scale;
    const SyringeSample sample =
        sample_syringe(opt.ambient_dim, n_inliers, opt.n_outliers, noise, seed);
    points = sample.points;

    truth.basis = sample.direction.basis;
    truth.labels.assign(n_inliers, 1);
    truth.labels.insert(truth.labels.end(), opt.n_outliers, 0);
    truth.noise_scale = noise;
  }

  write_csv_dataset(output, points);
  const std::string truth_path = truth_sidecar_path(output);
  write_truth_sidecar(truth_path, truth);
  std::cout << "wrote " << points.cols() << " points of dimension " << points.rows() << " to "
            << output << "\nwrote ground truth to " << truth_path << "\n";
  return 0;
}

int run_fit_command(const std::string& data_path, const std::string& config_path,
                    const std::string& output) {
  require_output(output, "fit");
  const Matrix points = read_csv_dataset(data_path);
  const PipelineConfig config = load_pipeline_config(config_path);
  const FitResult result = run_fit(points, config);
  write_text_file(output, fit_result_to_json(result, config));

  std::cout << "fit " << points.cols() << " points, final objective "
            << result.trace.final_objective_f0 << " after " << result.trace.iterates_count
            << " iterations; wrote " << output << "\n";
  if (!result.trace.converged) {
    std::cerr << "warning: solver hit the iteration cap before the stopping rule fired\n";
    return 3;
  }
  return 0;
}

nlohmann::json guarantee_to_json(const HaystackParams& params, double c, GuaranteeKind kind) {
  try {
    const GuaranteeCheck check = haystack_guarantee(params, c, kind);
    return {{"applicable", true},
            {"holds", check.holds},
            {"failure_probability_bound", check.failure_probability_bound},
            {"lhs", check.lhs},
            {"rhs", check.rhs}};
  } catch (const invariant_error& e) {
    return {{"applicable", false}, {"reason", e.what()}};
  }
}

int run_stats(const std::string& data_path, std::string truth_path, double guarantee_c,
              bool guarantee_requested, const std::string& output) {
  require_output(output, "stats");
  if (truth_path.empty()) truth_path = truth_sidecar_path(data_path);

  const Matrix points = read_csv_dataset(data_path);
  const TruthSidecar truth = read_truth_sidecar(truth_path);
  if (static_cast<int>(truth.labels.size()) != points.cols()) {
    throw std::runtime_error("truth sidecar has " + std::to_string(truth.labels.size()) +
                             " labels for " + std::to_string(points.cols()) + " points");
  }
  if (truth.basis.rows() != points.rows()) {
    throw std::runtime_error("truth basis dimension does not match the dataset");
  }

  const int n_inliers =
      static_cast<int>(std::count(truth.labels.begin(), truth.labels.end(), 1));
  const int n_outliers = static_cast<int>(truth.labels.size()) - n_inliers;

  InOutDataset ds;
  ds.subspace = Subspace::checked(truth.basis);
  ds.inliers.resize(points.rows(), n_inliers);
  ds.outliers.resize(points.rows(), n_outliers);
  for (int j = 0, in = 0, out = 0; j < points.cols(); ++j) {
    if (truth.labels[j] == 1) {
      ds.inliers.col(in++) = points.col(j);
    } else {
      ds.outliers.col(out++) = points.col(j);
    }
  }

  const RecoveryReport report = check_deterministic(ds);
  nlohmann::json doc{
      {"ambient_dim", points.rows()},
      {"subspace_dim", ds.subspace.dim()},
      {"n_inliers", n_inliers},
      {"n_outliers", n_outliers},
      {"labels_consistent", validate_in_out(ds)},
      {"permeance", report.permeance},
      {"spherical_permeance", report.spherical_permeance},
      {"structure_full", report.structure_full},
      {"structure_complement_spherical", report.structure_complement_spherical},
      {"spherical_structure_full", report.spherical_structure_full},
      {"key_condition_rhs", report.key_condition_rhs},
      {"reaper_condition_holds", report.reaper_condition_holds},
      {"sreaper_condition_holds", report.sreaper_condition_holds},
      {"key_condition_holds", report.key_condition_holds},
  };

  if (guarantee_requested) {
    if (truth.model != "haystack") {
      throw std::runtime_error("--guarantee-c applies to haystack ground truth only");
    }
    HaystackParams params;
    params.ambient_dim = static_cast<int>(points.rows());
    params.subspace_dim = ds.subspace.dim();
    params.n_inliers = n_inliers;
    params.n_outliers = n_outliers;
    params.sigma_in = truth.sigma_in;
    params.sigma_out = truth.sigma_out;
    params.seed = truth.seed;
    doc["guarantees"] = {
        {"c", guarantee_c},
        {"reaper", guarantee_to_json(params, guarantee_c, GuaranteeKind::kReaper)},
        {"sreaper", guarantee_to_json(params, guarantee_c, GuaranteeKind::kSReaper)},
        {"sreaper_d1", guarantee_to_json(params, guarantee_c, GuaranteeKind::kSReaperD1)},
        {"simplified_reaper",
         guarantee_to_json(params, guarantee_c, GuaranteeKind::kSimplifiedReaper)},
        {"simplified_sreaper",
         guarantee_to_json(params, guarantee_c, GuaranteeKind::kSimplifiedSReaper)},
    };
  }

  write_text_file(output, doc.dump(2) + "\n");
  std::cout << "permeance " << report.permeance << ", verdicts: reaper "
            << (report.reaper_condition_holds ? "holds" : "fails") << ", s-reaper "
            << (report.sreaper_condition_holds ? "holds" : "fails") << ", key "
            << (report.key_condition_holds ? "holds" : "fails") << "; wrote " << output << "\n";
  return 0;
}

int run_phase_command(const std::string& spec_path, int threads, const std::string& output) {
  require_output(output, "phase");
  const PhaseGridSpec spec = load_phase_spec(spec_path);

  std::signal(SIGINT, handle_interrupt);
  const PhaseGridResult result = run_phase_grid(spec, threads, &g_interrupted);
  std::signal(SIGINT, SIG_DFL);

  write_text_file(output + ".cells.csv", cells_to_csv(result));
  write_text_file(output + ".summary.json", summary_to_json(spec, result));

  int completed = 0;
  for (const PhaseCell& cell : result.cells) completed += cell.completed ? 1 : 0;
  std::cout << (result.interrupted ? "interrupted: " : "") << completed << "/"
            << result.cells.size() << " cells completed; wrote " << output << ".cells.csv and "
            << output << ".summary.json\n";
  if (result.fit) {
    std::printf("trend over %d bracketed rows: rho_in = %.3f rho_out + %.3f\n",
                result.fit->rows_used, result.fit->slope_rho_in_per_rho_out,
                result.fit->intercept_rho_in);
  }
  return 0;
}

int run_demo(int trials, std::uint64_t seed, const std::string& output) {
  const NeedleOutcome needle = run_needle_trials(NeedleConfig{}, trials, seed);
  const SyringeOutcome syringe = run_syringe_trials(SyringeConfig{}, trials, seed);

  std::printf("needle:  %d/%d recoveries below 1e-5 spectral error, mean angle %.6g deg\n",
              needle.success_count, trials, needle.mean_angle_degrees);
  std::printf("syringe: mean angle to the inlier principal component %.6g deg\n",
              syringe.mean_angle_degrees);

  if (!output.empty()) {
    write_text_file(output, demo_trials_to_csv(needle, syringe));
    std::cout << "wrote per-trial angles to " << output << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust subspace recovery via convex relaxation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  int threads = 1;
  std::string output;
  app.add_option("--seed", seed, "Master RNG seed (default 0)");
  app.add_option("--threads", threads, "Worker threads for trial-level parallelism")
      ->check(CLI::PositiveNumber);
  app.add_option("--output", output, "Output path (phase appends .cells.csv / .summary.json)");

  GenerateOptions gen;
  CLI::App* generate = app.add_subcommand("generate", "Sample a synthetic dataset to CSV");
  generate->add_option("--model", gen.model, "haystack or syringe")
      ->required()
      ->check(CLI::IsMember({"haystack", "syringe"}));
  generate->add_option("--ambient-dim", gen.ambient_dim, "Ambient dimension D");
  generate->add_option("--subspace-dim", gen.subspace_dim, "Subspace dimension d (haystack)");
  generate->add_option("--inliers", gen.n_inliers, "Inlier count (default 13 / 10)");
  generate->add_option("--outliers", gen.n_outliers, "Outlier count");
  generate->add_option("--sigma-in", gen.sigma_in, "Inlier scale (haystack)");
  generate->add_option("--sigma-out", gen.sigma_out, "Outlier scale (haystack)");
  generate->add_option("--noise-scale", gen.noise_scale,
                       "Inlier noise std (syringe; default 1/(4 sqrt(D)))");

  std::string fit_data, fit_config;
  CLI::App* fit = app.add_subcommand("fit", "Fit a subspace model to a CSV dataset");
  fit->add_option("--data", fit_data, "Dataset CSV, one point per row")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--config", fit_config, "Pipeline config JSON")
      ->required()
      ->check(CLI::ExistingFile);

  std::string stats_data, stats_truth;
  double guarantee_c = 0.0;
  CLI::App* stats = app.add_subcommand("stats", "Recovery statistics against ground truth");
  stats->add_option("--data", stats_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  stats->add_option("--truth", stats_truth, "Truth sidecar (default <data>.truth.json)");
  CLI::Option* c_option = stats->add_option(
      "--guarantee-c", guarantee_c, "Confidence parameter for the sampling-ratio guarantees");

  std::string phase_spec;
  CLI::App* phase = app.add_subcommand("phase", "Run a phase-transition grid");
  phase->add_option("--spec", phase_spec, "Grid spec JSON")->required()->check(CLI::ExistingFile);

  int demo_trials = 25;
  CLI::App* demo = app.add_subcommand(
      "demo-needle", "Needle and syringe demos: a line hidden in ambient noise");
  demo->add_option("--trials", demo_trials, "Trials per experiment")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) return run_generate(gen, seed, output);
    if (fit->parsed()) return run_fit_command(fit_data, fit_config, output);
    if (stats->parsed()) {
      return run_stats(stats_data, stats_truth, guarantee_c, c_option->count() > 0, output);
    }
    if (phase->parsed()) return run_phase_command(phase_spec, threads, output);
    if (demo->parsed()) return run_demo(demo_trials, seed, output);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
