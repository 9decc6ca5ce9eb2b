#pragma once

#include "reaper/types.hpp"

#include <optional>
#include <string>
#include <vector>

// File formats used by the command-line tool. Datasets are headerless CSV
// with one point per row and 17-significant-digit decimal floats, so a
// write/read round trip reproduces every double exactly. Ground truth rides
// in a JSON sidecar next to the dataset.

namespace reaper::cli {

// In-memory datasets keep the library convention (one point per column);
// these convert at the file boundary.
Matrix read_csv_dataset(const std::string& path);
void write_csv_dataset(const std::string& path, const Matrix& points);

// Ground-truth sidecar for generated datasets. labels[i] is 1 for an inlier
// row and 0 for an outlier row; basis columns span the true subspace.
struct TruthSidecar {
  std::string model;  // "haystack" or "syringe"
  std::uint64_t seed = 0;
  Matrix basis;
  std::vector<int> labels;
  double sigma_in = 1.0;
  double sigma_out = 1.0;
  std::optional<double> noise_scale;  // syringe only
};

// data.csv -> data.truth.json (other extensions get .truth.json appended).
std::string truth_sidecar_path(const std::string& dataset_path);

void write_truth_sidecar(const std::string& path, const TruthSidecar& truth);
TruthSidecar read_truth_sidecar(const std::string& path);

}  // namespace reaper::cli
