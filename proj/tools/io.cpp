#include "io.hpp"

#include <json.hpp>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace reaper::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error(what); }

json matrix_to_columns(const Matrix& m) {
  json cols = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    json col = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) col.push_back(m(i, j));
    cols.push_back(std::move(col));
  }
  return cols;
}

Matrix columns_to_matrix(const json& cols) {
  if (!cols.is_array() || cols.empty()) fail("truth sidecar: basis must be a non-empty array");
  const auto rows = static_cast<Eigen::Index>(cols[0].size());
  Matrix m(rows, static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const auto& col = cols[static_cast<size_t>(j)];
    if (static_cast<Eigen::Index>(col.size()) != rows) {
      fail("truth sidecar: ragged basis columns");
    }
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = col[static_cast<size_t>(i)].get<double>();
  }
  return m;
}

}  // namespace

Matrix read_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open dataset file: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      double value = 0.0;
      const auto [next, ec] = std::from_chars(p, end, value);
      if (ec != std::errc()) {
        fail("malformed number in " + path + " at row " + std::to_string(rows.size() + 1));
      }
      row.push_back(value);
      p = next;
      if (p < end) {
        if (*p != ',') fail("expected ',' in " + path);
        ++p;
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail("ragged rows in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail("empty dataset: " + path);

  Matrix points(static_cast<Eigen::Index>(rows.front().size()),
                static_cast<Eigen::Index>(rows.size()));
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      points(i, j) = rows[static_cast<size_t>(j)][static_cast<size_t>(i)];
    }
  }
  validate_data_matrix(points);
  return points;
}

void write_csv_dataset(const std::string& path, const Matrix& points) {
  validate_data_matrix(points);
  std::ofstream out(path);
  if (!out) fail("cannot write dataset file: " + path);
  char buf[64];
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", points(i, j));
      out << buf << (i + 1 < points.rows() ? "," : "");
    }
    out << '\n';
  }
  if (!out) fail("write failed: " + path);
}

std::string truth_sidecar_path(const std::string& dataset_path) {
  const std::string suffix = ".csv";
  if (dataset_path.size() > suffix.size() &&
      dataset_path.compare(dataset_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return dataset_path.substr(0, dataset_path.size() - suffix.size()) + ".truth.json";
  }
  return dataset_path + ".truth.json";
}

void write_truth_sidecar(const std::string& path, const TruthSidecar& truth) {
  json doc;
  doc["model"] = truth.model;
  doc["seed"] = truth.seed;
  doc["ambient_dim"] = truth.basis.rows();
  doc["subspace_dim"] = truth.basis.cols();
  doc["basis"] = matrix_to_columns(truth.basis);
  doc["labels"] = truth.labels;
  doc["sigma_in"] = truth.sigma_in;
  doc["sigma_out"] = truth.sigma_out;
  if (truth.noise_scale.has_value()) doc["noise_scale"] = *truth.noise_scale;

  std::ofstream out(path);
  if (!out) fail("cannot write truth sidecar: " + path);
  out << doc.dump(2) << '\n';
  if (!out) fail("write failed: " + path);
}

TruthSidecar read_truth_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open truth sidecar: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail("malformed truth sidecar " + path + ": " + e.what());
  }

  TruthSidecar truth;
  try {
    truth.model = doc.at("model").get<std::string>();
    truth.seed = doc.at("seed").get<std::uint64_t>();
    truth.basis = columns_to_matrix(doc.at("basis"));
    truth.labels = doc.at("labels").get<std::vector<int>>();
    truth.sigma_in = doc.value("sigma_in", 1.0);
    truth.sigma_out = doc.value("sigma_out", 1.0);
    if (doc.contains("noise_scale")) truth.noise_scale = doc["noise_scale"].get<double>();
  } catch (const json::exception& e) {
    fail("truth sidecar " + path + " is missing fields: " + e.what());
  }
  return truth;
}

}  // namespace reaper::cli
