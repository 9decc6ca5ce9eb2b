#include "reaper/models.hpp"

#include "reaper/rng.hpp"

#include <Eigen/QR>

#include <cmath>

namespace reaper {

namespace {

// Substream layout per generator; frozen, golden outputs depend on it.
enum HaystackStream : std::uint64_t { kBasis = 0, kInliers = 1, kOutliers = 2 };
enum SyringeStream : std::uint64_t { kDirection = 0, kLineCoeffs = 1, kNoise = 2, kAmbient = 3 };

Matrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.next_gaussian();
  }
  return m;
}

// Thin Q factor of a Gaussian matrix, with column signs pinned by the R
// diagonal so the basis is a deterministic function of the draw (and the
// resulting subspace uniformly distributed).
Matrix random_orthonormal(Rng& rng, Eigen::Index ambient, Eigen::Index dim) {
  const Matrix g = gaussian_matrix(rng, ambient, dim);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(ambient, dim);
  const Matrix r = qr.matrixQR().topRows(dim).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

HaystackSample sample_haystack(const HaystackParams& params,
                               const std::optional<Subspace>& subspace) {
  if (params.subspace_dim < 1 || params.subspace_dim >= params.ambient_dim) {
    throw invariant_error("sample_haystack: need 1 <= subspace_dim < ambient_dim");
  }
  if (params.n_inliers < 0 || params.n_outliers < 0) {
    throw invariant_error("sample_haystack: negative point count");
  }
  if (!(params.sigma_in > 0.0) || !(params.sigma_out > 0.0)) {
    throw invariant_error("sample_haystack: sigmas must be positive");
  }
  const Eigen::Index big_d = params.ambient_dim;
  const Eigen::Index d = params.subspace_dim;

  Subspace l;
  if (subspace.has_value()) {
    if (subspace->ambient_dim() != big_d || subspace->dim() != d) {
      throw invariant_error("sample_haystack: supplied subspace has wrong shape");
    }
    l = *subspace;
  } else {
    Rng basis_rng = Rng::substream(params.seed, kBasis);
    l = Subspace::checked(random_orthonormal(basis_rng, big_d, d));
  }

  Rng inlier_rng = Rng::substream(params.seed, kInliers);
  const Matrix coeffs = gaussian_matrix(inlier_rng, d, params.n_inliers);
  const Matrix inliers =
      l.basis * (params.sigma_in / std::sqrt(static_cast<double>(d)) * coeffs);

  Rng outlier_rng = Rng::substream(params.seed, kOutliers);
  const double outlier_scale = params.sigma_out / std::sqrt(static_cast<double>(big_d));
  Matrix outliers(big_d, params.n_outliers);
  int resample_count = 0;
  for (Eigen::Index j = 0; j < params.n_outliers; ++j) {
    for (;;) {
      Vector x(big_d);
      for (Eigen::Index i = 0; i < big_d; ++i) x(i) = outlier_rng.next_gaussian();
      x *= outlier_scale;
      const Vector off = x - l.basis * (l.basis.transpose() * x);
      if (off.stableNorm() > 1e-10 * x.stableNorm()) {
        outliers.col(j) = x;
        break;
      }
      ++resample_count;
    }
  }

  return HaystackSample{InOutDataset{inliers, outliers, std::move(l)}, resample_count};
}

double syringe_default_noise(int ambient_dim) {
  return 1.0 / (4.0 * std::sqrt(static_cast<double>(ambient_dim)));
}

SyringeSample sample_syringe(int ambient_dim, int n_inliers, int n_outliers,
                             double noise_scale, std::uint64_t seed) {
  if (ambient_dim < 2) throw invariant_error("sample_syringe: need ambient_dim >= 2");
  if (n_inliers < 0 || n_outliers < 0) {
    throw invariant_error("sample_syringe: negative point count");
  }
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw invariant_error("sample_syringe: noise_scale must be a nonnegative real");
  }
  const Eigen::Index big_d = ambient_dim;

  Rng direction_rng = Rng::substream(seed, kDirection);
  Vector v(big_d);
  do {
    for (Eigen::Index i = 0; i < big_d; ++i) v(i) = direction_rng.next_gaussian();
  } while (v.stableNorm() == 0.0);
  v /= v.stableNorm();

  Rng coeff_rng = Rng::substream(seed, kLineCoeffs);
  Vector g(n_inliers);
  for (Eigen::Index i = 0; i < n_inliers; ++i) g(i) = coeff_rng.next_gaussian();

  // The noise stream is consumed even when noise_scale is zero so that the
  // dataset is continuous in noise_scale at fixed seed.
  Rng noise_rng = Rng::substream(seed, kNoise);
  const Matrix z = gaussian_matrix(noise_rng, big_d, n_inliers);

  Rng ambient_rng = Rng::substream(seed, kAmbient);
  const Matrix outliers =
      gaussian_matrix(ambient_rng, big_d, n_outliers) / std::sqrt(static_cast<double>(big_d));

  Matrix points(big_d, n_inliers + n_outliers);
  points.leftCols(n_inliers) = v * g.transpose() + noise_scale * z;
  points.rightCols(n_outliers) = outliers;

  return SyringeSample{std::move(points), Subspace::checked(v)};
}

bool validate_in_out(const InOutDataset& ds) {
  const Matrix& b = ds.subspace.basis;
  if (ds.inliers.cols() > 0 && ds.inliers.rows() != b.rows()) return false;
  if (ds.outliers.cols() > 0 && ds.outliers.rows() != b.rows()) return false;
  for (Eigen::Index j = 0; j < ds.inliers.cols(); ++j) {
    const Vector x = ds.inliers.col(j);
    const Vector off = x - b * (b.transpose() * x);
    if (off.stableNorm() > 1e-10 * x.stableNorm()) return false;
  }
  for (Eigen::Index j = 0; j < ds.outliers.cols(); ++j) {
    const Vector x = ds.outliers.col(j);
    const Vector off = x - b * (b.transpose() * x);
    if (!(off.stableNorm() > 1e-10 * x.stableNorm())) return false;
  }
  return true;
}

}  // namespace reaper
