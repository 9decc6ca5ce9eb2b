#include <doctest.h>

#include "reaper/geometry.hpp"
#include "reaper/models.hpp"
#include "reaper/rng.hpp"

#include <cmath>

using namespace reaper;

TEST_CASE("rng substreams are deterministic and disjoint") {
  Rng a = Rng::substream(42, 0);
  Rng b = Rng::substream(42, 0);
  Rng c = Rng::substream(42, 1);
  bool all_equal = true;
  bool any_cross_equal = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    all_equal = all_equal && (va == b.next_u64());
    any_cross_equal = any_cross_equal || (va == c.next_u64());
  }
  CHECK(all_equal);
  CHECK_FALSE(any_cross_equal);
}

TEST_CASE("rng draws have sane first moments") {
  Rng rng(77);
  const int n = 100000;
  double usum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    usum += u;
  }
  CHECK(std::abs(usum / n - 0.5) <= 0.01);

  double gsum = 0.0, gsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    gsum += g;
    gsq += g * g;
  }
  CHECK(std::abs(gsum / n) <= 0.02);
  CHECK(std::abs(gsq / n - 1.0) <= 0.03);
}

TEST_CASE("sample_haystack validates its parameters") {
  HaystackParams params;
  params.ambient_dim = 5;
  params.subspace_dim = 5;
  params.n_inliers = 3;
  params.n_outliers = 3;
  CHECK_THROWS_AS(sample_haystack(params), invariant_error);
  params.subspace_dim = 0;
  CHECK_THROWS_AS(sample_haystack(params), invariant_error);
  params.subspace_dim = 2;
  params.n_inliers = -1;
  CHECK_THROWS_AS(sample_haystack(params), invariant_error);
  params.n_inliers = 3;
  params.sigma_in = 0.0;
  CHECK_THROWS_AS(sample_haystack(params), invariant_error);
}

TEST_CASE("sample_haystack honors shapes, determinism, and labeling") {
  HaystackParams params;
  params.ambient_dim = 12;
  params.subspace_dim = 3;
  params.n_inliers = 20;
  params.n_outliers = 15;
  params.seed = 99;

  const HaystackSample a = sample_haystack(params);
  CHECK(a.dataset.inliers.rows() == 12);
  CHECK(a.dataset.inliers.cols() == 20);
  CHECK(a.dataset.outliers.cols() == 15);
  CHECK(a.dataset.subspace.dim() == 3);
  CHECK(validate_in_out(a.dataset));
  CHECK(a.resample_count == 0);

  const HaystackSample b = sample_haystack(params);
  CHECK((a.dataset.inliers - b.dataset.inliers).norm() == 0.0);
  CHECK((a.dataset.outliers - b.dataset.outliers).norm() == 0.0);
  CHECK((a.dataset.subspace.basis - b.dataset.subspace.basis).norm() == 0.0);

  params.seed = 100;
  const HaystackSample c = sample_haystack(params);
  CHECK((a.dataset.inliers - c.dataset.inliers).norm() > 0.0);

  params.n_inliers = 0;
  const HaystackSample d = sample_haystack(params);
  CHECK(d.dataset.inliers.cols() == 0);
  CHECK(d.dataset.outliers.cols() == 15);
}

TEST_CASE("sample_haystack accepts a caller-supplied subspace") {
  HaystackParams params;
  params.ambient_dim = 6;
  params.subspace_dim = 2;
  params.n_inliers = 10;
  params.n_outliers = 4;
  params.seed = 5;

  Matrix basis = Matrix::Zero(6, 2);
  basis(1, 0) = 1.0;
  basis(4, 1) = 1.0;
  const Subspace l = Subspace::checked(basis);
  const HaystackSample s = sample_haystack(params, l);
  CHECK((s.dataset.subspace.basis - basis).norm() == 0.0);
  // Inliers live exactly in the span of the supplied basis.
  for (int j = 0; j < 10; ++j) {
    CHECK(s.dataset.inliers(0, j) == 0.0);
    CHECK(s.dataset.inliers(2, j) == 0.0);
  }

  Matrix wrong = Matrix::Zero(6, 3);
  wrong(0, 0) = wrong(1, 1) = wrong(2, 2) = 1.0;
  CHECK_THROWS_AS(sample_haystack(params, Subspace::checked(wrong)), invariant_error);
}

TEST_CASE("haystack point draws do not depend on who supplies the basis") {
  // The basis, inlier, and outlier draws come from separate substreams, so
  // supplying L explicitly must reproduce the same coefficients.
  HaystackParams params;
  params.ambient_dim = 7;
  params.subspace_dim = 2;
  params.n_inliers = 8;
  params.n_outliers = 6;
  params.seed = 31;

  const HaystackSample drawn = sample_haystack(params);
  const HaystackSample supplied = sample_haystack(params, drawn.dataset.subspace);
  CHECK((drawn.dataset.inliers - supplied.dataset.inliers).norm() == 0.0);
  CHECK((drawn.dataset.outliers - supplied.dataset.outliers).norm() == 0.0);
}

TEST_CASE("haystack inlier geometry is basis-internal") {
  // A diagonal sign flip is exactly orthogonal and keeps the row order, so
  // rotating the supplied basis through one must reproduce the inlier Gram
  // matrix bit for bit.
  HaystackParams params;
  params.ambient_dim = 5;
  params.subspace_dim = 2;
  params.n_inliers = 9;
  params.n_outliers = 0;
  params.seed = 61;

  Matrix b1 = Matrix::Zero(5, 2);
  b1(0, 0) = 1.0;
  b1(3, 1) = 1.0;
  Matrix q = Matrix::Identity(5, 5);
  q(0, 0) = -1.0;
  q(3, 3) = -1.0;
  q(4, 4) = -1.0;
  const Matrix b2 = q * b1;

  const Matrix x1 = sample_haystack(params, Subspace::checked(b1)).dataset.inliers;
  const Matrix x2 = sample_haystack(params, Subspace::checked(b2)).dataset.inliers;
  CHECK((x1.transpose() * x1 - x2.transpose() * x2).norm() == 0.0);

  // A generic rotation agrees to roundoff.
  Rng rng(62);
  Matrix g(5, 5);
  for (int j = 0; j < 5; ++j) {
    for (int i = 0; i < 5; ++i) g(i, j) = rng.next_gaussian();
  }
  const Matrix rot = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(5, 5);
  const Matrix b3 = rot * b1;
  const Matrix x3 = sample_haystack(params, Subspace::checked(b3)).dataset.inliers;
  CHECK((x1.transpose() * x1 - x3.transpose() * x3).norm() <= 1e-12);
}

TEST_CASE("haystack inlier norms concentrate at sigma_in") {
  HaystackParams params;
  params.ambient_dim = 10;
  params.subspace_dim = 4;
  params.n_inliers = 10000;
  params.n_outliers = 0;
  params.sigma_in = 2.0;
  params.seed = 8;

  const HaystackSample s = sample_haystack(params);
  const double mean_sq = s.dataset.inliers.colwise().squaredNorm().mean();
  // E||x||^2 = sigma_in^2; three standard errors of the chi-square mean.
  const double se = params.sigma_in * params.sigma_in *
                    std::sqrt(2.0 / params.subspace_dim / params.n_inliers);
  CHECK(std::abs(mean_sq - 4.0) <= 3.0 * se);
}

TEST_CASE("syringe default noise matches the stated covariance") {
  CHECK(syringe_default_noise(100) == doctest::Approx(0.025).epsilon(1e-15));
  // noise_scale^2 = 1/(16 D)
  const double scale = syringe_default_noise(64);
  CHECK(scale * scale == doctest::Approx(1.0 / (16.0 * 64.0)).epsilon(1e-14));
}

TEST_CASE("sample_syringe produces the documented layout") {
  const SyringeSample s = sample_syringe(100, 10, 200, syringe_default_noise(100), 17);
  CHECK(s.points.rows() == 100);
  CHECK(s.points.cols() == 210);
  CHECK(s.direction.dim() == 1);
  CHECK(std::abs(s.direction.basis.col(0).norm() - 1.0) <= 1e-12);

  const SyringeSample again = sample_syringe(100, 10, 200, syringe_default_noise(100), 17);
  CHECK((s.points - again.points).norm() == 0.0);

  CHECK_THROWS_AS(sample_syringe(1, 5, 5, 0.1, 3), invariant_error);
  CHECK_THROWS_AS(sample_syringe(10, -1, 5, 0.1, 3), invariant_error);
  CHECK_THROWS_AS(sample_syringe(10, 5, 5, -0.1, 3), invariant_error);
}

TEST_CASE("noise-free syringe inliers sit exactly on the line") {
  const SyringeSample s = sample_syringe(20, 8, 5, 0.0, 23);
  const Vector v = s.direction.basis.col(0);
  for (int j = 0; j < 8; ++j) {
    // Each inlier is g_j * v with no noise term; columns are exact multiples.
    const double g = v.dot(s.points.col(j)) / v.dot(v);
    CHECK((s.points.col(j) - g * v).norm() <= 1e-14 * std::abs(g));
  }

  // The noise stream is separate from the others: switching the noise on
  // must leave the direction and the outlier block untouched.
  const SyringeSample noisy = sample_syringe(20, 8, 5, 0.5, 23);
  CHECK((noisy.points.rightCols(5) - s.points.rightCols(5)).norm() == 0.0);
  CHECK((noisy.direction.basis - s.direction.basis).norm() == 0.0);
}

TEST_CASE("validate_in_out flags perturbed inliers") {
  HaystackParams params;
  params.ambient_dim = 9;
  params.subspace_dim = 2;
  params.n_inliers = 6;
  params.n_outliers = 4;
  params.seed = 44;
  HaystackSample s = sample_haystack(params);
  CHECK(validate_in_out(s.dataset));

  InOutDataset tampered = s.dataset;
  // Push one inlier off the subspace along a complement direction.
  Vector off = Vector::Zero(9);
  off(8) = 1e-3;
  const Matrix b = tampered.subspace.basis;
  Vector dir = off - b * (b.transpose() * off);
  tampered.inliers.col(0) += dir;
  CHECK_FALSE(validate_in_out(tampered));

  InOutDataset empty_out{s.dataset.inliers, Matrix(9, 0), s.dataset.subspace};
  CHECK(validate_in_out(empty_out));
}
