#include <doctest.h>

#include "oracles.hpp"
#include "reaper/geometry.hpp"
#include "reaper/rng.hpp"
#include "reaper/solver.hpp"
#include "reaper/types.hpp"

#include <cmath>
#include <vector>

using namespace reaper;

namespace {

Matrix random_points(Rng& rng, int dim, int n, double scale = 1.0) {
  Matrix x(dim, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < dim; ++i) x(i, j) = scale * rng.next_gaussian();
  }
  return x;
}

Vector sorted_random_spectrum(Rng& rng, int dim) {
  std::vector<double> v(dim);
  for (auto& e : v) e = rng.next_uniform() * 10.0;
  std::sort(v.rbegin(), v.rend());
  return Eigen::Map<Vector>(v.data(), dim);
}

}  // namespace

TEST_CASE("weighted_covariance matches the hand-computed cases") {
  Matrix x(2, 1);
  x << 1, 2;
  Vector w1 = Vector::Ones(1);
  Matrix expected(2, 2);
  expected << 1, 2, 2, 4;
  CHECK((weighted_covariance(x, w1) - expected).norm() == 0.0);

  const Matrix units = Matrix::Identity(2, 2);
  CHECK((weighted_covariance(units, Vector::Ones(2)) - Matrix::Identity(2, 2)).norm() == 0.0);
  CHECK(weighted_covariance(units, Vector::Zero(2)).norm() == 0.0);

  CHECK_THROWS_AS(weighted_covariance(units, Vector::Ones(3)), invariant_error);
  Vector negative = Vector::Constant(2, -1.0);
  CHECK_THROWS_AS(weighted_covariance(units, negative), invariant_error);
}

TEST_CASE("scaled-column covariance agrees with direct accumulation") {
  Rng rng(101);
  for (int trial = 0; trial < 25; ++trial) {
    const Matrix x = random_points(rng, 5, 14);
    Vector w(14);
    for (int i = 0; i < 14; ++i) w(i) = rng.next_uniform() * 3.0;
    const Matrix direct = weighted_covariance(x, w);
    const Matrix scaled = weighted_covariance_scaled(x, w);
    CHECK((direct - scaled).norm() <= 1e-12 * std::max(1.0, direct.norm()));
  }
}

TEST_CASE("waterfill handles the rank-deficient spectrum in closed form") {
  Vector lam(3);
  lam << 5, 0, 0;
  const WaterfillResult r = waterfill(lam, 1.0);
  CHECK_FALSE(r.theta.has_value());
  CHECK(r.nu(0) == 1.0);
  CHECK(r.nu(1) == 0.0);
  CHECK(r.nu(2) == 0.0);

  // Fractional budget on the same degenerate spectrum.
  Vector lam2(3);
  lam2 << 5, 3, 0;
  const WaterfillResult r2 = waterfill(lam2, 2.5);
  CHECK_FALSE(r2.theta.has_value());
  CHECK(r2.nu(0) == 1.0);
  CHECK(r2.nu(1) == 1.0);
  CHECK(r2.nu(2) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("waterfill water level matches the bisection reference") {
  Vector lam(3);
  lam << 4, 2, 1;
  const double oracle_theta = oracle::waterfill_theta(lam, 2.0);
  CHECK(oracle_theta == doctest::Approx(4.0 / 7.0).epsilon(1e-11));

  const WaterfillResult r = waterfill(lam, 2.0);
  REQUIRE(r.theta.has_value());
  CHECK(*r.theta == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
  CHECK(*r.theta == doctest::Approx(oracle_theta).epsilon(1e-10));
  CHECK(r.nu(0) == doctest::Approx(6.0 / 7.0).epsilon(1e-14));
  CHECK(r.nu(1) == doctest::Approx(5.0 / 7.0).epsilon(1e-14));
  CHECK(r.nu(2) == doctest::Approx(3.0 / 7.0).epsilon(1e-14));
  CHECK(r.nu.sum() == doctest::Approx(2.0).epsilon(1e-12));

  Vector flat = Vector::Ones(4);
  const WaterfillResult rf = waterfill(flat, 2.0);
  REQUIRE(rf.theta.has_value());
  CHECK(*rf.theta == doctest::Approx(0.5).epsilon(1e-14));
  for (int i = 0; i < 4; ++i) CHECK(rf.nu(i) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("waterfill agrees with bisection across random spectra") {
  Rng rng(102);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 2 + static_cast<int>(rng.next_uniform() * 8);
    const Vector lam = sorted_random_spectrum(rng, dim);
    const double d = 0.05 + rng.next_uniform() * (dim - 0.1);
    const WaterfillResult r = waterfill(lam, d);
    CHECK(std::abs(r.nu.sum() - d) <= 1e-10);
    if (r.theta.has_value()) {
      CHECK(*r.theta == doctest::Approx(oracle::waterfill_theta(lam, d)).epsilon(1e-9));
    }
  }
}

TEST_CASE("waterfill shrinkage is monotone in each eigenvalue") {
  Rng rng(103);
  for (int trial = 0; trial < 40; ++trial) {
    Vector lam = sorted_random_spectrum(rng, 6);
    lam += Vector::LinSpaced(6, 0.5, 0.1);  // enforce distinct entries
    std::sort(lam.data(), lam.data() + 6, std::greater<double>());
    const double d = 0.5 + rng.next_uniform() * 5.0;
    const int i = static_cast<int>(rng.next_uniform() * 6);
    const Vector before = waterfill(lam, d).nu;

    Vector bumped = lam;
    const double gap = (i == 0) ? 1.0 : (lam(i - 1) - lam(i));
    bumped(i) += 0.49 * gap;
    const Vector after = waterfill(bumped, d).nu;
    CHECK(after(i) >= before(i) - 1e-12);
  }
}

TEST_CASE("waterfill rejects malformed spectra") {
  Vector unsorted(2);
  unsorted << 1, 2;
  CHECK_THROWS_AS(waterfill(unsorted, 1.0), invariant_error);
  Vector negative(2);
  negative << 1, -1;
  CHECK_THROWS_AS(waterfill(negative, 1.0), invariant_error);
  Vector ok(2);
  ok << 2, 1;
  CHECK_THROWS_AS(waterfill(ok, 0.0), invariant_error);
  CHECK_THROWS_AS(waterfill(ok, 2.0), invariant_error);
}

TEST_CASE("solve_weighted_ls shrinks symmetric data to the scaled identity") {
  const Matrix x = Matrix::Identity(3, 3);
  const ProjectorRelaxation p = solve_weighted_ls(x, Vector::Ones(3), 1.5);
  CHECK((p.matrix - 0.5 * Matrix::Identity(3, 3)).norm() <= 1e-12);
}

TEST_CASE("solve_weighted_ls is exact on data spanning a subspace") {
  Matrix x(4, 4);
  x << 1, 0, 1, 2,
       0, 1, 1, -1,
       0, 0, 0, 0,
       0, 0, 0, 0;
  const ProjectorRelaxation p = solve_weighted_ls(x, Vector::Ones(4), 2.0);
  Matrix pi = Matrix::Zero(4, 4);
  pi(0, 0) = pi(1, 1) = 1.0;
  CHECK((p.matrix - pi).norm() <= 1e-12);
  double obj = 0.0;
  for (int i = 0; i < 4; ++i) obj += (x.col(i) - p.matrix * x.col(i)).squaredNorm();
  CHECK(obj <= 1e-20);
}

TEST_CASE("solve_weighted_ls spectrum matches the water-filled covariance spectrum") {
  // Data whose unit-weight covariance is exactly diag(4, 2, 1).
  Matrix x = Matrix::Zero(3, 3);
  x(0, 0) = 2.0;
  x(1, 1) = std::sqrt(2.0);
  x(2, 2) = 1.0;
  const ProjectorRelaxation p = solve_weighted_ls(x, Vector::Ones(3), 2.0);
  const Spectrum s = compute_spectrum(p.matrix);
  CHECK(s.eigenvalues(0) == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
  CHECK(s.eigenvalues(1) == doctest::Approx(5.0 / 7.0).epsilon(1e-12));
  CHECK(s.eigenvalues(2) == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("solve_weighted_ls objective matches the projected-gradient reference") {
  Rng rng(104);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = random_points(rng, 4, 12);
    Vector w(12);
    for (int i = 0; i < 12; ++i) w(i) = 0.1 + rng.next_uniform() * 1.9;
    const double d = 0.5 + rng.next_uniform() * 3.0;

    const ProjectorRelaxation p = solve_weighted_ls(x, w, d);
    const Matrix q = oracle::weighted_ls_minimizer(x, w, d);

    auto objective = [&](const Matrix& m) {
      double total = 0.0;
      for (int i = 0; i < 12; ++i) total += w(i) * (x.col(i) - m * x.col(i)).squaredNorm();
      return total;
    };
    CHECK(objective(p.matrix) <= objective(q) + 1e-8);
    CHECK(objective(p.matrix) >= objective(q) - 1e-8);
  }
}

TEST_CASE("solve_weighted_ls satisfies first-order optimality over feasible directions") {
  Rng rng(105);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = random_points(rng, 4, 10);
    Vector w(10);
    for (int i = 0; i < 10; ++i) w(i) = 0.2 + rng.next_uniform();
    const double d = 0.5 + rng.next_uniform() * 3.0;
    const ProjectorRelaxation p = solve_weighted_ls(x, w, d);
    const Matrix c = weighted_covariance(x, w);

    const Matrix opt_grad = (Matrix::Identity(4, 4) - p.matrix) * c;
    for (int k = 0; k < 100; ++k) {
      const Matrix q = oracle::random_feasible(rng, 4, d);
      const Matrix delta = q - p.matrix;
      CHECK((delta.array() * opt_grad.array()).sum() <= 1e-8);
    }
  }
}

TEST_CASE("solve_weighted_ls commutes with its covariance") {
  Rng rng(106);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = random_points(rng, 5, 15);
    Vector w(15);
    for (int i = 0; i < 15; ++i) w(i) = rng.next_uniform() * 2.0;
    const double d = 0.5 + rng.next_uniform() * 4.0;
    const ProjectorRelaxation p = solve_weighted_ls(x, w, d);
    const Matrix c = weighted_covariance(x, w);
    CHECK((p.matrix * c - c * p.matrix).norm() <= 1e-8);
  }
}

TEST_CASE("reaper_objective evaluates the unsquared residual sum") {
  Matrix in_plane(3, 2);
  in_plane << 1, -2,
              2, 0.5,
              0, 0;
  Matrix pi = Matrix::Zero(3, 3);
  pi(0, 0) = pi(1, 1) = 1.0;
  CHECK(reaper_objective(in_plane, pi) == 0.0);

  CHECK(reaper_objective(in_plane, Matrix::Zero(3, 3)) ==
        doctest::Approx(in_plane.col(0).norm() + in_plane.col(1).norm()).epsilon(1e-15));

  Matrix single(2, 1);
  single << 1, 0;
  Matrix half = Matrix::Zero(2, 2);
  half(0, 0) = 0.5;
  CHECK(reaper_objective(single, half) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("regularized_objective has the right knee behavior") {
  Matrix single(2, 1);
  single << 1e-3, 0;  // residual well above delta at P = 0
  const Matrix zero = Matrix::Zero(2, 2);
  CHECK(regularized_objective(single, zero, 1e-10) ==
        doctest::Approx(reaper_objective(single, zero)).epsilon(1e-14));

  Matrix origin = Matrix::Zero(2, 1);
  CHECK(regularized_objective(origin, zero, 2.0) == doctest::Approx(1.0).epsilon(1e-15));

  const double delta = 0.37;
  Matrix at_knee(2, 1);
  at_knee << delta, 0;
  CHECK(regularized_objective(at_knee, zero, delta) == doctest::Approx(delta).epsilon(1e-15));
}

TEST_CASE("regularized objective stays within the half-delta-N band") {
  Rng rng(107);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + static_cast<int>(rng.next_uniform() * 12);
    const Matrix x = random_points(rng, 4, n);
    const double d = 0.5 + rng.next_uniform() * 3.0;
    const Matrix p = oracle::random_feasible(rng, 4, d);
    for (const double delta : {1e-10, 1e-3, 2.0}) {
      const double f0 = reaper_objective(x, p);
      const double f = regularized_objective(x, p, delta);
      CHECK(f - f0 >= -1e-12);
      CHECK(f - f0 <= 0.5 * delta * n + 1e-12);
    }
  }
}

TEST_CASE("irls_solve is exact when inliers span a subspace") {
  Matrix x(4, 4);
  x << 1, 0, 1, 2,
       0, 1, 1, -1,
       0, 0, 0, 0,
       0, 0, 0, 0;
  const auto [p, trace] = irls_solve(x, IrlsConfig{2.0});
  CHECK(trace.converged);
  CHECK(reaper_objective(x, p.matrix) <= 1e-12);
  Matrix pi = Matrix::Zero(4, 4);
  pi(0, 0) = pi(1, 1) = 1.0;
  CHECK((dominant_subspace(p, 2).projector() - pi).norm() <= 1e-10);
}

TEST_CASE("irls_solve objective trace is nonincreasing") {
  Rng rng(108);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 5 + static_cast<int>(rng.next_uniform() * 20);
    const Matrix x = random_points(rng, 5, n);
    IrlsConfig cfg{1.0 + rng.next_uniform() * 3.0};
    const auto [p, trace] = irls_solve(x, cfg);
    REQUIRE(trace.iterates_count >= 1);
    for (size_t k = 1; k < trace.objective_values.size(); ++k) {
      CHECK(trace.objective_values[k] <= trace.objective_values[k - 1] + 1e-12);
    }
    CHECK(trace.final_objective_f0 ==
          doctest::Approx(reaper_objective(x, p.matrix)).epsilon(1e-12));
  }
}

TEST_CASE("irls_solve reports non-convergence when capped") {
  Rng rng(109);
  const Matrix x = random_points(rng, 4, 20);
  IrlsConfig cfg{2.0};
  cfg.max_iter = 1;
  const auto [p, trace] = irls_solve(x, cfg);
  CHECK_FALSE(trace.converged);
  CHECK(trace.iterates_count == 1);
  CHECK(p.matrix.allFinite());
}

TEST_CASE("irls_solve validates its configuration") {
  const Matrix x = Matrix::Identity(3, 3);
  IrlsConfig bad_d{3.0};
  CHECK_THROWS_AS(irls_solve(x, bad_d), invariant_error);
  IrlsConfig bad_delta{1.0};
  bad_delta.delta = 0.0;
  CHECK_THROWS_AS(irls_solve(x, bad_delta), invariant_error);
  IrlsConfig bad_iters{1.0};
  bad_iters.max_iter = 0;
  CHECK_THROWS_AS(irls_solve(x, bad_iters), invariant_error);
}

TEST_CASE("irls observer sees every iterate in order") {
  Rng rng(110);
  const Matrix x = random_points(rng, 3, 10);
  std::vector<int> seen;
  const auto [p, trace] = irls_solve(x, IrlsConfig{1.0}, [&](int k, const Matrix& iterate) {
    seen.push_back(k);
    CHECK(iterate.rows() == 3);
  });
  REQUIRE_FALSE(seen.empty());
  for (size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == static_cast<int>(i + 1));
}

TEST_CASE("s_reaper_solve is invariant under global rescaling") {
  Rng rng(111);
  const Matrix x = random_points(rng, 4, 15);
  const auto [p1, t1] = s_reaper_solve(x, IrlsConfig{2.0});

  // Scaling by a power of two commutes exactly with spherization, so the
  // entire solve path reproduces bit for bit.
  const auto [p8, t8] = s_reaper_solve(Matrix(8.0 * x), IrlsConfig{2.0});
  CHECK((p8.matrix - p1.matrix).norm() == 0.0);
  CHECK(t8.iterates_count == t1.iterates_count);

  // A non-dyadic scale perturbs the last bits of the normalization, and the
  // iteration amplifies those ulps: the two runs stop on slightly different
  // iterates of the same flat valley. They agree to solver accuracy, not to
  // machine precision.
  const auto [p7, t7] = s_reaper_solve(Matrix(7.0 * x), IrlsConfig{2.0});
  CHECK((p7.matrix - p1.matrix).norm() <= 1e-6);
}

TEST_CASE("s_reaper_solve ignores zero points") {
  Rng rng(112);
  const Matrix x = random_points(rng, 4, 12);
  Matrix padded(4, 13);
  padded.leftCols(12) = x;
  padded.col(12).setZero();
  const auto [p_base, t_base] = s_reaper_solve(x, IrlsConfig{2.0});
  const auto [p_padded, t_padded] = s_reaper_solve(padded, IrlsConfig{2.0});
  CHECK((p_base.matrix - p_padded.matrix).norm() <= 1e-14);
}

TEST_CASE("cap_to_strong_feasible leaves feasible matrices untouched") {
  Rng rng(113);
  const Matrix p = oracle::random_feasible(rng, 4, 1.7);
  const ProjectorRelaxation out = cap_to_strong_feasible(p, 1.7);
  CHECK((out.matrix - p).norm() == 0.0);
}

TEST_CASE("cap_to_strong_feasible matches the scanned cap on known spectra") {
  Matrix p1 = Matrix::Zero(3, 3);
  p1.diagonal() << 1.5, 0.5, 0.0;
  const ProjectorRelaxation c1 = cap_to_strong_feasible(p1, 2.0);
  const Spectrum s1 = compute_spectrum(c1.matrix);
  CHECK(s1.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s1.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s1.eigenvalues(2) == doctest::Approx(0.0).epsilon(1e-12));

  Matrix p2 = Matrix::Zero(2, 2);
  p2(0, 0) = 2.0;
  const ProjectorRelaxation c2 = cap_to_strong_feasible(p2, 2.0);
  CHECK((c2.matrix - Matrix::Identity(2, 2)).norm() <= 1e-12);

  // The cap happens in the eigenbasis of the input, not the coordinate basis.
  Rng rng(114);
  const Matrix q = Eigen::HouseholderQR<Matrix>(random_points(rng, 3, 3)).householderQ() *
                   Matrix::Identity(3, 3);
  const Matrix rotated = q * p1 * q.transpose();
  const ProjectorRelaxation c3 = cap_to_strong_feasible(rotated, 2.0);
  CHECK((c3.matrix * rotated - rotated * c3.matrix).norm() <= 1e-10);
  const Spectrum s3 = compute_spectrum(c3.matrix);
  CHECK(s3.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s3.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cap_to_strong_feasible rejects inputs off the weak-feasible set") {
  Matrix asym(2, 2);
  asym << 1.0, 0.3, 0.0, 1.0;
  CHECK_THROWS_AS(cap_to_strong_feasible(asym, 2.0), invariant_error);

  Matrix wrong_trace = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(cap_to_strong_feasible(wrong_trace, 1.5), invariant_error);

  Matrix indefinite = Matrix::Zero(2, 2);
  indefinite.diagonal() << 1.6, -0.6;
  CHECK_THROWS_AS(cap_to_strong_feasible(indefinite, 1.0), invariant_error);
}

TEST_CASE("capping never increases the unsquared objective") {
  Rng rng(115);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 3 + static_cast<int>(rng.next_uniform() * 3);
    const Matrix q = Eigen::HouseholderQR<Matrix>(random_points(rng, dim, dim)).householderQ() *
                     Matrix::Identity(dim, dim);
    Vector lam(dim);
    for (int i = 0; i < dim; ++i) lam(i) = rng.next_uniform() * 1.8;
    // The box [0,1] can only absorb a trace of at most dim; keep d attainable.
    if (lam.sum() > dim) lam *= dim / lam.sum();
    const double d = lam.sum();
    const Matrix p = q * lam.asDiagonal() * q.transpose();
    const Matrix sym = 0.5 * (p + p.transpose());

    const ProjectorRelaxation capped = cap_to_strong_feasible(sym, d);
    const Matrix x = random_points(rng, dim, 12);
    CHECK(reaper_objective(x, capped.matrix) <= reaper_objective(x, sym) + 1e-10);
  }
}
