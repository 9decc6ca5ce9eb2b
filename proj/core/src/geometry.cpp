#include "reaper/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace reaper {

namespace {

// First component with magnitude above 1e-12 is made positive. Applied to
// every eigenvector / basis vector we hand out, so degenerate problems still
// produce a unique answer.
void sign_normalize_columns(Matrix& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      const double v = u(r, c);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) u.col(c) = -u.col(c);
        break;
      }
    }
  }
}

bool lex_greater(const Matrix& u, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    if (u(r, a) != u(r, b)) return u(r, a) > u(r, b);
  }
  return false;
}

}  // namespace

void validate_data_matrix(const Matrix& x) {
  if (x.rows() < 1) throw invariant_error("dataset has no ambient dimension");
  if (x.cols() < 1) throw invariant_error("dataset must contain at least one point");
  if (!x.allFinite()) throw invariant_error("dataset contains non-finite entries");
}

Subspace Subspace::checked(Matrix basis) {
  const Eigen::Index ambient = basis.rows();
  const Eigen::Index d = basis.cols();
  if (d <= 0 || d >= ambient) {
    std::ostringstream msg;
    msg << "subspace dimension " << d << " must lie strictly between 0 and " << ambient;
    throw invariant_error(msg.str());
  }
  if (!basis.allFinite()) throw invariant_error("subspace basis has non-finite entries");
  for (Eigen::Index i = 0; i < d; ++i) {
    if (std::abs(basis.col(i).norm() - 1.0) > 1e-10) {
      throw invariant_error("subspace basis vector is not unit-norm");
    }
    for (Eigen::Index j = i + 1; j < d; ++j) {
      if (std::abs(basis.col(i).dot(basis.col(j))) > 1e-10) {
        throw invariant_error("subspace basis vectors are not orthogonal");
      }
    }
  }
  const Matrix pi = basis * basis.transpose();
  if ((pi * pi - pi).norm() > 1e-8) {
    throw invariant_error("subspace projector is not idempotent");
  }
  if (std::abs(pi.trace() - static_cast<double>(d)) > 1e-8) {
    throw invariant_error("subspace projector trace does not match dimension");
  }
  return Subspace{std::move(basis)};
}

ProjectorRelaxation ProjectorRelaxation::checked(Matrix p, double target_trace) {
  if (p.rows() != p.cols()) throw invariant_error("projector relaxation must be square");
  if (!p.allFinite()) throw invariant_error("projector relaxation has non-finite entries");
  if ((p - p.transpose()).norm() > 1e-10) {
    throw invariant_error("projector relaxation is not symmetric");
  }
  if (std::abs(p.trace() - target_trace) > 1e-8) {
    throw invariant_error("projector relaxation trace does not match target");
  }
  const Matrix sym = 0.5 * (p + p.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw invariant_error("eigendecomposition failed");
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < -1e-9 || hi > 1.0 + 1e-9) {
    throw invariant_error("projector relaxation eigenvalues leave [0, 1]");
  }
  return ProjectorRelaxation{std::move(p), target_trace};
}

Vector spherize(const Vector& x) {
  if (!x.allFinite()) throw invariant_error("spherize: non-finite input");
  const double n = x.stableNorm();
  if (n == 0.0) return Vector::Zero(x.size());
  return x / n;
}

Matrix spherize_dataset(const Matrix& x) {
  validate_data_matrix(x);
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double n = x.col(c).stableNorm();
    if (n == 0.0) {
      out.col(c).setZero();
    } else {
      out.col(c) = x.col(c) / n;
    }
  }
  return out;
}

Vector euclidean_median(const Matrix& x, double tol, int max_iter) {
  validate_data_matrix(x);
  if (tol <= 0.0) throw invariant_error("euclidean_median: tolerance must be positive");
  if (max_iter < 1) throw invariant_error("euclidean_median: max_iter must be positive");
  const Eigen::Index n = x.cols();
  if (n == 1) return x.col(0);

  Vector c = x.rowwise().mean();
  Vector best = c;
  double best_objective = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < max_iter; ++iter) {
    // Distances, objective, and the negative subgradient R over the points
    // not coinciding with the current iterate.
    double objective = 0.0;
    int multiplicity = 0;
    Eigen::Index coincident = -1;
    Vector r = Vector::Zero(x.rows());
    Vector weighted_sum = Vector::Zero(x.rows());
    double weight_total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector diff = x.col(i) - c;
      const double dist = diff.norm();
      objective += dist;
      if (dist <= 1e-12) {
        ++multiplicity;
        if (coincident < 0) coincident = i;
      } else {
        r += diff / dist;
        weighted_sum += x.col(i) / dist;
        weight_total += 1.0 / dist;
      }
    }
    if (objective < best_objective) {
      best_objective = objective;
      best = c;
    }

    const double r_norm = r.norm();
    if (multiplicity > 0) {
      // Weiszfeld optimality test at a data point: x0 is the median iff the
      // pull of the remaining points does not exceed its multiplicity.
      if (r_norm <= static_cast<double>(multiplicity)) return x.col(coincident);
      // Otherwise step off the data point along the negative subgradient,
      // blending the Weiszfeld target with the current iterate.
      const Vector t = weighted_sum / weight_total;
      const double eta = static_cast<double>(multiplicity) / r_norm;
      c = (1.0 - eta) * t + eta * c;
    } else {
      if (r_norm <= tol) return c;
      c = weighted_sum / weight_total;
    }
  }
  throw convergence_error("euclidean_median: no convergence within max_iter", best);
}

Spectrum compute_spectrum(const Matrix& s) {
  if (s.rows() != s.cols()) throw invariant_error("compute_spectrum: matrix must be square");
  if (!s.allFinite()) throw invariant_error("compute_spectrum: non-finite entries");
  const Eigen::Index n = s.rows();
  const Matrix sym = 0.5 * (s + s.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) throw invariant_error("eigendecomposition failed");

  // Eigen returns ascending order; flip to nonincreasing.
  Vector lambda(n);
  Matrix u(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lambda(i) = es.eigenvalues()(n - 1 - i);
    u.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  sign_normalize_columns(u);

  // Within each group of equal eigenvalues (relative gap <= 1e-12) the
  // eigenbasis is arbitrary, so reorder the group lexicographically
  // decreasing to pin the output down. Only the vectors move: the values
  // stay in their sorted slots, since inside a group they agree to working
  // precision and shuffling their sub-tolerance noise would break the
  // nonincreasing order the callers rely on.
  const double scale = std::max(std::abs(lambda(0)), std::abs(lambda(n - 1)));
  const double tie_tol = 1e-12 * std::max(scale, 1e-300);
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && lambda(end - 1) - lambda(end) <= tie_tol) ++end;
    if (end - start > 1) {
      std::vector<Eigen::Index> order(end - start);
      std::iota(order.begin(), order.end(), start);
      std::stable_sort(order.begin(), order.end(),
                       [&u](Eigen::Index a, Eigen::Index b) { return lex_greater(u, a, b); });
      Matrix cols(n, end - start);
      for (Eigen::Index k = 0; k < end - start; ++k) cols.col(k) = u.col(order[k]);
      u.middleCols(start, end - start) = cols;
    }
    start = end;
  }

  // Self-check that the decomposition still reproduces the input.
  const double source_norm = std::max(sym.norm(), 1e-300);
  const Matrix rebuilt = u * lambda.asDiagonal() * u.transpose();
  if ((rebuilt - sym).norm() > 1e-7 * source_norm) {
    throw invariant_error("compute_spectrum: reconstruction check failed");
  }
  return Spectrum{std::move(lambda), std::move(u)};
}

Subspace pca_fit(const Matrix& x, int d) {
  validate_data_matrix(x);
  if (d <= 0 || d >= x.rows()) {
    throw invariant_error("pca_fit: dimension must lie strictly between 0 and D");
  }
  const Matrix c = x * x.transpose();
  Spectrum spec = compute_spectrum(c);
  return Subspace::checked(spec.eigenvectors.leftCols(d));
}

Subspace spherical_pca_fit(const Matrix& x, int d) {
  return pca_fit(spherize_dataset(x), d);
}

Subspace dominant_subspace(const ProjectorRelaxation& p, int d) {
  if (d <= 0 || d >= p.matrix.rows()) {
    throw invariant_error("dominant_subspace: dimension must lie strictly between 0 and D");
  }
  Spectrum spec = compute_spectrum(p.matrix);
  return Subspace::checked(spec.eigenvectors.leftCols(d));
}

double subspace_angle(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw invariant_error("subspace_angle: ambient dimensions differ");
  }
  // Work with the lower-dimensional side as the probe so the complement
  // projection below measures the largest principal angle.
  const Subspace& small = (a.dim() <= b.dim()) ? a : b;
  const Subspace& large = (a.dim() <= b.dim()) ? b : a;

  Eigen::JacobiSVD<Matrix> overlap(small.basis.transpose() * large.basis);
  const Vector sv = overlap.singularValues();
  const double cos_max = std::min(1.0, sv(sv.size() - 1));

  const Matrix residual = small.basis - large.basis * (large.basis.transpose() * small.basis);
  Eigen::JacobiSVD<Matrix> res_svd(residual);
  const double sin_max = std::min(1.0, res_svd.singularValues()(0));

  return std::atan2(sin_max, cos_max);
}

}  // namespace reaper
