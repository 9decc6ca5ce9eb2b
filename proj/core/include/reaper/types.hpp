#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

// Core value types shared across the library.
//
// Datasets are stored as D x N matrices whose columns are the observations.
// All types are plain values: once constructed (and validated) they are never
// mutated, so they are safe to share across threads.

namespace reaper {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thrown when a value fails its type invariants (asymmetry, eigenvalues out
// of range, non-finite entries, ...).
class invariant_error : public std::runtime_error {
 public:
  explicit invariant_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an iteration budget runs out before the stopping rule fires.
// Carries the best iterate so callers can still inspect or reuse it.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& what, Vector best_iterate)
      : std::runtime_error(what), best_iterate_(std::move(best_iterate)) {}

  const Vector& best_iterate() const { return best_iterate_; }

 private:
  Vector best_iterate_;
};

// Checks the DataMatrix contract: at least one point, every entry finite.
// Columns are points; x.rows() is the ambient dimension D.
void validate_data_matrix(const Matrix& x);

// A d-dimensional linear model, stored as an orthonormal basis (columns).
//
// Invariants, checked by checked():
//   - 0 < d < D;
//   - basis columns unit-norm and pairwise orthogonal to 1e-10;
//   - the induced projector B*B^t is idempotent to 1e-8 (Frobenius) and has
//     trace within 1e-8 of d (automatic given orthonormality, but checked).
struct Subspace {
  Matrix basis;  // D x d, orthonormal columns

  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  int dim() const { return static_cast<int>(basis.cols()); }

  // Orthoprojector onto the subspace, Pi = B * B^t.
  Matrix projector() const { return basis * basis.transpose(); }

  // Validates the invariants above; throws invariant_error on failure.
  static Subspace checked(Matrix basis);
};

// A feasible point of the relaxed problem: symmetric P with eigenvalues in
// [0, 1] and trace d, where d may be fractional.
//
// Invariants, checked by checked():
//   - ||P - P^t||_F <= 1e-10;
//   - eigenvalues within [-1e-9, 1 + 1e-9];
//   - |trace(P) - target_trace| <= 1e-8.
struct ProjectorRelaxation {
  Matrix matrix;       // D x D symmetric
  double target_trace; // d

  int ambient_dim() const { return static_cast<int>(matrix.rows()); }

  // Validates the invariants above; throws invariant_error on failure.
  static ProjectorRelaxation checked(Matrix p, double target_trace);
};

// Eigendecomposition of a symmetric matrix with eigenvalues sorted
// nonincreasing and a deterministic eigenvector convention (see
// compute_spectrum in geometry.hpp).
struct Spectrum {
  Vector eigenvalues;  // nonincreasing
  Matrix eigenvectors; // D x D orthonormal, column i pairs with eigenvalues[i]
};

}  // namespace reaper
