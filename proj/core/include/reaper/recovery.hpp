#pragma once

#include "reaper/types.hpp"

// Recovery-theory layer: the permeance and linear-structure statistics, the
// deterministic exact-recovery conditions, and the Gaussian-model guarantee
// predicates.
//
// The deterministic theory says: if the inliers spread enough energy in every
// direction of L (permeance) while the outliers are spectrally flat
// (structure statistics), the true projector is the unique solution of the
// convex problem. Each condition below is the exact inequality from that
// theory, evaluated on computable statistics.

namespace reaper {

// Labeled dataset for the deterministic theory: inliers lie in the subspace
// (relative off-subspace residual <= 1e-10), outliers lie strictly off it.
// Either part may be empty (D x 0). Use validate_in_out (models.hpp) to test
// the labeling.
struct InOutDataset {
  Matrix inliers;   // D x N_in
  Matrix outliers;  // D x N_out
  Subspace subspace;
};

// A directional statistic value together with the direction achieving it.
struct DirectionalStat {
  double value = 0.0;
  Vector direction;
};

// inf over unit u in L of sum_inliers |<u, x>|.
//
// Exact for dim(L) = 1. For dim(L) >= 2 the objective is a concave
// minimization over the sphere, so the returned value is the best of a
// multi-start projected subgradient search (64 starts: basis directions,
// their negations, and fixed-seed random fill) and is a certified *upper
// bound* on the infimum; for dim(L) = 2 a 4096-point angular grid
// additionally certifies the value to within grid resolution.
// Empty inliers give 0.
DirectionalStat permeance(const InOutDataset& ds);

// permeance of the spherized inliers; equals the count of nonzero inliers
// when dim(L) = 1.
DirectionalStat spherical_permeance(const InOutDataset& ds);

// Largest singular value of A, by power iteration on the Gram matrix
// (tolerance 1e-12, at most 10000 iterations, deterministic start).
double spectral_norm(const Matrix& a);

// Spectral norm of the outliers projected onto M (structure_stat) or of
// their spherized projections (spherical_structure_stat); the one-argument
// overloads use the full ambient space, i.e. no projection. Projections that
// vanish spherize to zero columns. Empty input gives 0.
double structure_stat(const Matrix& outliers);
double structure_stat(const Matrix& outliers, const Subspace& m);
double spherical_structure_stat(const Matrix& outliers);
double spherical_structure_stat(const Matrix& outliers, const Subspace& m);

// All statistics plus the three exact-recovery verdicts:
//
//   reaper:  P(L)  > sqrt(2d) * S~(L_perp) * S(R^D)
//   sreaper: P~(L) > sqrt(2d) * S~(L_perp) * S~(R^D)   (on spherized data)
//   key:     P(L)  > sqrt(2d) * max{ ||Y~ Y^t||, ||Y~ Z^t|| }
//
// with Y the outliers projected onto L_perp, Z their projection onto L, and
// ~ denoting column spherization. The key condition is the sharper form that
// implies the first; a true verdict certifies that the true projector is the
// unique solution of the corresponding problem.
struct RecoveryReport {
  double permeance = 0.0;                       // P(L)
  double spherical_permeance = 0.0;             // P~(L)
  double structure_full = 0.0;                  // S(R^D)
  double structure_complement_spherical = 0.0;  // S~(L_perp)
  double spherical_structure_full = 0.0;        // S~(R^D)
  double key_condition_rhs = 0.0;               // max term above, pre-sqrt(2d)
  bool reaper_condition_holds = false;
  bool sreaper_condition_holds = false;
  bool key_condition_holds = false;
};

RecoveryReport check_deterministic(const InOutDataset& ds);

// Which probabilistic guarantee clause to evaluate. The first three are the
// exact inequalities of the Gaussian-model theorem; the simplified forms are
// the headline bounds with explicit constants (C1 = 4*pi, C2 = 2*pi,
// C3 = 12*sqrt(pi/2), and the spherized analogues).
enum class GuaranteeKind {
  kReaper,            // 1 <= d <= D-1
  kSReaper,           // 2 <= d <= D-1
  kSReaperD1,         // d = 1, D >= 2
  kSimplifiedReaper,  // 1 <= d <= (D-1)/2
  kSimplifiedSReaper, // 1 <= d <= (D-1)/2
};

struct GuaranteeCheck {
  bool holds = false;
  double failure_probability_bound = 1.0;
  double lhs = 0.0;  // inlier-side quantity of the printed inequality
  double rhs = 0.0;  // outlier-side quantity
};

struct HaystackParams;  // models.hpp

// Evaluates the requested inequality exactly as printed, on the sampling
// ratios rho_in = N_in/d and rho_out = N_out/D, and returns the verdict with
// its failure-probability bound (3.5e^{-c^2 d/2}, 4e^{-c^2 d/2}, 3e^{-c^2/2},
// or 4e^{-beta d} with beta = c^2/2 for the simplified forms). Throws
// invariant_error naming the violated clause when (d, D) is out of range for
// the requested kind.
GuaranteeCheck haystack_guarantee(const HaystackParams& params, double c, GuaranteeKind which);

}  // namespace reaper
