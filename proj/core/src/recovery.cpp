#include "reaper/recovery.hpp"

#include "reaper/geometry.hpp"
#include "reaper/models.hpp"
#include "reaper/rng.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace reaper {

namespace {

// Fixed seed for the random fill of the permeance multi-start; the statistic
// must be a pure function of its input.
constexpr std::uint64_t kPermeanceSeed = 0x5EEDBA5Eull;

// Orthonormal basis of the orthogonal complement of the subspace: the
// trailing columns of a full QR of its basis.
Matrix complement_basis(const Subspace& l) {
  const Eigen::Index ambient = l.basis.rows();
  const Eigen::Index d = l.basis.cols();
  Eigen::HouseholderQR<Matrix> qr(l.basis);
  const Matrix q = qr.householderQ() * Matrix::Identity(ambient, ambient);
  return q.rightCols(ambient - d);
}

// Objective of the permeance problem in subspace coordinates: a is a unit
// vector of length dim(L), y holds the inlier coordinates.
double permeance_value(const Matrix& y, const Vector& a) {
  return (y.transpose() * a).cwiseAbs().sum();
}

// Multi-start projected subgradient descent for inf_{||a||=1} sum_i |<a,y_i>|.
// The objective is concave on the sphere, so the minimum sits at an extreme
// configuration that plain descent finds reliably from enough starts; the
// result is an upper bound on the infimum by construction.
std::pair<double, Vector> minimize_directional_sum(const Matrix& y) {
  const Eigen::Index d = y.rows();
  double best_value = std::numeric_limits<double>::infinity();
  Vector best_a = Vector::Unit(d, 0);

  Rng rng = Rng::substream(kPermeanceSeed, static_cast<std::uint64_t>(y.cols()));
  const int n_starts = 64;
  for (int s = 0; s < n_starts; ++s) {
    Vector a(d);
    if (s < 2 * d && s < 64) {
      a = Vector::Unit(d, s / 2);
      if (s % 2 == 1) a = -a;
    } else {
      for (Eigen::Index i = 0; i < d; ++i) a(i) = rng.next_gaussian();
      const double n = a.norm();
      if (n == 0.0) {
        a = Vector::Unit(d, 0);
      } else {
        a /= n;
      }
    }

    for (int t = 1; t <= 200; ++t) {
      const double value = permeance_value(y, a);
      if (value < best_value) {
        best_value = value;
        best_a = a;
      }
      const Vector signs = (y.transpose() * a).array().sign().matrix();
      Vector g = y * signs;
      const double gn = g.norm();
      if (gn < 1e-15) break;  // subgradient vanished; stationary
      const double step = 0.5 / std::sqrt(static_cast<double>(t));
      a -= step * (g / gn);
      const double an = a.norm();
      if (an == 0.0) break;
      a /= an;
    }
    const double value = permeance_value(y, a);
    if (value < best_value) {
      best_value = value;
      best_a = a;
    }
  }

  if (d == 2) {
    // A half-circle sweep certifies the two-dimensional case to within the
    // grid resolution; |<a,y>| is symmetric under a -> -a.
    const int grid = 4096;
    for (int j = 0; j < grid; ++j) {
      const double phi = std::numbers::pi * j / grid;
      Vector a(2);
      a << std::cos(phi), std::sin(phi);
      const double value = permeance_value(y, a);
      if (value < best_value) {
        best_value = value;
        best_a = a;
      }
    }
  }
  return {best_value, best_a};
}

DirectionalStat permeance_of(const Matrix& inliers, const Subspace& l) {
  const Eigen::Index d = l.basis.cols();
  if (inliers.cols() == 0) {
    return DirectionalStat{0.0, l.basis.col(0)};
  }
  const Matrix y = l.basis.transpose() * inliers;  // d x N_in coordinates
  if (d == 1) {
    return DirectionalStat{y.cwiseAbs().sum(), l.basis.col(0)};
  }
  auto [value, a] = minimize_directional_sum(y);
  return DirectionalStat{value, l.basis * a};
}

}  // namespace

double spectral_norm(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  if (!a.allFinite()) throw invariant_error("spectral_norm: non-finite entries");
  if (a.norm() == 0.0) return 0.0;

  // Power iteration on the smaller Gram matrix; the deterministic tilted
  // start avoids being exactly orthogonal to the top eigenspace.
  const bool tall = a.rows() >= a.cols();
  const Matrix g = tall ? Matrix(a.transpose() * a) : Matrix(a * a.transpose());
  const Eigen::Index n = g.rows();
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 1e-3 * static_cast<double>(i);
  v /= v.norm();

  double estimate = 0.0;
  for (int it = 0; it < 10000; ++it) {
    const Vector w = g * v;
    const double rayleigh = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    if (std::abs(rayleigh - estimate) <= 1e-12 * std::max(rayleigh, 1e-300)) {
      estimate = rayleigh;
      break;
    }
    estimate = rayleigh;
  }
  return std::sqrt(std::max(estimate, 0.0));
}

DirectionalStat permeance(const InOutDataset& ds) {
  return permeance_of(ds.inliers, ds.subspace);
}

DirectionalStat spherical_permeance(const InOutDataset& ds) {
  if (ds.subspace.dim() == 1) {
    // Every nonzero inlier spherizes to a unit vector on the line, so the
    // directional sum is exactly the nonzero count.
    int nonzero = 0;
    for (Eigen::Index i = 0; i < ds.inliers.cols(); ++i) {
      if (ds.inliers.col(i).stableNorm() > 0.0) ++nonzero;
    }
    return DirectionalStat{static_cast<double>(nonzero), ds.subspace.basis.col(0)};
  }
  if (ds.inliers.cols() == 0) {
    return DirectionalStat{0.0, ds.subspace.basis.col(0)};
  }
  return permeance_of(spherize_dataset(ds.inliers), ds.subspace);
}

double structure_stat(const Matrix& outliers) {
  if (outliers.cols() == 0) return 0.0;
  return spectral_norm(outliers);
}

double structure_stat(const Matrix& outliers, const Subspace& m) {
  if (outliers.cols() == 0) return 0.0;
  if (outliers.rows() != m.basis.rows()) {
    throw invariant_error("structure_stat: ambient dimensions differ");
  }
  return spectral_norm(m.basis * (m.basis.transpose() * outliers));
}

double spherical_structure_stat(const Matrix& outliers) {
  if (outliers.cols() == 0) return 0.0;
  return spectral_norm(spherize_dataset(outliers));
}

double spherical_structure_stat(const Matrix& outliers, const Subspace& m) {
  if (outliers.cols() == 0) return 0.0;
  if (outliers.rows() != m.basis.rows()) {
    throw invariant_error("spherical_structure_stat: ambient dimensions differ");
  }
  return spectral_norm(spherize_dataset(m.basis * (m.basis.transpose() * outliers)));
}

RecoveryReport check_deterministic(const InOutDataset& ds) {
  RecoveryReport report;
  report.permeance = permeance(ds).value;
  report.spherical_permeance = spherical_permeance(ds).value;

  const double d = static_cast<double>(ds.subspace.dim());
  const double root_2d = std::sqrt(2.0 * d);

  if (ds.outliers.cols() == 0) {
    // All outlier statistics vanish; the strict inequalities reduce to
    // requiring positive permeance.
    report.reaper_condition_holds = report.permeance > 0.0;
    report.sreaper_condition_holds = report.spherical_permeance > 0.0;
    report.key_condition_holds = report.permeance > 0.0;
    return report;
  }

  const Matrix perp = complement_basis(ds.subspace);
  const Subspace l_perp = Subspace::checked(perp);

  report.structure_full = structure_stat(ds.outliers);
  report.structure_complement_spherical = spherical_structure_stat(ds.outliers, l_perp);
  report.spherical_structure_full = spherical_structure_stat(ds.outliers);

  const Matrix y = perp * (perp.transpose() * ds.outliers);        // onto L_perp
  const Matrix z = ds.subspace.basis *
                   (ds.subspace.basis.transpose() * ds.outliers);  // onto L
  const Matrix y_spherized = spherize_dataset(y);
  report.key_condition_rhs = std::max(spectral_norm(y_spherized * y.transpose()),
                                      spectral_norm(y_spherized * z.transpose()));

  report.reaper_condition_holds =
      report.permeance >
      root_2d * report.structure_complement_spherical * report.structure_full;
  report.sreaper_condition_holds =
      report.spherical_permeance >
      root_2d * report.structure_complement_spherical * report.spherical_structure_full;
  report.key_condition_holds = report.permeance > root_2d * report.key_condition_rhs;
  return report;
}

GuaranteeCheck haystack_guarantee(const HaystackParams& params, double c, GuaranteeKind which) {
  const int d = params.subspace_dim;
  const int big_d = params.ambient_dim;
  if (d < 1 || d >= big_d) {
    throw invariant_error("haystack_guarantee: subspace dimension out of range");
  }
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw invariant_error("haystack_guarantee: c must be a nonnegative real");
  }
  const double rho_in = params.rho_in();
  const double rho_out = params.rho_out();
  const double sigma_ratio = params.sigma_out / params.sigma_in;
  const double dd = static_cast<double>(d);
  const double bd = static_cast<double>(big_d);

  auto require = [&](bool ok, const char* clause) {
    if (!ok) {
      std::ostringstream msg;
      msg << "haystack_guarantee: (d, D) = (" << d << ", " << big_d
          << ") is outside the validity range of the " << clause << " clause";
      throw invariant_error(msg.str());
    }
  };

  GuaranteeCheck check;
  switch (which) {
    case GuaranteeKind::kReaper: {
      require(1 <= d && d <= big_d - 1, "reaper");
      check.lhs = std::sqrt(2.0 / std::numbers::pi) * rho_in - (2.0 + c) * std::sqrt(rho_in);
      check.rhs = sigma_ratio * std::sqrt(2.0 * bd / (bd - dd - 0.5)) *
                  std::pow(std::sqrt(rho_out) + 1.0 + c * std::sqrt(dd / bd), 2);
      check.failure_probability_bound = 3.5 * std::exp(-c * c * dd / 2.0);
      break;
    }
    case GuaranteeKind::kSReaper: {
      require(2 <= d && d <= big_d - 1, "sreaper");
      check.lhs = std::sqrt(2.0 / std::numbers::pi) * rho_in -
                  (2.0 + c * std::sqrt(2.0)) * std::sqrt(rho_in);
      check.rhs = std::sqrt(bd / (bd - 0.5)) * std::sqrt(2.0 * bd / (bd - dd - 0.5)) *
                  std::pow(std::sqrt(rho_out) + 1.0 + c * std::sqrt(dd / bd), 2);
      check.failure_probability_bound = 4.0 * std::exp(-c * c * dd / 2.0);
      break;
    }
    case GuaranteeKind::kSReaperD1: {
      require(d == 1 && big_d >= 2, "sreaper_d1");
      check.lhs = rho_in;
      check.rhs = std::sqrt(bd / (bd - 0.5)) * std::sqrt(2.0 * bd / (bd - 1.5)) *
                  std::pow(std::sqrt(rho_out) + 1.0 + c * std::sqrt(1.0 / bd), 2);
      check.failure_probability_bound = 3.0 * std::exp(-c * c / 2.0);
      break;
    }
    case GuaranteeKind::kSimplifiedReaper: {
      require(1 <= d && 2 * d <= big_d - 1, "simplified_reaper");
      const double beta = c * c / 2.0;
      check.lhs = rho_in;
      check.rhs = 4.0 * std::numbers::pi + 2.0 * std::numbers::pi * beta +
                  12.0 * std::sqrt(std::numbers::pi / 2.0) * sigma_ratio *
                      (rho_out + 1.0 + 4.0 * beta);
      check.failure_probability_bound = 4.0 * std::exp(-beta * dd);
      break;
    }
    case GuaranteeKind::kSimplifiedSReaper: {
      require(1 <= d && 2 * d <= big_d - 1, "simplified_sreaper");
      const double beta = c * c / 2.0;
      check.lhs = rho_in;
      check.rhs = 4.0 * std::numbers::pi + 4.0 * std::numbers::pi * beta +
                  12.0 * std::sqrt(3.0 * std::numbers::pi / 5.0) * (rho_out + 1.0 + 4.0 * beta);
      check.failure_probability_bound = 4.0 * std::exp(-beta * dd);
      break;
    }
  }
  check.holds = check.lhs >= check.rhs;
  return check;
}

}  // namespace reaper
