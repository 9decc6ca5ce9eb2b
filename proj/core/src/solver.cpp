#include "reaper/solver.hpp"

#include "reaper/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace reaper {

namespace {

void validate_weights(const Matrix& x, const Vector& w) {
  if (w.size() != x.cols()) throw invariant_error("weights length does not match point count");
  if (!w.allFinite()) throw invariant_error("weights contain non-finite entries");
  if ((w.array() < 0.0).any()) throw invariant_error("weights must be nonnegative");
}

void validate_trace_target(double d, Eigen::Index ambient) {
  if (!(d > 0.0) || !(d < static_cast<double>(ambient))) {
    std::ostringstream msg;
    msg << "trace target " << d << " must lie strictly between 0 and " << ambient;
    throw invariant_error(msg.str());
  }
}

// Covariance eigenvalues with tiny negative roundoff clamped to zero;
// violations beyond -1e-9 are real PSD failures and raise.
Vector clamp_psd_eigenvalues(const Vector& lambda) {
  // Eigensolver noise on a PSD matrix scales with its largest eigenvalue,
  // which reaches ~N/delta once residuals hit the weight cap, so the floor
  // cannot be purely absolute.
  const double floor = -std::max(1e-9, 1e-12 * lambda.cwiseAbs().maxCoeff());
  Vector out = lambda;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out(i) < 0.0) {
      if (out(i) < floor) {
        throw invariant_error("matrix is not positive semidefinite");
      }
      out(i) = 0.0;
    }
  }
  return out;
}

// Spectral form of the weighted least-squares solution: eigenbasis of the
// weighted covariance plus the water-filled shrinkage factors. The IRLS loop
// works in this form so it never assembles P until someone needs it.
struct SpectralSolution {
  Matrix u;
  Vector nu;
};

SpectralSolution weighted_ls_spectral(const Matrix& x, const Vector& w, double d) {
  const Matrix c = weighted_covariance_scaled(x, w);
  Spectrum spec = compute_spectrum(c);
  const Vector lambda = clamp_psd_eigenvalues(spec.eigenvalues);
  WaterfillResult wf = waterfill(lambda, d);
  return SpectralSolution{std::move(spec.eigenvectors), std::move(wf.nu)};
}

Matrix assemble_projector(const SpectralSolution& s) {
  Matrix p = s.u * s.nu.asDiagonal() * s.u.transpose();
  return 0.5 * (p + p.transpose());
}

// Residual norms ||x_i - P x_i|| computed in the eigenbasis: with z = U^t x,
// the residual coordinates are (1 - nu_j) z_j, so P itself is never formed.
Vector residual_norms(const Matrix& x, const SpectralSolution& s) {
  const Matrix z = s.u.transpose() * x;
  const Vector one_minus_nu = Vector::Ones(s.nu.size()) - s.nu;
  return (one_minus_nu.asDiagonal() * z).colwise().norm().transpose();
}

double huber_like(double r, double delta) {
  return r >= delta ? r : 0.5 * (r * r / delta + delta);
}

}  // namespace

Matrix weighted_covariance(const Matrix& x, const Vector& w) {
  validate_data_matrix(x);
  validate_weights(x, w);
  Matrix c = Matrix::Zero(x.rows(), x.rows());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    c.noalias() += w(i) * (x.col(i) * x.col(i).transpose());
  }
  return c;
}

Matrix weighted_covariance_scaled(const Matrix& x, const Vector& w) {
  validate_data_matrix(x);
  validate_weights(x, w);
  const Matrix scaled = x * w.array().sqrt().matrix().asDiagonal();
  return scaled * scaled.transpose();
}

WaterfillResult waterfill(const Vector& lambda, double d) {
  const Eigen::Index n = lambda.size();
  validate_trace_target(d, n);
  if (!lambda.allFinite()) throw invariant_error("waterfill: non-finite eigenvalues");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lambda(i) < 0.0) throw invariant_error("waterfill: negative eigenvalue");
    if (i + 1 < n && lambda(i + 1) > lambda(i)) {
      throw invariant_error("waterfill: eigenvalues must be sorted nonincreasing");
    }
  }

  // Eigenvalues at or below the rank tolerance behave as exact zeros for the
  // rank test, the water-level equation, and the shrinkage factors.
  const double rank_tol = std::max(1e-12 * lambda(0), 1e-300);
  Vector lam = lambda;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lam(i) > rank_tol) {
      ++rank;
    } else {
      lam(i) = 0.0;
    }
  }

  WaterfillResult result;
  result.nu = Vector::Zero(n);

  const int floor_d = static_cast<int>(std::floor(d));
  if (static_cast<double>(rank) <= d) {
    // Degenerate branch: the data does not fill d dimensions, so the budget
    // is spent as 1s plus one fractional slot; no water level exists.
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i < floor_d) {
        result.nu(i) = 1.0;
      } else if (i == floor_d) {
        result.nu(i) = d - floor_d;
      }
    }
    result.active_count = static_cast<int>((result.nu.array() > 0.0).count());
    return result;
  }

  // Closed-form scan: theta = (i - d) / sum_{k<=i} 1/lambda_k is the water
  // level iff lambda_i > theta >= lambda_{i+1}.
  double inv_sum = 0.0;
  for (Eigen::Index k = 0; k < floor_d + 1 && k < n; ++k) {
    if (lam(k) > 0.0) inv_sum += 1.0 / lam(k);
  }
  double theta = -1.0;
  Eigen::Index active = -1;
  for (Eigen::Index i = floor_d + 1; i <= rank; ++i) {  // 1-based candidate count i
    const double candidate = (static_cast<double>(i) - d) / inv_sum;
    const double next = (i < n) ? lam(i) : 0.0;
    if (lam(i - 1) > candidate && candidate >= next) {
      theta = candidate;
      active = i;
      break;
    }
    if (i < n && lam(i) > 0.0) inv_sum += 1.0 / lam(i);
  }

  if (active < 0) {
    // Floating-point boundary tie: fall back to bisection on the monotone
    // water-level residual g(theta) = sum (lam_i - theta)+ / lam_i - d,
    // then recompute theta in closed form for the identified active set.
    result.used_bisection_fallback = true;
    double lo = 0.0;          // g(0) = rank - d > 0
    double hi = lam(0);       // g(lam_0) = -d < 0
    for (int it = 0; it < 120; ++it) {
      const double mid = 0.5 * (lo + hi);
      double g = -d;
      for (Eigen::Index i = 0; i < rank; ++i) {
        if (lam(i) > mid) g += (lam(i) - mid) / lam(i);
      }
      (g > 0.0 ? lo : hi) = mid;
    }
    const double mid = 0.5 * (lo + hi);
    active = 0;
    double exact_inv_sum = 0.0;
    for (Eigen::Index i = 0; i < rank; ++i) {
      if (lam(i) > mid) {
        ++active;
        exact_inv_sum += 1.0 / lam(i);
      }
    }
    if (active == 0) throw invariant_error("waterfill: bisection found empty active set");
    theta = (static_cast<double>(active) - d) / exact_inv_sum;
    const double next = (active < n) ? lam(active) : 0.0;
    if (!(lam(active - 1) > theta && theta >= next - 1e-9 * lam(0))) {
      throw invariant_error("waterfill: bisection failed to bracket the water level");
    }
  }

  for (Eigen::Index i = 0; i < active; ++i) {
    result.nu(i) = 1.0 - theta / lam(i);
  }
  result.theta = theta;
  result.active_count = static_cast<int>(active);
  return result;
}

ProjectorRelaxation solve_weighted_ls(const Matrix& x, const Vector& w, double d) {
  validate_trace_target(d, x.rows());
  SpectralSolution s = weighted_ls_spectral(x, w, d);
  return ProjectorRelaxation{assemble_projector(s), d};
}

double reaper_objective(const Matrix& x, const Matrix& p) {
  if (p.rows() != x.rows() || p.cols() != x.rows()) {
    throw invariant_error("reaper_objective: shape mismatch");
  }
  return (x - p * x).colwise().norm().sum();
}

double regularized_objective(const Matrix& x, const Matrix& p, double delta) {
  if (p.rows() != x.rows() || p.cols() != x.rows()) {
    throw invariant_error("regularized_objective: shape mismatch");
  }
  if (!(delta > 0.0)) throw invariant_error("regularized_objective: delta must be positive");
  const Vector r = (x - p * x).colwise().norm().transpose();
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) total += huber_like(r(i), delta);
  return total;
}

std::pair<ProjectorRelaxation, IrlsTrace> irls_solve(const Matrix& x, const IrlsConfig& cfg,
                                                     const IterationObserver& observer) {
  validate_data_matrix(x);
  validate_trace_target(cfg.d, x.rows());
  if (!(cfg.delta > 0.0)) throw invariant_error("irls_solve: delta must be positive");
  if (cfg.epsilon < 0.0) throw invariant_error("irls_solve: epsilon must be nonnegative");
  if (cfg.max_iter < 1) throw invariant_error("irls_solve: max_iter must be positive");

  const Eigen::Index n = x.cols();
  Vector w = Vector::Ones(n);

  IrlsTrace trace;
  double prev_alpha = std::numeric_limits<double>::infinity();
  SpectralSolution current;
  SpectralSolution previous;
  bool have_previous = false;
  bool use_previous = false;

  for (int k = 1; k <= cfg.max_iter; ++k) {
    current = weighted_ls_spectral(x, w, cfg.d);
    const Vector r = residual_norms(x, current);

    // alpha^(k) is the regularized objective F at P^(k), the quantity the
    // convergence theory proves nonincreasing across reweighting sweeps.
    double alpha = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) alpha += huber_like(r(i), cfg.delta);

    if (observer) observer(k, assemble_projector(current));

    if (alpha < prev_alpha - cfg.epsilon) {
      trace.objective_values.push_back(alpha);
      prev_alpha = alpha;
      previous = current;
      have_previous = true;
      w = (1.0 / r.array().max(cfg.delta)).matrix();
      continue;
    }

    // Stopping rule fired. A value no worse than the previous one is an
    // accepted final iterate; an actual increase is numerical noise, so the
    // previous iterate is returned and the increase never enters the trace.
    trace.converged = true;
    if (alpha <= prev_alpha) {
      trace.objective_values.push_back(alpha);
    } else {
      use_previous = true;
    }
    break;
  }

  const SpectralSolution& chosen = (use_previous && have_previous) ? previous : current;
  Matrix p = assemble_projector(chosen);
  trace.iterates_count = static_cast<int>(trace.objective_values.size());
  trace.final_objective_f0 = reaper_objective(x, p);
  return {ProjectorRelaxation{std::move(p), cfg.d}, trace};
}

std::pair<ProjectorRelaxation, IrlsTrace> s_reaper_solve(const Matrix& x, const IrlsConfig& cfg,
                                                         const IterationObserver& observer) {
  return irls_solve(spherize_dataset(x), cfg, observer);
}

ProjectorRelaxation cap_to_strong_feasible(const Matrix& p, double d) {
  if (p.rows() != p.cols()) throw invariant_error("cap_to_strong_feasible: matrix must be square");
  if (!p.allFinite()) throw invariant_error("cap_to_strong_feasible: non-finite entries");
  if ((p - p.transpose()).norm() > 1e-10) {
    throw invariant_error("cap_to_strong_feasible: matrix is not symmetric");
  }
  if (std::abs(p.trace() - d) > 1e-8) {
    throw invariant_error("cap_to_strong_feasible: trace does not match d");
  }

  Spectrum spec = compute_spectrum(p);
  const Vector lambda = clamp_psd_eigenvalues(spec.eigenvalues);
  const Eigen::Index n = lambda.size();

  if (lambda(0) <= 1.0 + 1e-12) {
    return ProjectorRelaxation{p, d};  // already strongly feasible
  }

  // Smallest i* (1-based) whose eigenvalue prefix sum fits inside i*; exists
  // because the full sum is d <= D. At the boundary d == D the final prefix
  // can overshoot n by eigenvalue rounding, so that case gets the same
  // tolerance as the trace check above.
  Eigen::Index i_star = -1;
  double prefix = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    prefix += lambda(i);
    if (prefix <= static_cast<double>(i + 1)) {
      i_star = i + 1;
      break;
    }
  }
  if (i_star < 0) {
    if (prefix - static_cast<double>(n) > 1e-8) {
      throw invariant_error("cap_to_strong_feasible: trace exceeds dimension");
    }
    i_star = n;
  }

  Vector capped = lambda;
  double prefix_star = 0.0;
  for (Eigen::Index i = 0; i < i_star; ++i) prefix_star += lambda(i);
  for (Eigen::Index i = 0; i + 1 < i_star; ++i) capped(i) = 1.0;
  capped(i_star - 1) =
      std::clamp(1.0 - static_cast<double>(i_star) + prefix_star, 0.0, 1.0);

  Matrix out = spec.eigenvectors * capped.asDiagonal() * spec.eigenvectors.transpose();
  out = 0.5 * (out + out.transpose());
  return ProjectorRelaxation{std::move(out), d};
}

}  // namespace reaper
