#include "nalloc/allocator.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "nalloc/error.hpp"
#include "nalloc/log.hpp"
#include "nalloc/risk.hpp"

namespace nalloc {

namespace {

constexpr double kKktTol = 1e-10;
constexpr int kMaxIter = 10000;

void check_square(const Vector& a, const Matrix& s) {
  if (s.rows() != s.cols() || s.rows() != a.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cov " + std::to_string(s.rows()) + "x" +
                    std::to_string(s.cols()) + " vs vector of " +
                    std::to_string(a.size()));
  }
}

/// Equality-constrained subproblem on the free set: minimize y_F' S_FF y_F
/// subject to a_F' y_F = 1. KKT gives y_F = u / (a_F'u) with S_FF u = a_F.
Vector solve_on_support(const Matrix& s, const Vector& a,
                        const std::vector<int>& free) {
  const int k = static_cast<int>(free.size());
  Matrix s_ff(k, k);
  Vector a_f(k);
  for (int r = 0; r < k; ++r) {
    a_f(r) = a(free[r]);
    for (int c = 0; c < k; ++c) s_ff(r, c) = s(free[r], free[c]);
  }
  Eigen::LDLT<Matrix> ldlt(s_ff);
  Vector u;
  bool usable = false;
  if (ldlt.info() == Eigen::Success) {
    u = ldlt.solve(a_f);
    usable = u.allFinite() &&
             (s_ff * u - a_f).norm() <= 1e-8 * (1.0 + a_f.norm());
  }
  if (!usable) {
    // singular principal submatrix: minimum-norm KKT solution
    u = s_ff.completeOrthogonalDecomposition().solve(a_f);
    if (!u.allFinite()) {
      throw Error(ErrorCode::SingularRisk, "risk subproblem has no solution");
    }
  }
  const double denom = a_f.dot(u);
  if (!(denom > 0.0)) {
    // a direction with vanishing variance carries the constraint: the ratio
    // objective is unbounded
    throw Error(ErrorCode::SingularRisk,
                "zero-variance feasible direction, Sharpe unbounded");
  }
  return u / denom;
}

/// argmin y'Sy s.t. a'y = 1, y >= 0, via a primal active-set iteration from
/// the feasible start y0. Deterministic: ties broken by lowest index.
Vector solve_ray_qp(const Matrix& s, const Vector& a, const Vector& y0) {
  const Eigen::Index n = a.size();
  Vector y = y0;
  std::vector<int> free;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y(i) > 0.0) free.push_back(static_cast<int>(i));
  }

  for (int iter = 0; iter < kMaxIter; ++iter) {
    Vector z = Vector::Zero(n);
    const Vector z_f = solve_on_support(s, a, free);
    for (size_t r = 0; r < free.size(); ++r) z(free[r]) = z_f(r);

    const double zmin = z_f.minCoeff();
    if (zmin >= -1e-12 * std::max(1.0, z_f.cwiseAbs().maxCoeff())) {
      y = z.cwiseMax(0.0);
      // KKT: at the subproblem optimum 2 S_FF y_F = nu a_F with nu = 2 y'Sy;
      // bound multipliers for the clamped coordinates must be non-negative.
      const Vector grad = 2.0 * (s * y);
      const double nu = 2.0 * y.dot(s * y);
      const double scale =
          std::max({1.0, std::abs(nu), grad.cwiseAbs().maxCoeff()});
      int worst = -1;
      double worst_val = -kKktTol * scale;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (y(i) > 0.0) continue;
        const double kappa = grad(i) - nu * a(i);
        if (kappa < worst_val) {
          worst_val = kappa;
          worst = static_cast<int>(i);
        }
      }
      if (worst < 0) return y;
      free.clear();
      for (Eigen::Index i = 0; i < n; ++i) {
        if (y(i) > 0.0 || i == worst) free.push_back(static_cast<int>(i));
      }
      continue;
    }

    // Step toward z until the first free coordinate hits zero; feasibility
    // (a'y = 1, y >= 0) is preserved because a'z = 1 as well.
    double alpha = 1.0;
    for (size_t r = 0; r < free.size(); ++r) {
      if (z_f(r) < 0.0) {
        const double yi = y(free[r]);
        alpha = std::min(alpha, yi / (yi - z_f(r)));
      }
    }
    y += alpha * (z - y);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (y(i) < 1e-15) y(i) = 0.0;
    }
    free.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (y(i) > 0.0) free.push_back(static_cast<int>(i));
    }
    if (free.empty()) {
      throw Error(ErrorCode::SingularRisk, "active-set emptied the support");
    }
  }
  log_error("active-set solver hit the iteration cap");
  return y;
}

/// Multistart wrapper: equal weight first (when feasible), then each vertex
/// with a_i > 0. Returns the lowest-indexed start attaining the best
/// objective within relative 1e-9.
Vector multistart_ray_qp(const Matrix& s, const Vector& a) {
  const Eigen::Index n = a.size();
  std::vector<Vector> starts;
  const Vector w0 = Vector::Constant(n, 1.0 / double(n));
  const double proj = a.dot(w0);
  if (proj > 0.0) starts.push_back(w0 / proj);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a(i) > 0.0) {
      Vector v = Vector::Zero(n);
      v(i) = 1.0 / a(i);
      starts.push_back(std::move(v));
    }
  }

  Vector best;
  double best_q = std::numeric_limits<double>::infinity();
  std::vector<double> objectives;
  std::vector<Vector> solutions;
  for (const auto& y0 : starts) {
    Vector y = solve_ray_qp(s, a, y0);
    const double q = y.dot(s * y);
    solutions.push_back(std::move(y));
    objectives.push_back(q);
    best_q = std::min(best_q, q);
  }
  for (size_t k = 0; k < solutions.size(); ++k) {
    if (objectives[k] <= best_q * (1.0 + 1e-9) + 1e-300) {
      best = solutions[k];
      break;
    }
  }
  if (!(best_q > 0.0)) {
    throw Error(ErrorCode::SingularRisk,
                "zero variance at the optimum, Sharpe unbounded");
  }
  return best;
}

Vector finalize_simplex(Vector w) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) < 0.0) w(i) = 0.0;  // clamp active-set roundoff, >= -1e-12
  }
  return w / w.sum();
}

}  // namespace

Weights max_sharpe(const Vector& mu, const Matrix& cov) {
  check_square(mu, cov);
  if (!mu.allFinite()) {
    throw Error(ErrorCode::DimensionMismatch, "non-finite forecast vector");
  }
  const Eigen::Index n = mu.size();
  if (n == 1) return Weights{{}, Vector::Ones(1)};
  if (mu.maxCoeff() <= 0.0) {
    log_debug("all forecasts non-positive, falling back to min_variance");
    return min_variance(cov);
  }
  const Vector y = multistart_ray_qp(cov, mu);
  return Weights{{}, finalize_simplex(y / y.sum())};
}

Weights min_variance(const Matrix& cov) {
  if (cov.rows() != cov.cols() || cov.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "cov must be square");
  }
  const Eigen::Index n = cov.rows();
  if (n == 1) return Weights{{}, Vector::Ones(1)};
  const Vector y = multistart_ray_qp(cov, Vector::Ones(n));
  return Weights{{}, finalize_simplex(y)};
}

Weights equal_weight(int n) {
  if (n < 1) throw Error(ErrorCode::ZeroAssets, "need at least one asset");
  return Weights{{}, Vector::Constant(n, 1.0 / double(n))};
}

Weights historical_mv(const ReturnPanel& panel, Eigen::Index t, int lookback) {
  if (lookback < 2) {
    throw Error(ErrorCode::InvalidSpec, "lookback must be >= 2");
  }
  if (t < lookback || t > panel.rows()) {
    throw Error(ErrorCode::InsufficientHistory,
                "row " + std::to_string(t) + " has fewer than " +
                    std::to_string(lookback) + " trailing rows");
  }
  const auto block = panel.returns.middleRows(t - lookback, lookback);
  const Vector mu = block.colwise().mean().transpose();
  const Matrix centered = block.rowwise() - mu.transpose();
  Matrix cov = (centered.transpose() * centered) / double(lookback - 1);
  cov = (cov + cov.transpose()) / 2.0;
  const Vector sigma = rolling_volatility(panel, t, lookback);
  const Matrix conditioned =
      condition_covariance(cov, sigma, kDefaultShrinkage, kDefaultRidgeFloor);
  Weights weights = max_sharpe(mu, conditioned);
  weights.date = t < panel.rows() ? panel.dates[static_cast<size_t>(t)]
                                  : next_weekday(panel.dates.back());
  return weights;
}

}  // namespace nalloc
