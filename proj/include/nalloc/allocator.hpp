#pragma once

#include "nalloc/market_data.hpp"

namespace nalloc {

/// Long-only, fully invested portfolio weights: w >= 0, sum(w) = 1.
struct Weights {
  Date date{};
  Vector w;
};

/// Maximizes w'mu / sqrt(w'cov w) over the simplex. When max(mu) > 0 this is
/// solved exactly through the convex program min y'cov y s.t. mu'y = 1,
/// y >= 0 (deterministic active-set iteration, multistart from equal weight
/// and each vertex), then w = y / sum(y). When every forecast is
/// non-positive the ratio rewards degenerate risk-seeking, so the allocation
/// falls back to min_variance.
Weights max_sharpe(const Vector& mu, const Matrix& cov);

/// Minimizes w'cov w over the simplex.
Weights min_variance(const Matrix& cov);

Weights equal_weight(int n);

/// Classical baseline: trailing mean and sample covariance over `lookback`
/// rows ending just before row t, conditioned with the default shrinkage
/// settings, then max_sharpe.
Weights historical_mv(const ReturnPanel& panel, Eigen::Index t, int lookback);

}  // namespace nalloc
