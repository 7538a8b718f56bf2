#pragma once

#include <string>
#include <vector>

#include "nalloc/lstm.hpp"
#include "nalloc/market_data.hpp"

namespace nalloc {

inline constexpr double kDefaultShrinkage = 0.1;
inline constexpr double kDefaultRidgeFloor = 1e-8;

/// Per-date risk state: realized rolling volatilities and the conditioned
/// covariance used by the allocator.
struct RiskEstimate {
  Date date;
  Vector sigma;  // N, daily return units, >= 0
  Matrix cov;    // N x N, symmetric PSD
};

/// Trailing-window volatility ending just before row t:
///   sigma_i = sqrt((1/L) * sum_{k=t-L}^{t-1} (r_{k,i} - rbar_i)^2),
/// population divisor L.
Vector rolling_volatility(const ReturnPanel& panel, Eigen::Index t, int window);

/// Sample covariance (divisor L-1) of the trailing `window` forecast vectors.
Matrix forecast_covariance(const std::vector<Forecast>& history, int window);

/// Rescales the dependence structure of `cov` by realized volatilities:
/// extracts the correlation matrix (identity rows for degenerate assets),
/// shrinks it toward the identity by `shrinkage`, then rebuilds
/// D * R' * D + floor * I with D = diag(sigma). Result is symmetric PSD for
/// shrinkage in (0,1] and floor > 0.
Matrix condition_covariance(const Matrix& cov, const Vector& sigma,
                            double shrinkage, double floor);

/// Writes `sigma.csv` (date,ticker,sigma) plus one square matrix CSV per
/// date under `<dir>/cov/`.
void export_risk(const std::vector<RiskEstimate>& estimates,
                 const std::vector<std::string>& tickers,
                 const std::string& dir);

}  // namespace nalloc
