#include "nalloc/synth.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <random>
#include <string>

#include "nalloc/error.hpp"

namespace nalloc {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.n_assets < 1) {
    throw Error(ErrorCode::InvalidSpec, "n_assets must be >= 1");
  }
  if (spec.n_days < 1) {
    throw Error(ErrorCode::InvalidSpec, "n_days must be >= 1");
  }
  if (spec.garch_omega < 0.0 || spec.garch_alpha < 0.0 ||
      spec.garch_beta < 0.0) {
    throw Error(ErrorCode::InvalidSpec,
                "garch_omega/alpha/beta must be non-negative");
  }
  if (spec.garch_alpha + spec.garch_beta >= 1.0) {
    throw Error(ErrorCode::InvalidSpec,
                "alpha + beta must be < 1 (covariance stationarity)");
  }
  if (!(spec.ar_coeff > -1.0 && spec.ar_coeff < 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "ar_coeff must be in (-1, 1)");
  }
  if (spec.cross_corr >= 1.0 ||
      (spec.n_assets > 1 &&
       spec.cross_corr <= -1.0 / double(spec.n_assets - 1))) {
    throw Error(ErrorCode::InvalidSpec,
                "cross_corr must yield a positive-definite correlation matrix"
                " (need cross_corr in (-1/(n_assets-1), 1))");
  }
}

ReturnPanel generate_panel(const SynthSpec& spec) {
  validate(spec);
  const int n = spec.n_assets;
  const int days = spec.n_days;

  Matrix corr = Matrix::Constant(n, n, spec.cross_corr);
  corr.diagonal().setOnes();
  Eigen::LLT<Matrix> llt(corr);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidSpec,
                "correlation matrix is not positive definite");
  }
  const Matrix chol = llt.matrixL();

  std::vector<std::mt19937_64> streams;
  streams.reserve(n);
  for (int i = 0; i < n; ++i) {
    streams.emplace_back(splitmix64(spec.seed ^ splitmix64(std::uint64_t(i) + 1)));
  }
  std::vector<std::normal_distribution<double>> normals(n);

  const double stationary =
      spec.garch_omega / (1.0 - spec.garch_alpha - spec.garch_beta);
  Vector sigma2 = Vector::Constant(n, stationary);
  Vector prev_r = Vector::Zero(n);
  Vector prev_u = Vector::Zero(n);

  ReturnPanel panel;
  panel.tickers.reserve(n);
  for (int i = 0; i < n; ++i) panel.tickers.push_back("A" + std::to_string(i + 1));
  panel.returns.resize(days, n);
  panel.dates.reserve(days);

  Date date = parse_date("2010-01-04");
  Vector z(n), eps(n);
  for (int t = 0; t < days; ++t) {
    for (int i = 0; i < n; ++i) z(i) = normals[i](streams[i]);
    eps = chol * z;
    for (int i = 0; i < n; ++i) {
      if (t > 0) {
        sigma2(i) = spec.garch_omega + spec.garch_alpha * prev_u(i) * prev_u(i) +
                    spec.garch_beta * sigma2(i);
      }
      const double u = std::sqrt(sigma2(i)) * eps(i);
      const double r = spec.ar_coeff * prev_r(i) + u;
      panel.returns(t, i) = r;
      prev_u(i) = u;
      prev_r(i) = r;
    }
    panel.dates.push_back(date);
    date = next_weekday(date);
  }
  return panel;
}

}  // namespace nalloc
