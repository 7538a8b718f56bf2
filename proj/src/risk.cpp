#include "nalloc/risk.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "nalloc/error.hpp"

namespace nalloc {

Vector rolling_volatility(const ReturnPanel& panel, Eigen::Index t, int window) {
  if (window < 1) {
    throw Error(ErrorCode::InvalidSpec, "volatility window must be >= 1");
  }
  if (t < window || t > panel.rows()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "rolling window [" + std::to_string(t - window) + ", " +
                    std::to_string(t) + ") outside panel of " +
                    std::to_string(panel.rows()) + " rows");
  }
  const auto block = panel.returns.middleRows(t - window, window);
  const Eigen::RowVectorXd mean = block.colwise().mean();
  return ((block.rowwise() - mean).colwise().squaredNorm() / double(window))
      .cwiseSqrt()
      .transpose();
}

Matrix forecast_covariance(const std::vector<Forecast>& history, int window) {
  if (window < 2) {
    throw Error(ErrorCode::InvalidSpec, "covariance window must be >= 2");
  }
  if (static_cast<int>(history.size()) < window) {
    throw Error(ErrorCode::InsufficientHistory,
                std::to_string(history.size()) + " forecasts available, need " +
                    std::to_string(window));
  }
  const size_t begin = history.size() - static_cast<size_t>(window);
  const Eigen::Index n = history[begin].mu_hat.size();
  Matrix samples(window, n);
  for (int k = 0; k < window; ++k) {
    const Vector& mu = history[begin + static_cast<size_t>(k)].mu_hat;
    if (mu.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "forecast width changed");
    }
    samples.row(k) = mu.transpose();
  }
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Matrix centered = samples.rowwise() - mean;
  Matrix cov = (centered.transpose() * centered) / double(window - 1);
  return (cov + cov.transpose()) / 2.0;
}

Matrix condition_covariance(const Matrix& cov, const Vector& sigma,
                            double shrinkage, double floor) {
  const Eigen::Index n = cov.rows();
  if (cov.cols() != n || sigma.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "cov is " + std::to_string(cov.rows()) + "x" +
                    std::to_string(cov.cols()) + ", sigma has " +
                    std::to_string(sigma.size()) + " entries");
  }
  if (shrinkage < 0.0 || shrinkage > 1.0 || floor < 0.0) {
    throw Error(ErrorCode::InvalidSpec, "need shrinkage in [0,1], floor >= 0");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (cov(i, i) < -1e-12) {
      throw Error(ErrorCode::NegativeDiagonal,
                  "cov(" + std::to_string(i) + "," + std::to_string(i) +
                      ") = " + std::to_string(cov(i, i)));
    }
  }

  // Correlation from cov where the diagonal supports it, identity rows for
  // degenerate assets (zero forecast variance or zero rolling volatility).
  std::vector<bool> live(n);
  for (Eigen::Index i = 0; i < n; ++i) live[i] = cov(i, i) > 0.0 && sigma(i) > 0.0;
  Matrix corr = Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!live[i]) continue;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!live[j]) continue;
      corr(i, j) = corr(j, i) = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
    }
  }

  corr *= (1.0 - shrinkage);
  corr.diagonal().array() += shrinkage;

  Matrix out = sigma.asDiagonal() * corr * sigma.asDiagonal();
  out.diagonal().array() += floor;
  return (out + out.transpose()) / 2.0;
}

void export_risk(const std::vector<RiskEstimate>& estimates,
                 const std::vector<std::string>& tickers,
                 const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "cov", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir);

  std::ofstream sig(fs::path(dir) / "sigma.csv", std::ios::binary);
  if (!sig) throw Error(ErrorCode::IoError, "cannot write sigma.csv in " + dir);
  sig << "date,ticker,sigma\n";
  char buf[40];
  for (const auto& est : estimates) {
    for (Eigen::Index i = 0; i < est.sigma.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.10g", est.sigma(i));
      sig << format_date(est.date) << ',' << tickers[static_cast<size_t>(i)]
          << ',' << buf << '\n';
    }
    std::ofstream cov_out(fs::path(dir) / "cov" / (format_date(est.date) + ".csv"),
                          std::ios::binary);
    if (!cov_out) throw Error(ErrorCode::IoError, "cannot write cov CSV");
    for (Eigen::Index r = 0; r < est.cov.rows(); ++r) {
      for (Eigen::Index c = 0; c < est.cov.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.10g", est.cov(r, c));
        cov_out << (c ? "," : "") << buf;
      }
      cov_out << '\n';
    }
  }
}

}  // namespace nalloc
