#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "nalloc/dates.hpp"

namespace nalloc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Date-indexed panel of positive adjusted close prices, one column per
/// ticker. Dates strictly increasing, no missing cells.
struct PricePanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Matrix prices;  // T x N

  Eigen::Index rows() const { return prices.rows(); }
  Eigen::Index cols() const { return prices.cols(); }
};

/// Date-indexed panel of daily log returns. Column order matches tickers.
struct ReturnPanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Matrix returns;  // T x N

  Eigen::Index rows() const { return returns.rows(); }
  Eigen::Index cols() const { return returns.cols(); }
};

/// Per-ticker mean and sample standard deviation (divisor T-1) of daily
/// log returns.
struct SummaryStats {
  std::vector<std::string> tickers;
  Vector mean;
  Vector stddev;
};

/// Loads a wide CSV `date,T1,...,TN` of adjusted close prices. Rows need
/// not be pre-sorted; the loader sorts by date. Rejects missing cells,
/// non-positive prices and duplicate dates.
PricePanel load_prices(const std::string& path);

/// returns[t][i] = ln(P[t+1][i] / P[t][i]); output dated by the later day
/// of each pair.
ReturnPanel compute_log_returns(const PricePanel& panel);

/// train: rows with date < boundary; test: rows with date >= boundary.
std::pair<ReturnPanel, ReturnPanel> split_by_date(const ReturnPanel& panel,
                                                  Date boundary);

SummaryStats summary_stats(const ReturnPanel& panel);

/// Wide-CSV cache of a return panel, same layout as the price CSV. Values
/// are written with 17 significant digits so a load reproduces the panel
/// bit-exactly.
void save_returns(const ReturnPanel& panel, const std::string& path);
ReturnPanel load_returns(const std::string& path);

void save_prices(const PricePanel& panel, const std::string& path);

}  // namespace nalloc
