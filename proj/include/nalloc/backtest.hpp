#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nalloc/allocator.hpp"
#include "nalloc/lstm.hpp"
#include "nalloc/risk.hpp"
#include "nalloc/train.hpp"

namespace nalloc {

struct BacktestConfig {
  int window = 30;        // L: forecast inputs and rolling-volatility window
  int cov_window = 0;     // trailing forecasts for covariance; 0 = window
  int rebalance_every = 1;
  double shrinkage = kDefaultShrinkage;
  double ridge_floor = kDefaultRidgeFloor;
  int hist_lookback = 252;  // trailing window of the historical MV baseline
  std::vector<std::string> strategies = {"equal_weight", "historical_mv",
                                         "neural"};
  double trading_days_per_year = 252.0;
  double risk_free_rate = 0.0;  // annual, de-annualized by /trading_days
  std::optional<Date> test_start;  // first scored date; unset = earliest feasible
  int threads = 0;
};

struct WeightSeries {
  std::string strategy;
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Matrix weights;  // rows align with dates
};

struct PipelineResult {
  std::vector<WeightSeries> weights;   // canonical strategy order
  std::vector<Forecast> forecasts;     // one per scored date (neural enabled)
  std::vector<RiskEstimate> risks;     // one per scored date (neural enabled)
  Eigen::Index first_index = 0;        // panel row of the first scored date
};

/// Walk-forward loop: for every scored date t, inputs are panel rows
/// strictly before t; weights dated t settle against the realized return of
/// row t. Weights change only on rebalance dates and are carried forward in
/// between.
PipelineResult run_pipeline(const LstmModel& model, const ReturnPanel& panel,
                            const BacktestConfig& config);

struct ReturnSeries {
  std::vector<Date> dates;
  Vector values;  // daily portfolio log returns
};

/// Daily portfolio log return ln(1 + sum_i w_i (e^{r_i} - 1)): weights apply
/// to simple returns, the aggregate is re-logged.
ReturnSeries portfolio_returns(const WeightSeries& weights,
                               const ReturnPanel& panel);

struct PortfolioMetrics {
  double annual_return = 0.0;
  std::optional<double> sharpe;  // absent when daily volatility is zero
  double max_drawdown = 0.0;
};

/// Geometric annual return from final wealth, Sharpe from arithmetic daily
/// simple-return moments (divisor T-1) annualized by sqrt(trading days),
/// max drawdown over the wealth path including the initial 1.0 point.
PortfolioMetrics portfolio_metrics(const ReturnSeries& series,
                                   const BacktestConfig& config);

struct StrategyResult {
  std::string id;
  std::string display_name;
  WeightSeries weights;
  ReturnSeries daily;
  std::vector<Date> wealth_dates;  // leading entry = last warmup date
  std::vector<double> wealth;      // starts at 1.0
  PortfolioMetrics metrics;
};

struct BacktestReport {
  std::vector<std::string> tickers;
  std::vector<StrategyResult> strategies;
  std::optional<PredictionMetrics> prediction;
  std::vector<Forecast> forecasts;  // raw-unit forecasts on scored dates
  ReturnPanel realized;             // scored slice of the panel
  std::vector<Date> vol_dates;      // dates with both vol series available
  Matrix predicted_vol;             // sqrt(diag(conditioned covariance))
  Matrix realized_vol;              // trailing 30-day realized volatility
};

BacktestReport build_report(const PipelineResult& result,
                            const ReturnPanel& panel,
                            const BacktestConfig& config);

/// Writes metrics.csv, metrics.txt, wealth_<strategy>.csv,
/// weights_<strategy>.csv, vol_compare.csv, predictions.csv and (optionally)
/// cumulative.svg / vol_compare.svg into out_dir. Fixed 6-decimal formatting;
/// emitting the same report twice is byte-identical.
void emit_report(const BacktestReport& report, const std::string& out_dir,
                 bool with_svg = true);

struct ChartSeries {
  std::string label;
  std::string color;
  std::vector<double> values;
};

/// Minimal deterministic SVG line chart (fixed canvas, linear scales).
void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<ChartSeries>& series);

/// Display name for a strategy id ("equal_weight" -> "Equal Weight");
/// unknown ids pass through unchanged. Also defines the canonical
/// metrics-table row order via strategy_rank.
std::string strategy_display_name(const std::string& id);
int strategy_rank(const std::string& id);

}  // namespace nalloc
