#include "nalloc/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "nalloc/error.hpp"
#include "nalloc/log.hpp"
#include "nalloc/parallel.hpp"

namespace nalloc {

namespace {

constexpr int kRealizedVolWindow = 30;

const std::vector<std::string> kKnownStrategies = {"equal_weight",
                                                   "historical_mv", "neural"};

bool enabled(const BacktestConfig& config, const std::string& id) {
  return std::find(config.strategies.begin(), config.strategies.end(), id) !=
         config.strategies.end();
}

void validate_config(const BacktestConfig& config) {
  if (config.window < 2) {
    throw Error(ErrorCode::InvalidSpec, "window must be >= 2");
  }
  if (config.rebalance_every < 1) {
    throw Error(ErrorCode::InvalidSpec, "rebalance_every must be >= 1");
  }
  if (config.cov_window == 1) {
    throw Error(ErrorCode::InvalidSpec, "cov_window must be 0 (auto) or >= 2");
  }
  if (config.strategies.empty()) {
    throw Error(ErrorCode::InvalidSpec, "no strategies enabled");
  }
  for (const auto& id : config.strategies) {
    if (std::find(kKnownStrategies.begin(), kKnownStrategies.end(), id) ==
        kKnownStrategies.end()) {
      throw Error(ErrorCode::InvalidSpec, "unknown strategy '" + id + "'");
    }
  }
}

/// Runs fn(i) for every rebalance slot in parallel, capturing exceptions and
/// rethrowing the earliest-dated one afterwards.
template <class F>
void per_date_loop(Eigen::Index count, int threads, F&& fn) {
  std::vector<std::exception_ptr> errors(static_cast<size_t>(count));
  parallel_for(count, threads, [&](std::int64_t k) {
    try {
      fn(static_cast<Eigen::Index>(k));
    } catch (...) {
      errors[static_cast<size_t>(k)] = std::current_exception();
    }
  });
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

PipelineResult run_pipeline(const LstmModel& model, const ReturnPanel& panel,
                            const BacktestConfig& config) {
  validate_config(config);
  const Eigen::Index total = panel.rows();
  const Eigen::Index n = panel.cols();
  const int window = config.window;
  const int cov_window = config.cov_window > 0 ? config.cov_window : window;
  const bool run_neural = enabled(config, "neural");
  const bool run_hist = enabled(config, "historical_mv");

  if (run_neural && n != model.input_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "panel has " + std::to_string(n) + " assets, model expects " +
                    std::to_string(model.input_dim));
  }

  // Earliest scorable row: the trailing forecast history must itself be
  // computable (each forecast needs `window` prior rows), and the historical
  // baseline needs its lookback.
  Eigen::Index min_start = 1;
  if (run_neural) {
    min_start = std::max<Eigen::Index>(min_start, window + cov_window - 1);
  }
  min_start = std::max<Eigen::Index>(min_start, window);
  if (run_hist) min_start = std::max<Eigen::Index>(min_start, config.hist_lookback);

  Eigen::Index first = min_start;
  if (config.test_start) {
    first = std::lower_bound(panel.dates.begin(), panel.dates.end(),
                             *config.test_start) -
            panel.dates.begin();
    if (first < min_start) {
      throw Error(ErrorCode::InsufficientWarmup,
                  "first scored date " +
                      format_date(panel.dates[static_cast<size_t>(std::min(
                          first, total - 1))]) +
                      " needs " + std::to_string(min_start) +
                      " warmup rows, panel provides " + std::to_string(first));
    }
  }
  if (first >= total) {
    throw Error(ErrorCode::InsufficientWarmup,
                "no scored dates: panel has " + std::to_string(total) +
                    " rows, first scorable index is " + std::to_string(first));
  }

  const Eigen::Index scored = total - first;
  std::vector<Date> scored_dates(panel.dates.begin() + first, panel.dates.end());

  PipelineResult result;
  result.first_index = first;

  // Rebalance slots; in-between dates carry the previous weights.
  std::vector<Eigen::Index> rebalance;
  for (Eigen::Index t = first; t < total; t += config.rebalance_every) {
    rebalance.push_back(t);
  }
  const Eigen::Index n_rebalance = static_cast<Eigen::Index>(rebalance.size());

  auto carry_forward = [&](const std::vector<Vector>& solved) {
    Matrix w(scored, n);
    Eigen::Index slot = -1;
    for (Eigen::Index k = 0; k < scored; ++k) {
      if (slot + 1 < n_rebalance && rebalance[slot + 1] == first + k) ++slot;
      w.row(k) = solved[static_cast<size_t>(slot)].transpose();
    }
    return w;
  };

  for (const auto& id : kKnownStrategies) {
    if (!enabled(config, id)) continue;
    WeightSeries series;
    series.strategy = id;
    series.dates = scored_dates;
    series.tickers = panel.tickers;

    if (id == "equal_weight") {
      series.weights =
          Matrix::Constant(scored, n, 1.0 / double(n));
    } else if (id == "historical_mv") {
      std::vector<Vector> solved(static_cast<size_t>(n_rebalance));
      per_date_loop(n_rebalance, config.threads, [&](Eigen::Index k) {
        try {
          solved[static_cast<size_t>(k)] =
              historical_mv(panel, rebalance[k], config.hist_lookback).w;
        } catch (const Error& e) {
          throw Error(e.code(),
                      format_date(panel.dates[static_cast<size_t>(
                          rebalance[k])]) +
                          " (historical_mv): " + e.what());
        }
      });
      series.weights = carry_forward(solved);
    } else {  // neural
      // Pass 1: forecasts for every date the covariance history touches.
      const Eigen::Index f_begin = first - cov_window + 1;
      const Eigen::Index n_forecasts = total - f_begin;
      std::vector<Forecast> forecasts(static_cast<size_t>(n_forecasts));
      per_date_loop(n_forecasts, config.threads, [&](Eigen::Index k) {
        const Eigen::Index t = f_begin + k;
        Window w;
        w.inputs = panel.returns.middleRows(t - window, window);
        w.target = Vector::Zero(n);
        w.target_date = panel.dates[static_cast<size_t>(t)];
        forecasts[static_cast<size_t>(k)] = predict(model, w);
      });

      // Pass 2: per-date risk estimates (all scored dates, for reporting).
      std::vector<RiskEstimate> risks(static_cast<size_t>(scored));
      per_date_loop(scored, config.threads, [&](Eigen::Index k) {
        const Eigen::Index t = first + k;
        try {
          const Vector sigma = rolling_volatility(panel, t, window);
          const std::vector<Forecast> history(
              forecasts.begin() + (t - cov_window + 1 - f_begin),
              forecasts.begin() + (t + 1 - f_begin));
          const Matrix raw = forecast_covariance(history, cov_window);
          risks[static_cast<size_t>(k)] = RiskEstimate{
              panel.dates[static_cast<size_t>(t)], sigma,
              condition_covariance(raw, sigma, config.shrinkage,
                                   config.ridge_floor)};
        } catch (const Error& e) {
          throw Error(e.code(), format_date(panel.dates[static_cast<size_t>(
                                    t)]) +
                                    " (risk): " + e.what());
        }
      });

      // Pass 3: allocate on rebalance dates.
      std::vector<Vector> solved(static_cast<size_t>(n_rebalance));
      per_date_loop(n_rebalance, config.threads, [&](Eigen::Index k) {
        const Eigen::Index t = rebalance[k];
        try {
          solved[static_cast<size_t>(k)] =
              max_sharpe(forecasts[static_cast<size_t>(t - f_begin)].mu_hat,
                         risks[static_cast<size_t>(t - first)].cov)
                  .w;
        } catch (const Error& e) {
          throw Error(e.code(),
                      format_date(panel.dates[static_cast<size_t>(t)]) +
                          " (max_sharpe): " + e.what());
        }
      });
      series.weights = carry_forward(solved);

      result.forecasts.assign(forecasts.begin() + (first - f_begin),
                              forecasts.end());
      result.risks = std::move(risks);
    }
    result.weights.push_back(std::move(series));
  }

  log_info("backtest scored " + std::to_string(scored) + " dates over " +
           std::to_string(result.weights.size()) + " strategies");
  return result;
}

ReturnSeries portfolio_returns(const WeightSeries& weights,
                               const ReturnPanel& panel) {
  if (weights.tickers != panel.tickers) {
    throw Error(ErrorCode::AlignmentError, "ticker order mismatch");
  }
  const Eigen::Index m = weights.weights.rows();
  ReturnSeries series;
  series.dates = weights.dates;
  series.values.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto it = std::lower_bound(panel.dates.begin(), panel.dates.end(),
                                     weights.dates[static_cast<size_t>(k)]);
    if (it == panel.dates.end() || *it != weights.dates[static_cast<size_t>(k)]) {
      throw Error(ErrorCode::AlignmentError,
                  "weight date " +
                      format_date(weights.dates[static_cast<size_t>(k)]) +
                      " not in panel");
    }
    const Eigen::Index t = it - panel.dates.begin();
    double growth = 0.0;  // sum_i w_i (e^{r_i} - 1)
    for (Eigen::Index i = 0; i < panel.cols(); ++i) {
      growth += weights.weights(k, i) * std::expm1(panel.returns(t, i));
    }
    series.values(k) = std::log1p(growth);
  }
  return series;
}

PortfolioMetrics portfolio_metrics(const ReturnSeries& series,
                                   const BacktestConfig& config) {
  const Eigen::Index t_days = series.values.size();
  if (t_days < 2) {
    throw Error(ErrorCode::TooShort, "need at least 2 daily returns");
  }
  const double year = config.trading_days_per_year;
  PortfolioMetrics metrics;

  const double final_wealth = std::exp(series.values.sum());
  metrics.annual_return = std::pow(final_wealth, year / double(t_days)) - 1.0;

  const Vector simple = series.values.array().exp() - 1.0;
  const double rf_daily = config.risk_free_rate / year;
  const double mean = simple.mean();
  const double sd = std::sqrt((simple.array() - mean).square().sum() /
                              double(t_days - 1));
  if (sd > 0.0) {
    metrics.sharpe = (mean - rf_daily) / sd * std::sqrt(year);
  } else {
    log_debug("zero daily volatility, Sharpe reported as absent");
  }

  double wealth = 1.0, peak = 1.0, mdd = 0.0;
  for (Eigen::Index k = 0; k < t_days; ++k) {
    wealth *= std::exp(series.values(k));
    peak = std::max(peak, wealth);
    mdd = std::max(mdd, 1.0 - wealth / peak);
  }
  metrics.max_drawdown = mdd;
  return metrics;
}

BacktestReport build_report(const PipelineResult& result,
                            const ReturnPanel& panel,
                            const BacktestConfig& config) {
  BacktestReport report;
  report.tickers = panel.tickers;
  const Eigen::Index first = result.first_index;
  const Eigen::Index scored = panel.rows() - first;

  report.realized.tickers = panel.tickers;
  report.realized.dates.assign(panel.dates.begin() + first, panel.dates.end());
  report.realized.returns = panel.returns.bottomRows(scored);

  for (const auto& series : result.weights) {
    StrategyResult sr;
    sr.id = series.strategy;
    sr.display_name = strategy_display_name(sr.id);
    sr.weights = series;
    sr.daily = portfolio_returns(series, panel);
    sr.metrics = portfolio_metrics(sr.daily, config);
    sr.wealth_dates.push_back(panel.dates[static_cast<size_t>(first - 1)]);
    sr.wealth.push_back(1.0);
    double wealth = 1.0;
    for (Eigen::Index k = 0; k < sr.daily.values.size(); ++k) {
      wealth *= std::exp(sr.daily.values(k));
      sr.wealth_dates.push_back(sr.daily.dates[static_cast<size_t>(k)]);
      sr.wealth.push_back(wealth);
    }
    report.strategies.push_back(std::move(sr));
  }

  if (!result.forecasts.empty()) {
    report.forecasts = result.forecasts;
    report.prediction = prediction_metrics(result.forecasts, report.realized);

    // Volatility comparison where the trailing realized window exists.
    std::vector<Eigen::Index> usable;
    for (Eigen::Index k = 0; k < scored; ++k) {
      if (first + k >= kRealizedVolWindow) usable.push_back(k);
    }
    report.predicted_vol.resize(usable.size(), panel.cols());
    report.realized_vol.resize(usable.size(), panel.cols());
    for (size_t row = 0; row < usable.size(); ++row) {
      const Eigen::Index k = usable[row];
      report.vol_dates.push_back(report.realized.dates[static_cast<size_t>(k)]);
      report.predicted_vol.row(static_cast<Eigen::Index>(row)) =
          result.risks[static_cast<size_t>(k)]
              .cov.diagonal()
              .cwiseSqrt()
              .transpose();
      report.realized_vol.row(static_cast<Eigen::Index>(row)) =
          rolling_volatility(panel, first + k, kRealizedVolWindow).transpose();
    }
  }
  return report;
}

}  // namespace nalloc
