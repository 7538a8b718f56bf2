// nalloc — end-to-end portfolio construction: ingest -> train -> backtest.
//
// Exit codes: 0 success, 2 data error, 3 training error, 4 backtest error,
// 64 usage error. Machine-readable output goes to files; stdout carries
// human summaries only. NALLOC_LOG={error,info,debug} controls stderr logs.

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nalloc/backtest.hpp"
#include "nalloc/checkpoint.hpp"
#include "nalloc/error.hpp"
#include "nalloc/log.hpp"
#include "nalloc/market_data.hpp"
#include "nalloc/risk.hpp"
#include "nalloc/synth.hpp"
#include "nalloc/train.hpp"

namespace {

using namespace nalloc;

constexpr int kExitData = 2;
constexpr int kExitTrain = 3;
constexpr int kExitBacktest = 4;
constexpr int kExitUsage = 64;

// ---------------------------------------------------------------------------
// Flat key=value config files. One file can drive every stage; each command
// picks the keys it knows and ignores the rest. Command-line flags win.
// ---------------------------------------------------------------------------

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path);
  std::map<std::string, std::string> values;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::MalformedRow,
                  path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return values;
}

/// Ties a CLI option to a config key so that file values apply only when the
/// flag was not given, and the effective value can be echoed back out.
class ConfigBinding {
 public:
  template <class T>
  void bind(CLI::Option* opt, const std::string& key, T* target) {
    items_.push_back(Item{key, opt,
                          [target, key](const std::string& text) {
                            *target = parse_value<T>(text, key);
                          },
                          [target] { return render_value(*target); }});
  }

  void apply(const std::map<std::string, std::string>& config) const {
    for (const auto& item : items_) {
      const auto it = config.find(item.key);
      if (it == config.end()) continue;
      if (item.opt != nullptr && item.opt->count() > 0) continue;  // flag wins
      item.set(it->second);
    }
  }

  void echo(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    for (const auto& item : items_) {
      out << item.key << " = " << item.get() << '\n';
    }
  }

 private:
  struct Item {
    std::string key;
    CLI::Option* opt;
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;
  };

  template <class T>
  static T parse_value(const std::string& text, const std::string& key) {
    if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw Error(ErrorCode::MalformedRow, "config key '" + key +
                                               "' wants true/false, got '" +
                                               text + "'");
    } else {
      T value{};
      const char* begin = text.data();
      const char* end = begin + text.size();
      const auto res = std::from_chars(begin, end, value);
      if (res.ec != std::errc() || res.ptr != end) {
        throw Error(ErrorCode::MalformedRow,
                    "config key '" + key + "' has bad value '" + text + "'");
      }
      return value;
    }
  }

  template <class T>
  static std::string render_value(const T& value) {
    if constexpr (std::is_same_v<T, std::string>) {
      return value;
    } else if constexpr (std::is_same_v<T, bool>) {
      return value ? "true" : "false";
    } else if constexpr (std::is_floating_point_v<T>) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", double(value));
      return buf;
    } else {
      return std::to_string(value);
    }
  }

  std::vector<Item> items_;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t pos = text.find(',', start);
    const std::string item = text.substr(
        start, pos == std::string::npos ? std::string::npos : pos - start);
    if (!item.empty()) out.push_back(item);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

int run_guarded(int failure_code, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const Error& e) {
    log_error(e.what());
    return failure_code;
  } catch (const std::exception& e) {
    log_error(e.what());
    return failure_code;
  }
}

std::string default_returns_path(const std::string& input) {
  const std::filesystem::path p(input);
  std::filesystem::path out = p.parent_path() / p.stem();
  return out.string() + "_returns.csv";
}

// ---------------------------------------------------------------------------
// Subcommand state
// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string config_path;
  std::string input;
  std::string out;
  std::uint64_t seed = 0;
  ConfigBinding binding;
};

struct SynthArgs {
  std::string config_path;
  std::string out = "synthetic_returns.csv";
  bool as_prices = false;
  SynthSpec spec;
  ConfigBinding binding;
};

struct TrainArgs {
  std::string config_path;
  std::string returns_path;
  std::string out = "model.nalloc";
  std::string log_path;
  std::string boundary;
  int window = 30;
  TrainConfig config;
  ConfigBinding binding;
};

struct BacktestArgs {
  std::string config_path;
  std::string returns_path;
  std::string checkpoint_path;
  std::string out_dir = "backtest_out";
  std::string test_start;
  std::string strategies = "equal_weight,historical_mv,neural";
  bool no_svg = false;
  bool export_risk_csv = false;
  std::uint64_t seed = 0;
  BacktestConfig config;
  ConfigBinding binding;
};

struct ReportArgs {
  std::string config_path;
  std::string dir;
  std::string out;
  bool no_svg = false;
  std::uint64_t seed = 0;
  double trading_days = 252.0;
  double risk_free = 0.0;
  ConfigBinding binding;
};

void apply_config(const std::string& path, const ConfigBinding& binding) {
  if (path.empty()) return;
  binding.apply(read_config_file(path));
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

void cmd_ingest(IngestArgs& args) {
  apply_config(args.config_path, args.binding);
  if (args.input.empty()) {
    throw Error(ErrorCode::FileNotFound, "no input price CSV given");
  }
  const PricePanel prices = load_prices(args.input);
  const ReturnPanel returns = compute_log_returns(prices);
  const SummaryStats stats = summary_stats(returns);

  std::printf("panel: %lld tickers, %lld price rows, %s .. %s\n",
              static_cast<long long>(prices.cols()),
              static_cast<long long>(prices.rows()),
              format_date(prices.dates.front()).c_str(),
              format_date(prices.dates.back()).c_str());
  std::printf("%-8s %12s %12s\n", "ticker", "mean", "std");
  for (size_t i = 0; i < stats.tickers.size(); ++i) {
    std::printf("%-8s %12.6f %12.6f\n", stats.tickers[i].c_str(),
                stats.mean(static_cast<Eigen::Index>(i)),
                stats.stddev(static_cast<Eigen::Index>(i)));
  }

  const std::string out =
      args.out.empty() ? default_returns_path(args.input) : args.out;
  save_returns(returns, out);
  args.binding.echo(out + ".cfg");
  std::printf("returns cache: %s\n", out.c_str());
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

void cmd_synth(SynthArgs& args) {
  apply_config(args.config_path, args.binding);
  const ReturnPanel panel = generate_panel(args.spec);
  if (args.as_prices) {
    PricePanel prices;
    prices.tickers = panel.tickers;
    prices.dates.push_back(prev_weekday(panel.dates.front()));
    prices.dates.insert(prices.dates.end(), panel.dates.begin(),
                        panel.dates.end());
    prices.prices.resize(panel.rows() + 1, panel.cols());
    prices.prices.row(0).setConstant(100.0);
    for (Eigen::Index t = 0; t < panel.rows(); ++t) {
      prices.prices.row(t + 1) =
          prices.prices.row(t).array() * panel.returns.row(t).array().exp();
    }
    save_prices(prices, args.out);
  } else {
    save_returns(panel, args.out);
  }
  args.binding.echo(args.out + ".cfg");
  std::printf("synthetic panel: %d assets x %d days -> %s (%s)\n",
              args.spec.n_assets, args.spec.n_days, args.out.c_str(),
              args.as_prices ? "prices" : "returns");
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

void cmd_train(TrainArgs& args) {
  apply_config(args.config_path, args.binding);
  if (args.returns_path.empty()) {
    throw Error(ErrorCode::FileNotFound, "no returns CSV given");
  }
  ReturnPanel panel = load_returns(args.returns_path);
  if (!args.boundary.empty()) {
    panel = split_by_date(panel, parse_date(args.boundary)).first;
  }
  const auto windows = make_windows(panel, args.window);
  log_info("training on " + std::to_string(windows.size()) + " windows");
  const TrainResult result = train(windows, args.config);

  Checkpoint cp{result.model, args.config, panel.tickers};
  save_checkpoint(cp, args.out);

  const std::string log_path =
      args.log_path.empty() ? args.out + ".log" : args.log_path;
  {
    std::ofstream log(log_path, std::ios::binary);
    if (!log) throw Error(ErrorCode::IoError, "cannot write " + log_path);
    char buf[64];
    for (size_t e = 0; e < result.epoch_losses.size(); ++e) {
      std::snprintf(buf, sizeof(buf), "epoch %zu mean_loss %.10g\n", e + 1,
                    result.epoch_losses[e]);
      log << buf;
    }
  }
  args.binding.echo(args.out + ".cfg");

  std::printf("trained %d epochs on %zu windows", args.config.epochs,
              windows.size());
  if (!result.epoch_losses.empty()) {
    std::printf(", first loss %.6f, final loss %.6f",
                result.epoch_losses.front(), result.epoch_losses.back());
  }
  std::printf("\ncheckpoint: %s\ntraining log: %s\n", args.out.c_str(),
              log_path.c_str());
}

// ---------------------------------------------------------------------------
// backtest
// ---------------------------------------------------------------------------

void print_metrics_summary(const BacktestReport& report) {
  std::printf("%-18s %14s %10s %14s\n", "strategy", "annual_return", "sharpe",
              "max_drawdown");
  for (const auto& s : report.strategies) {
    if (s.metrics.sharpe) {
      std::printf("%-18s %14.6f %10.6f %14.6f\n", s.display_name.c_str(),
                  s.metrics.annual_return, *s.metrics.sharpe,
                  s.metrics.max_drawdown);
    } else {
      std::printf("%-18s %14.6f %10s %14.6f\n", s.display_name.c_str(),
                  s.metrics.annual_return, "n/a", s.metrics.max_drawdown);
    }
  }
  if (report.prediction) {
    std::printf("prediction: rmse %.6f, mae %.6f, directional accuracy %.4f\n",
                report.prediction->rmse, report.prediction->mae,
                report.prediction->directional_accuracy);
  }
}

void cmd_backtest(BacktestArgs& args) {
  apply_config(args.config_path, args.binding);
  if (args.returns_path.empty() || args.checkpoint_path.empty()) {
    throw Error(ErrorCode::FileNotFound, "need --returns and --checkpoint");
  }
  const ReturnPanel panel = load_returns(args.returns_path);
  const Checkpoint cp = load_checkpoint(args.checkpoint_path);
  if (!cp.tickers.empty() && cp.tickers != panel.tickers) {
    throw Error(ErrorCode::AlignmentError,
                "checkpoint tickers do not match the returns panel");
  }

  args.config.strategies = split_list(args.strategies);
  if (!args.test_start.empty()) {
    args.config.test_start = parse_date(args.test_start);
  }

  const PipelineResult result = run_pipeline(cp.model, panel, args.config);
  const BacktestReport report = build_report(result, panel, args.config);
  emit_report(report, args.out_dir, !args.no_svg);
  if (args.export_risk_csv && !result.risks.empty()) {
    export_risk(result.risks, panel.tickers, args.out_dir + "/risk");
  }
  args.binding.echo(args.out_dir + "/config_effective.cfg");

  std::printf("backtest: %lld scored dates -> %s\n",
              static_cast<long long>(panel.rows() - result.first_index),
              args.out_dir.c_str());
  print_metrics_summary(report);
}

// ---------------------------------------------------------------------------
// report (re-render metrics + charts from stored series)
// ---------------------------------------------------------------------------

std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  std::string text = line;
  if (!text.empty() && text.back() == '\r') text.pop_back();
  while (true) {
    const size_t pos = text.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(text.substr(start));
      break;
    }
    fields.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parse_double_field(const std::string& text, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::MalformedRow, where + ": bad number '" + text + "'");
  }
  return v;
}

void cmd_report(ReportArgs& args) {
  apply_config(args.config_path, args.binding);
  if (args.dir.empty()) {
    throw Error(ErrorCode::FileNotFound, "no report directory given");
  }
  const std::string out_dir = args.out.empty() ? args.dir : args.out;
  std::filesystem::create_directories(out_dir);

  BacktestConfig metric_config;
  metric_config.trading_days_per_year = args.trading_days;
  metric_config.risk_free_rate = args.risk_free;

  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(args.dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("wealth_", 0) == 0 && name.size() > 11 &&
        name.substr(name.size() - 4) == ".csv") {
      ids.push_back(name.substr(7, name.size() - 11));
    }
  }
  std::sort(ids.begin(), ids.end(), [](const auto& a, const auto& b) {
    const int ra = strategy_rank(a), rb = strategy_rank(b);
    return ra != rb ? ra < rb : a < b;
  });
  if (ids.empty()) {
    throw Error(ErrorCode::FileNotFound,
                "no wealth_<strategy>.csv files in " + args.dir);
  }

  struct Row {
    std::string display;
    PortfolioMetrics metrics;
  };
  std::vector<Row> rows;
  std::vector<std::pair<std::string, std::vector<double>>> wealth_series;
  for (const auto& id : ids) {
    const std::string path = args.dir + "/wealth_" + id + ".csv";
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> wealth;
    std::vector<Date> dates;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = csv_fields(line);
      if (fields.size() != 2) {
        throw Error(ErrorCode::MalformedRow, path + ": " + line);
      }
      dates.push_back(parse_date(fields[0]));
      wealth.push_back(parse_double_field(fields[1], path));
    }
    if (wealth.size() < 3) {
      throw Error(ErrorCode::TooShort, path + " has fewer than 3 rows");
    }
    ReturnSeries series;
    series.dates.assign(dates.begin() + 1, dates.end());
    series.values.resize(static_cast<Eigen::Index>(wealth.size()) - 1);
    for (size_t k = 1; k < wealth.size(); ++k) {
      series.values(static_cast<Eigen::Index>(k - 1)) =
          std::log(wealth[k] / wealth[k - 1]);
    }
    rows.push_back(Row{strategy_display_name(id),
                       portfolio_metrics(series, metric_config)});
    wealth_series.emplace_back(strategy_display_name(id), std::move(wealth));
  }

  // optional prediction metrics, pooled over every (date, asset) row
  std::optional<PredictionMetrics> prediction;
  if (std::filesystem::exists(args.dir + "/predictions.csv")) {
    std::ifstream in(args.dir + "/predictions.csv");
    std::string line;
    std::getline(in, line);
    double sq = 0.0, abs_err = 0.0;
    long hits = 0, count = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = csv_fields(line);
      if (fields.size() != 4) {
        throw Error(ErrorCode::MalformedRow, "predictions.csv: " + line);
      }
      const double pred = parse_double_field(fields[2], "predictions.csv");
      const double actual = parse_double_field(fields[3], "predictions.csv");
      const double e = pred - actual;
      sq += e * e;
      abs_err += std::abs(e);
      if ((pred >= 0.0) == (actual >= 0.0)) ++hits;
      ++count;
    }
    if (count > 0) {
      PredictionMetrics pm;
      pm.rmse = std::sqrt(sq / double(count));
      pm.mae = abs_err / double(count);
      pm.directional_accuracy = double(hits) / double(count);
      prediction = pm;
    }
  }

  const auto fixed6 = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
  };
  {
    std::ofstream out(out_dir + "/metrics.csv", std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write metrics.csv");
    out << "strategy,annual_return,sharpe,max_drawdown\n";
    for (const auto& row : rows) {
      out << row.display << ',' << fixed6(row.metrics.annual_return) << ','
          << (row.metrics.sharpe ? fixed6(*row.metrics.sharpe) : std::string())
          << ',' << fixed6(row.metrics.max_drawdown) << '\n';
    }
  }
  {
    std::ofstream out(out_dir + "/metrics.txt", std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write metrics.txt");
    out << "Portfolio performance\n---------------------\n";
    for (const auto& row : rows) {
      out << row.display << ": annual_return=" << fixed6(row.metrics.annual_return)
          << " sharpe="
          << (row.metrics.sharpe ? fixed6(*row.metrics.sharpe)
                                 : std::string("n/a"))
          << " max_drawdown=" << fixed6(row.metrics.max_drawdown) << '\n';
    }
    if (prediction) {
      out << "\nReturn prediction\n-----------------\n";
      out << "rmse=" << fixed6(prediction->rmse)
          << " mae=" << fixed6(prediction->mae) << " directional_accuracy="
          << fixed6(prediction->directional_accuracy) << '\n';
    }
  }

  if (!args.no_svg) {
    static const std::vector<std::string> palette = {"#1f77b4", "#d62728",
                                                     "#2ca02c", "#9467bd"};
    std::vector<ChartSeries> chart;
    for (size_t s = 0; s < wealth_series.size(); ++s) {
      chart.push_back(ChartSeries{wealth_series[s].first,
                                  palette[s % palette.size()],
                                  wealth_series[s].second});
    }
    write_line_chart(out_dir + "/cumulative.svg",
                     "Cumulative wealth (test period)", chart);

    if (std::filesystem::exists(args.dir + "/vol_compare.csv")) {
      std::ifstream in(args.dir + "/vol_compare.csv");
      std::string line;
      std::getline(in, line);
      std::vector<std::string> order;
      std::map<std::string, std::pair<double, double>> sums;
      std::map<std::string, int> counts;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = csv_fields(line);
        if (fields.size() != 4) continue;
        if (!counts.count(fields[0])) order.push_back(fields[0]);
        sums[fields[0]].first +=
            parse_double_field(fields[2], "vol_compare.csv");
        sums[fields[0]].second +=
            parse_double_field(fields[3], "vol_compare.csv");
        counts[fields[0]] += 1;
      }
      ChartSeries pred{"predicted", palette[0], {}};
      ChartSeries real{"realized", palette[1], {}};
      for (const auto& date : order) {
        pred.values.push_back(sums[date].first / counts[date]);
        real.values.push_back(sums[date].second / counts[date]);
      }
      if (pred.values.size() >= 2) {
        write_line_chart(out_dir + "/vol_compare.svg",
                         "Predicted vs realized volatility (cross-asset mean)",
                         {pred, real});
      }
    }
  }

  std::printf("re-rendered %zu strategies -> %s\n", rows.size(),
              out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nalloc: joint return/risk modeling and portfolio backtesting"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  SynthArgs synth_args;
  TrainArgs train_args;
  BacktestArgs backtest_args;
  ReportArgs report_args;

  // ingest ------------------------------------------------------------------
  auto* ingest = app.add_subcommand(
      "ingest", "Load a wide price CSV, print summary stats, cache returns");
  ingest->add_option("--config", ingest_args.config_path,
                     "flat key=value config file");
  {
    auto& a = ingest_args;
    a.binding.bind(ingest->add_option("-i,--input", a.input,
                                      "wide CSV of adjusted close prices"),
                   "prices", &a.input);
    a.binding.bind(
        ingest->add_option("-o,--out", a.out,
                           "returns cache path (default <input>_returns.csv)"),
        "returns", &a.out);
    a.binding.bind(
        ingest->add_option("--seed", a.seed,
                           "accepted for uniformity; ingest is deterministic"),
        "seed", &a.seed);
  }

  // synth -------------------------------------------------------------------
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic AR(1)+GARCH(1,1) return panel");
  synth->add_option("--config", synth_args.config_path,
                    "flat key=value config file");
  {
    auto& a = synth_args;
    a.binding.bind(synth->add_option("-o,--out", a.out, "output CSV path"),
                   "returns", &a.out);
    a.binding.bind(
        synth->add_flag("--as-prices", a.as_prices,
                        "emit cumulative prices from 100 instead of returns"),
        "as_prices", &a.as_prices);
    a.binding.bind(synth->add_option("--n-assets", a.spec.n_assets, "assets"),
                   "n_assets", &a.spec.n_assets);
    a.binding.bind(synth->add_option("--n-days", a.spec.n_days, "days"),
                   "n_days", &a.spec.n_days);
    a.binding.bind(synth->add_option("--seed", a.spec.seed, "RNG seed"),
                   "seed", &a.spec.seed);
    a.binding.bind(
        synth->add_option("--garch-omega", a.spec.garch_omega, "GARCH omega"),
        "garch_omega", &a.spec.garch_omega);
    a.binding.bind(
        synth->add_option("--garch-alpha", a.spec.garch_alpha, "GARCH alpha"),
        "garch_alpha", &a.spec.garch_alpha);
    a.binding.bind(
        synth->add_option("--garch-beta", a.spec.garch_beta, "GARCH beta"),
        "garch_beta", &a.spec.garch_beta);
    a.binding.bind(synth->add_option("--cross-corr", a.spec.cross_corr,
                                     "constant innovation correlation"),
                   "cross_corr", &a.spec.cross_corr);
    a.binding.bind(synth->add_option("--ar-coeff", a.spec.ar_coeff,
                                     "AR(1) coefficient (planted signal)"),
                   "ar_coeff", &a.spec.ar_coeff);
  }

  // train -------------------------------------------------------------------
  auto* train_cmd = app.add_subcommand(
      "train", "Train the LSTM forecaster on a cached returns panel");
  train_cmd->add_option("--config", train_args.config_path,
                        "flat key=value config file");
  {
    auto& a = train_args;
    a.binding.bind(train_cmd->add_option("--returns", a.returns_path,
                                         "returns CSV (from ingest or synth)"),
                   "returns", &a.returns_path);
    a.binding.bind(train_cmd->add_option("-o,--out", a.out, "checkpoint path"),
                   "checkpoint", &a.out);
    a.binding.bind(
        train_cmd->add_option("--log", a.log_path,
                              "training log path (default <checkpoint>.log)"),
        "train_log", &a.log_path);
    a.binding.bind(
        train_cmd->add_option(
            "--boundary", a.boundary,
            "train on rows strictly before this date (YYYY-MM-DD)"),
        "boundary", &a.boundary);
    a.binding.bind(
        train_cmd->add_option("--window", a.window, "input window length L"),
        "window", &a.window);
    a.binding.bind(
        train_cmd->add_option("--epochs", a.config.epochs, "epochs"),
        "epochs", &a.config.epochs);
    a.binding.bind(train_cmd->add_option("--learning-rate",
                                         a.config.learning_rate, "step size"),
                   "learning_rate", &a.config.learning_rate);
    a.binding.bind(train_cmd->add_option("--batch-size", a.config.batch_size,
                                         "mini-batch size"),
                   "batch_size", &a.config.batch_size);
    a.binding.bind(train_cmd->add_option("--hidden-dim", a.config.hidden_dim,
                                         "LSTM hidden width d"),
                   "hidden_dim", &a.config.hidden_dim);
    a.binding.bind(train_cmd->add_option("--seed", a.config.seed, "RNG seed"),
                   "seed", &a.config.seed);
    a.binding.bind(
        train_cmd->add_option("--grad-clip-norm", a.config.grad_clip_norm,
                              "global gradient-norm clip (0 disables)"),
        "gradient_clip_norm", &a.config.grad_clip_norm);
    a.binding.bind(
        train_cmd->add_option("--beta1", a.config.beta1, "first-moment decay"),
        "beta1", &a.config.beta1);
    a.binding.bind(train_cmd->add_option("--beta2", a.config.beta2,
                                         "second-moment decay"),
                   "beta2", &a.config.beta2);
    a.binding.bind(train_cmd->add_option("--threads", a.config.threads,
                                         "0 = OpenMP default, 1 = serial"),
                   "threads", &a.config.threads);
  }

  // backtest ----------------------------------------------------------------
  auto* backtest = app.add_subcommand(
      "backtest",
      "Walk-forward backtest of the neural and baseline strategies");
  backtest->add_option("--config", backtest_args.config_path,
                       "flat key=value config file");
  {
    auto& a = backtest_args;
    a.binding.bind(backtest->add_option("--returns", a.returns_path,
                                        "returns CSV (full panel)"),
                   "returns", &a.returns_path);
    a.binding.bind(backtest->add_option("--checkpoint", a.checkpoint_path,
                                        "trained model checkpoint"),
                   "checkpoint", &a.checkpoint_path);
    a.binding.bind(
        backtest->add_option("-o,--out", a.out_dir, "report directory"),
        "out_dir", &a.out_dir);
    a.binding.bind(backtest->add_option("--test-start", a.test_start,
                                        "first scored date (YYYY-MM-DD); "
                                        "default earliest feasible"),
                   "boundary", &a.test_start);
    a.binding.bind(backtest->add_option("--window", a.config.window,
                                        "forecast/volatility window L"),
                   "window", &a.config.window);
    a.binding.bind(
        backtest->add_option("--cov-window", a.config.cov_window,
                             "forecast-covariance window (0 = window)"),
        "cov_window", &a.config.cov_window);
    a.binding.bind(
        backtest->add_option("--rebalance-every", a.config.rebalance_every,
                             "rebalance every k days"),
        "rebalance_every", &a.config.rebalance_every);
    a.binding.bind(backtest->add_option("--shrinkage", a.config.shrinkage,
                                        "correlation shrinkage lambda"),
                   "shrinkage", &a.config.shrinkage);
    a.binding.bind(backtest->add_option("--ridge-floor", a.config.ridge_floor,
                                        "diagonal ridge floor"),
                   "ridge_floor", &a.config.ridge_floor);
    a.binding.bind(
        backtest->add_option("--hist-lookback", a.config.hist_lookback,
                             "historical MV lookback"),
        "hist_lookback", &a.config.hist_lookback);
    a.binding.bind(
        backtest->add_option(
            "--strategies", a.strategies,
            "comma list: equal_weight,historical_mv,neural"),
        "strategies", &a.strategies);
    a.binding.bind(
        backtest->add_option("--trading-days", a.config.trading_days_per_year,
                             "trading days per year"),
        "trading_days_per_year", &a.config.trading_days_per_year);
    a.binding.bind(backtest->add_option("--risk-free", a.config.risk_free_rate,
                                        "annual risk-free rate"),
                   "risk_free_rate", &a.config.risk_free_rate);
    a.binding.bind(backtest->add_option("--threads", a.config.threads,
                                        "0 = OpenMP default, 1 = serial"),
                   "threads", &a.config.threads);
    a.binding.bind(
        backtest->add_flag("--no-svg", a.no_svg, "skip SVG charts"), "no_svg",
        &a.no_svg);
    a.binding.bind(backtest->add_flag("--export-risk", a.export_risk_csv,
                                      "also export per-date risk CSVs"),
                   "export_risk", &a.export_risk_csv);
    a.binding.bind(
        backtest->add_option(
            "--seed", a.seed,
            "accepted for uniformity; backtest is deterministic"),
        "seed", &a.seed);
  }

  // report ------------------------------------------------------------------
  auto* report = app.add_subcommand(
      "report", "Re-render metrics and charts from a stored report directory");
  report->add_option("--config", report_args.config_path,
                     "flat key=value config file");
  {
    auto& a = report_args;
    a.binding.bind(
        report->add_option("--dir", a.dir, "existing report directory"),
        "out_dir", &a.dir);
    a.binding.bind(report->add_option("-o,--out", a.out,
                                      "output directory (default --dir)"),
                   "report_out", &a.out);
    a.binding.bind(report->add_option("--trading-days", a.trading_days,
                                      "trading days per year"),
                   "trading_days_per_year", &a.trading_days);
    a.binding.bind(report->add_option("--risk-free", a.risk_free,
                                      "annual risk-free rate"),
                   "risk_free_rate", &a.risk_free);
    a.binding.bind(report->add_flag("--no-svg", a.no_svg, "skip SVG charts"),
                   "no_svg", &a.no_svg);
    a.binding.bind(
        report->add_option("--seed", a.seed,
                           "accepted for uniformity; report is deterministic"),
        "seed", &a.seed);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (ingest->parsed()) {
    return run_guarded(kExitData, [&] { cmd_ingest(ingest_args); });
  }
  if (synth->parsed()) {
    return run_guarded(kExitData, [&] { cmd_synth(synth_args); });
  }
  if (train_cmd->parsed()) {
    return run_guarded(kExitTrain, [&] { cmd_train(train_args); });
  }
  if (backtest->parsed()) {
    return run_guarded(kExitBacktest, [&] { cmd_backtest(backtest_args); });
  }
  if (report->parsed()) {
    return run_guarded(kExitBacktest, [&] { cmd_report(report_args); });
  }
  return kExitUsage;
}
