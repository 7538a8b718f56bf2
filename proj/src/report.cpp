#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nalloc/backtest.hpp"
#include "nalloc/error.hpp"

namespace nalloc {

namespace {

std::string fixed6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string sig10(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

}  // namespace

std::string strategy_display_name(const std::string& id) {
  if (id == "equal_weight") return "Equal Weight";
  if (id == "historical_mv") return "Historical MV";
  if (id == "neural") return "Neural Portfolio";
  return id;
}

int strategy_rank(const std::string& id) {
  if (id == "equal_weight") return 0;
  if (id == "historical_mv") return 1;
  if (id == "neural") return 2;
  return 3;
}

void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<ChartSeries>& series) {
  const double width = 900, height = 420;
  const double ml = 70, mr = 20, mt = 40, mb = 30;
  size_t max_len = 0;
  double lo = 0.0, hi = 1.0;
  bool any = false;
  for (const auto& s : series) {
    max_len = std::max(max_len, s.values.size());
    for (double v : s.values) {
      if (!any) {
        lo = hi = v;
        any = true;
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!any || max_len < 2) return;
  if (hi - lo < 1e-12) {
    hi += 1.0;
    lo -= 1.0;
  }

  auto sx = [&](size_t i, size_t len) {
    return ml + (width - ml - mr) * double(i) / double(len - 1);
  };
  auto sy = [&](double v) {
    return height - mb - (height - mt - mb) * (v - lo) / (hi - lo);
  };

  auto out = open_out(path);
  char buf[160];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"420\" "
         "viewBox=\"0 0 900 420\">\n";
  out << "<rect width=\"900\" height=\"420\" fill=\"white\"/>\n";
  out << "<text x=\"450\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" << title << "</text>\n";
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                "stroke=\"black\"/>\n",
                ml, height - mb, width - mr, height - mb);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                "stroke=\"black\"/>\n",
                ml, mt, ml, height - mb);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" "
                "font-family=\"sans-serif\" font-size=\"11\">%.4f</text>\n",
                ml - 6, sy(hi) + 4, hi);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" "
                "font-family=\"sans-serif\" font-size=\"11\">%.4f</text>\n",
                ml - 6, sy(lo) + 4, lo);
  out << buf;

  size_t legend_row = 0;
  for (const auto& s : series) {
    if (s.values.size() < 2) continue;
    out << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%s%.2f,%.2f", i ? " " : "",
                    sx(i, s.values.size()), sy(s.values[i]));
      out << buf;
    }
    out << "\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"12\" height=\"3\" "
                  "fill=\"%s\"/><text x=\"%.1f\" y=\"%.1f\" "
                  "font-family=\"sans-serif\" font-size=\"12\">%s</text>\n",
                  ml + 10, mt + 8 + 18.0 * double(legend_row), s.color.c_str(),
                  ml + 28, mt + 12 + 18.0 * double(legend_row),
                  s.label.c_str());
    out << buf;
    ++legend_row;
  }
  out << "</svg>\n";
}

void emit_report(const BacktestReport& report, const std::string& out_dir,
                 bool with_svg) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir);
  const fs::path dir(out_dir);

  {
    auto out = open_out(dir / "metrics.csv");
    out << "strategy,annual_return,sharpe,max_drawdown\n";
    for (const auto& s : report.strategies) {
      out << s.display_name << ',' << fixed6(s.metrics.annual_return) << ','
          << (s.metrics.sharpe ? fixed6(*s.metrics.sharpe) : std::string())
          << ',' << fixed6(s.metrics.max_drawdown) << '\n';
    }
  }

  {
    auto out = open_out(dir / "metrics.txt");
    out << "Portfolio performance\n";
    out << "---------------------\n";
    for (const auto& s : report.strategies) {
      out << s.display_name << ": annual_return=" << fixed6(s.metrics.annual_return)
          << " sharpe="
          << (s.metrics.sharpe ? fixed6(*s.metrics.sharpe) : std::string("n/a"))
          << " max_drawdown=" << fixed6(s.metrics.max_drawdown) << '\n';
    }
    if (report.prediction) {
      out << "\nReturn prediction\n";
      out << "-----------------\n";
      out << "rmse=" << fixed6(report.prediction->rmse)
          << " mae=" << fixed6(report.prediction->mae)
          << " directional_accuracy="
          << fixed6(report.prediction->directional_accuracy) << '\n';
    }
  }

  for (const auto& s : report.strategies) {
    auto out = open_out(dir / ("wealth_" + s.id + ".csv"));
    out << "date,wealth\n";
    for (size_t k = 0; k < s.wealth.size(); ++k) {
      out << format_date(s.wealth_dates[k]) << ',' << fixed6(s.wealth[k])
          << '\n';
    }
  }

  for (const auto& s : report.strategies) {
    auto out = open_out(dir / ("weights_" + s.id + ".csv"));
    out << "date,ticker,weight\n";
    for (Eigen::Index k = 0; k < s.weights.weights.rows(); ++k) {
      for (Eigen::Index i = 0; i < s.weights.weights.cols(); ++i) {
        out << format_date(s.weights.dates[static_cast<size_t>(k)]) << ','
            << s.weights.tickers[static_cast<size_t>(i)] << ','
            << fixed6(s.weights.weights(k, i)) << '\n';
      }
    }
  }

  {
    auto out = open_out(dir / "vol_compare.csv");
    out << "date,ticker,predicted_vol,realized_vol\n";
    for (size_t k = 0; k < report.vol_dates.size(); ++k) {
      for (Eigen::Index i = 0; i < report.predicted_vol.cols(); ++i) {
        out << format_date(report.vol_dates[k]) << ','
            << report.tickers[static_cast<size_t>(i)] << ','
            << fixed6(report.predicted_vol(static_cast<Eigen::Index>(k), i))
            << ','
            << fixed6(report.realized_vol(static_cast<Eigen::Index>(k), i))
            << '\n';
      }
    }
  }

  {
    auto out = open_out(dir / "predictions.csv");
    out << "date,ticker,predicted,actual\n";
    for (size_t k = 0; k < report.forecasts.size(); ++k) {
      for (Eigen::Index i = 0; i < report.realized.cols(); ++i) {
        out << format_date(report.forecasts[k].date) << ','
            << report.tickers[static_cast<size_t>(i)] << ','
            << sig10(report.forecasts[k].mu_hat(i)) << ','
            << sig10(report.realized.returns(static_cast<Eigen::Index>(k), i))
            << '\n';
      }
    }
  }

  if (with_svg) {
    static const std::vector<std::string> palette = {
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::vector<ChartSeries> wealth_series;
    for (size_t s = 0; s < report.strategies.size(); ++s) {
      wealth_series.push_back(ChartSeries{report.strategies[s].display_name,
                                          palette[s % palette.size()],
                                          report.strategies[s].wealth});
    }
    write_line_chart((dir / "cumulative.svg").string(),
                     "Cumulative wealth (test period)", wealth_series);

    if (report.vol_dates.size() >= 2) {
      ChartSeries pred{"predicted", palette[0], {}};
      ChartSeries real{"realized", palette[1], {}};
      for (size_t k = 0; k < report.vol_dates.size(); ++k) {
        pred.values.push_back(
            report.predicted_vol.row(static_cast<Eigen::Index>(k)).mean());
        real.values.push_back(
            report.realized_vol.row(static_cast<Eigen::Index>(k)).mean());
      }
      write_line_chart((dir / "vol_compare.svg").string(),
                       "Predicted vs realized volatility (cross-asset mean)",
                       {pred, real});
    }
  }
}

}  // namespace nalloc
