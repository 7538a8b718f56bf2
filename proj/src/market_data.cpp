#include "nalloc/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "nalloc/error.hpp"

namespace nalloc {

namespace {

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parse_number(const std::string& field, long line_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(value)) {
    throw Error(ErrorCode::MalformedRow,
                "line " + std::to_string(line_no) + ": bad numeric field '" +
                    field + "'");
  }
  return value;
}

struct WidePanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Matrix values;
};

/// Shared wide-CSV reader: header `date,T1,...,TN`, one parseable date plus
/// N numeric values per row, rows sorted by date on return.
WidePanel load_wide_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path);

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::MalformedRow, "empty file " + path);
  }
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "date") {
    throw Error(ErrorCode::MalformedRow,
                "header must be 'date,<ticker...>' in " + path);
  }
  WidePanel panel;
  panel.tickers.assign(header.begin() + 1, header.end());
  const size_t n = panel.tickers.size();

  std::vector<std::pair<Date, std::vector<double>>> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != n + 1) {
      throw Error(ErrorCode::MalformedRow,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(n + 1) + " fields, got " +
                      std::to_string(fields.size()));
    }
    Date date;
    try {
      date = parse_date(fields[0]);
    } catch (const Error&) {
      throw Error(ErrorCode::MalformedRow,
                  "line " + std::to_string(line_no) + ": bad date '" +
                      fields[0] + "'");
    }
    std::vector<double> values(n);
    for (size_t i = 0; i < n; ++i) {
      if (fields[i + 1].empty()) {
        throw Error(ErrorCode::MalformedRow,
                    "line " + std::to_string(line_no) + ": missing value for " +
                        panel.tickers[i]);
      }
      values[i] = parse_number(fields[i + 1], line_no);
    }
    rows.emplace_back(date, std::move(values));
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t t = 1; t < rows.size(); ++t) {
    if (rows[t].first == rows[t - 1].first) {
      throw Error(ErrorCode::DuplicateDate, format_date(rows[t].first));
    }
  }

  panel.dates.reserve(rows.size());
  panel.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(n));
  for (size_t t = 0; t < rows.size(); ++t) {
    panel.dates.push_back(rows[t].first);
    for (size_t i = 0; i < n; ++i) {
      panel.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) =
          rows[t].second[i];
    }
  }
  return panel;
}

void write_wide_csv(const std::vector<Date>& dates,
                    const std::vector<std::string>& tickers,
                    const Matrix& values, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << "date";
  for (const auto& t : tickers) out << ',' << t;
  out << '\n';
  char buf[40];
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    out << format_date(dates[static_cast<size_t>(t)]);
    for (Eigen::Index i = 0; i < values.cols(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", values(t, i));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace

PricePanel load_prices(const std::string& path) {
  WidePanel raw = load_wide_csv(path);
  for (Eigen::Index t = 0; t < raw.values.rows(); ++t) {
    for (Eigen::Index i = 0; i < raw.values.cols(); ++i) {
      if (raw.values(t, i) <= 0.0) {
        throw Error(ErrorCode::NonPositivePrice,
                    format_date(raw.dates[static_cast<size_t>(t)]) + " " +
                        raw.tickers[static_cast<size_t>(i)]);
      }
    }
  }
  if (raw.values.rows() < 2) {
    throw Error(ErrorCode::TooShort,
                "price panel needs at least 2 rows, got " +
                    std::to_string(raw.values.rows()));
  }
  return PricePanel{std::move(raw.dates), std::move(raw.tickers),
                    std::move(raw.values)};
}

ReturnPanel compute_log_returns(const PricePanel& panel) {
  const Eigen::Index t_rows = panel.rows();
  if (t_rows < 2) {
    throw Error(ErrorCode::TooShort, "need at least 2 price rows");
  }
  ReturnPanel out;
  out.tickers = panel.tickers;
  out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
  out.returns.resize(t_rows - 1, panel.cols());
  for (Eigen::Index t = 0; t + 1 < t_rows; ++t) {
    for (Eigen::Index i = 0; i < panel.cols(); ++i) {
      out.returns(t, i) = std::log(panel.prices(t + 1, i) / panel.prices(t, i));
    }
  }
  return out;
}

std::pair<ReturnPanel, ReturnPanel> split_by_date(const ReturnPanel& panel,
                                                  Date boundary) {
  const auto cut = std::lower_bound(panel.dates.begin(), panel.dates.end(),
                                    boundary);
  const Eigen::Index k = cut - panel.dates.begin();
  if (k == 0 || k == panel.rows()) {
    throw Error(ErrorCode::EmptySplit,
                "boundary " + format_date(boundary) +
                    " leaves an empty train or test side");
  }
  ReturnPanel train{std::vector<Date>(panel.dates.begin(), cut), panel.tickers,
                    panel.returns.topRows(k)};
  ReturnPanel test{std::vector<Date>(cut, panel.dates.end()), panel.tickers,
                   panel.returns.bottomRows(panel.rows() - k)};
  return {std::move(train), std::move(test)};
}

SummaryStats summary_stats(const ReturnPanel& panel) {
  const Eigen::Index t_rows = panel.rows();
  if (t_rows < 2) {
    throw Error(ErrorCode::TooShort, "need at least 2 return rows");
  }
  SummaryStats stats;
  stats.tickers = panel.tickers;
  stats.mean = panel.returns.colwise().mean();
  Matrix centered = panel.returns.rowwise() - stats.mean.transpose();
  stats.stddev =
      (centered.colwise().squaredNorm() / double(t_rows - 1)).cwiseSqrt();
  return stats;
}

void save_returns(const ReturnPanel& panel, const std::string& path) {
  write_wide_csv(panel.dates, panel.tickers, panel.returns, path);
}

ReturnPanel load_returns(const std::string& path) {
  WidePanel raw = load_wide_csv(path);
  if (raw.values.rows() < 1) {
    throw Error(ErrorCode::TooShort, "return panel is empty: " + path);
  }
  return ReturnPanel{std::move(raw.dates), std::move(raw.tickers),
                     std::move(raw.values)};
}

void save_prices(const PricePanel& panel, const std::string& path) {
  write_wide_csv(panel.dates, panel.tickers, panel.prices, path);
}

}  // namespace nalloc
