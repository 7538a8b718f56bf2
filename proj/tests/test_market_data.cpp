#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nalloc/error.hpp"
#include "nalloc/market_data.hpp"
#include "test_util.hpp"

using namespace nalloc;
using testutil::same_matrix;
using testutil::TempDir;
using testutil::thrown_code;
using testutil::write_file;

TEST_CASE("load_prices parses a small wide CSV") {
  TempDir tmp("prices");
  write_file(tmp.file("p.csv"),
             "date,AA,BB\n"
             "2020-01-02,100,50\n"
             "2020-01-03,101,49\n"
             "2020-01-06,102,51\n");
  const PricePanel panel = load_prices(tmp.file("p.csv"));
  CHECK(panel.rows() == 3);
  CHECK(panel.cols() == 2);
  CHECK(panel.tickers == std::vector<std::string>{"AA", "BB"});
  CHECK(panel.prices(0, 0) == 100.0);
  CHECK(panel.prices(2, 1) == 51.0);
  CHECK(panel.dates.front() == parse_date("2020-01-02"));
}

TEST_CASE("load_prices accepts the ten-ticker header") {
  TempDir tmp("prices10");
  write_file(tmp.file("p.csv"),
             "date,AAPL,MSFT,GOOGL,AMZN,TSLA,NVDA,META,JPM,V,UNH\n"
             "2020-01-02,1,2,3,4,5,6,7,8,9,10\n"
             "2020-01-03,1,2,3,4,5,6,7,8,9,10\n");
  const PricePanel panel = load_prices(tmp.file("p.csv"));
  CHECK(panel.cols() == 10);
  CHECK(panel.tickers[4] == "TSLA");
}

TEST_CASE("load_prices sorts unsorted rows by date") {
  TempDir tmp("unsorted");
  write_file(tmp.file("p.csv"),
             "date,AA\n"
             "2020-01-06,3\n"
             "2020-01-02,1\n"
             "2020-01-03,2\n");
  const PricePanel panel = load_prices(tmp.file("p.csv"));
  CHECK(panel.prices(0, 0) == 1.0);
  CHECK(panel.prices(1, 0) == 2.0);
  CHECK(panel.prices(2, 0) == 3.0);
  CHECK(std::is_sorted(panel.dates.begin(), panel.dates.end()));
}

TEST_CASE("load_prices error paths") {
  TempDir tmp("bad");
  CHECK(thrown_code([&] { load_prices(tmp.file("absent.csv")); }) ==
        ErrorCode::FileNotFound);

  write_file(tmp.file("zero.csv"), "date,AA\n2020-01-02,0\n2020-01-03,1\n");
  CHECK(thrown_code([&] { load_prices(tmp.file("zero.csv")); }) ==
        ErrorCode::NonPositivePrice);

  write_file(tmp.file("neg.csv"), "date,AA\n2020-01-02,-5\n2020-01-03,1\n");
  CHECK(thrown_code([&] { load_prices(tmp.file("neg.csv")); }) ==
        ErrorCode::NonPositivePrice);

  write_file(tmp.file("dup.csv"), "date,AA\n2020-01-02,1\n2020-01-02,2\n");
  CHECK(thrown_code([&] { load_prices(tmp.file("dup.csv")); }) ==
        ErrorCode::DuplicateDate);

  write_file(tmp.file("short.csv"), "date,AA\n2020-01-02,1,9\n2020-01-03,1\n");
  CHECK(thrown_code([&] { load_prices(tmp.file("short.csv")); }) ==
        ErrorCode::MalformedRow);

  write_file(tmp.file("missing.csv"), "date,AA,BB\n2020-01-02,1,\n2020-01-03,1,2\n");
  CHECK(thrown_code([&] { load_prices(tmp.file("missing.csv")); }) ==
        ErrorCode::MalformedRow);

  write_file(tmp.file("nonnum.csv"), "date,AA\n2020-01-02,abc\n2020-01-03,1\n");
  CHECK(thrown_code([&] { load_prices(tmp.file("nonnum.csv")); }) ==
        ErrorCode::MalformedRow);

  write_file(tmp.file("baddate.csv"), "date,AA\n2020-02-30,1\n2020-01-03,1\n");
  CHECK(thrown_code([&] { load_prices(tmp.file("baddate.csv")); }) ==
        ErrorCode::MalformedRow);

  write_file(tmp.file("onerow.csv"), "date,AA\n2020-01-02,1\n");
  CHECK(thrown_code([&] { load_prices(tmp.file("onerow.csv")); }) ==
        ErrorCode::TooShort);
}

TEST_CASE("compute_log_returns basics") {
  PricePanel panel;
  panel.tickers = {"AA"};
  panel.dates = {parse_date("2020-01-02"), parse_date("2020-01-03"),
                 parse_date("2020-01-06")};

  SUBCASE("constant prices give zero returns") {
    panel.prices = Matrix::Constant(3, 1, 100.0);
    const ReturnPanel ret = compute_log_returns(panel);
    CHECK(ret.rows() == 2);
    CHECK(ret.returns(0, 0) == 0.0);
    CHECK(ret.returns(1, 0) == 0.0);
    CHECK(ret.dates.front() == parse_date("2020-01-03"));
  }

  SUBCASE("price e after price 1 gives return 1") {
    panel.dates.resize(2);
    panel.prices.resize(2, 1);
    panel.prices << 1.0, std::exp(1.0);
    const ReturnPanel ret = compute_log_returns(panel);
    CHECK(ret.returns(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("values match an independently computed evaluation") {
    panel.prices.resize(3, 1);
    panel.prices << 100.0, 102.0, 99.0;
    const ReturnPanel ret = compute_log_returns(panel);
    // frozen from a 30-digit evaluation of ln(102/100), ln(99/102)
    CHECK(ret.returns(0, 0) ==
          doctest::Approx(0.0198026272961797130).epsilon(1e-14));
    CHECK(ret.returns(1, 0) ==
          doctest::Approx(-0.0298529631496811542).epsilon(1e-14));
  }

  SUBCASE("one price row is too short") {
    panel.dates.resize(1);
    panel.prices = Matrix::Constant(1, 1, 100.0);
    CHECK(thrown_code([&] { compute_log_returns(panel); }) == ErrorCode::TooShort);
  }
}

TEST_CASE("price round-trip from cumulative log returns") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(0.8, 1.25);
  PricePanel panel;
  panel.tickers = {"A", "B", "C"};
  panel.prices.resize(40, 3);
  Date d = parse_date("2019-06-03");
  for (int t = 0; t < 40; ++t) {
    panel.dates.push_back(d);
    d = next_weekday(d);
    for (int i = 0; i < 3; ++i) {
      panel.prices(t, i) = t == 0 ? 100.0 * uni(rng) : panel.prices(t - 1, i) * uni(rng);
    }
  }
  const ReturnPanel ret = compute_log_returns(panel);
  for (int i = 0; i < 3; ++i) {
    double cum = 0.0;
    for (Eigen::Index t = 0; t < ret.rows(); ++t) {
      cum += ret.returns(t, i);
      const double rebuilt = panel.prices(0, i) * std::exp(cum);
      CHECK(std::abs(rebuilt - panel.prices(t + 1, i)) <=
            1e-12 * panel.prices(t + 1, i));
    }
  }
}

TEST_CASE("split_by_date partitions the panel") {
  ReturnPanel panel = testutil::random_panel(10, 2, 7);

  SUBCASE("boundary after row 7") {
    const auto [train, test] = split_by_date(panel, panel.dates[7]);
    CHECK(train.rows() == 7);
    CHECK(test.rows() == 3);
    CHECK(train.rows() + test.rows() == panel.rows());
    // concatenation reproduces the input
    Matrix joined(panel.rows(), panel.cols());
    joined << train.returns, test.returns;
    CHECK(same_matrix(joined, panel.returns));
    for (const auto& date : train.dates) {
      CHECK(std::find(test.dates.begin(), test.dates.end(), date) ==
            test.dates.end());
    }
  }

  SUBCASE("boundary before the first date is an empty split") {
    CHECK(thrown_code([&] {
            split_by_date(panel, panel.dates.front() - std::chrono::days{5});
          }) == ErrorCode::EmptySplit);
    CHECK(thrown_code([&] {
            split_by_date(panel, panel.dates.back() + std::chrono::days{5});
          }) == ErrorCode::EmptySplit);
  }

  SUBCASE("calendar boundary 2020-01-01 splits a 2010-2024 panel") {
    ReturnPanel wide;
    wide.tickers = {"A"};
    wide.returns.resize(15, 1);
    for (int y = 0; y < 15; ++y) {
      wide.dates.push_back(parse_date(std::to_string(2010 + y) + "-06-01"));
      wide.returns(y, 0) = 0.001 * y;
    }
    const auto [train, test] = split_by_date(wide, parse_date("2020-01-01"));
    CHECK(train.rows() == 10);  // 2010..2019
    CHECK(test.rows() == 5);    // 2020..2024
    CHECK(train.dates.back() < parse_date("2020-01-01"));
    CHECK(test.dates.front() >= parse_date("2020-01-01"));
  }
}

TEST_CASE("summary_stats") {
  ReturnPanel panel;
  panel.tickers = {"A"};

  SUBCASE("constant column has zero std") {
    panel.returns = Matrix::Constant(5, 1, 0.01);
    panel.dates = testutil::random_panel(5, 1, 1).dates;
    const SummaryStats stats = summary_stats(panel);
    CHECK(stats.mean(0) == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(stats.stddev(0) == 0.0);
  }

  SUBCASE("two-point column") {
    const double x = 0.015;
    panel.returns.resize(2, 1);
    panel.returns << -x, x;
    panel.dates = testutil::random_panel(2, 1, 1).dates;
    const SummaryStats stats = summary_stats(panel);
    CHECK(stats.mean(0) == doctest::Approx(0.0).epsilon(1e-18));
    CHECK(stats.stddev(0) == doctest::Approx(x * std::sqrt(2.0)).epsilon(1e-14));
  }

  SUBCASE("three-point sample std") {
    panel.returns.resize(3, 1);
    panel.returns << 0.01, 0.02, 0.03;
    panel.dates = testutil::random_panel(3, 1, 1).dates;
    const SummaryStats stats = summary_stats(panel);
    CHECK(stats.mean(0) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(stats.stddev(0) == doctest::Approx(0.01).epsilon(1e-14));
  }

  SUBCASE("single row is too short") {
    panel.returns = Matrix::Constant(1, 1, 0.01);
    panel.dates = testutil::random_panel(1, 1, 1).dates;
    CHECK(thrown_code([&] { summary_stats(panel); }) == ErrorCode::TooShort);
  }

  SUBCASE("permutation equivariance in ticker order") {
    ReturnPanel p3 = testutil::random_panel(60, 3, 21);
    const SummaryStats base = summary_stats(p3);
    ReturnPanel permuted = p3;
    const std::vector<int> perm = {2, 0, 1};
    for (int i = 0; i < 3; ++i) {
      permuted.tickers[i] = p3.tickers[perm[i]];
      permuted.returns.col(i) = p3.returns.col(perm[i]);
    }
    const SummaryStats shuffled = summary_stats(permuted);
    for (int i = 0; i < 3; ++i) {
      CHECK(shuffled.mean(i) == base.mean(perm[i]));
      CHECK(shuffled.stddev(i) == base.stddev(perm[i]));
    }
  }
}

TEST_CASE("returns CSV cache round-trips bit-exactly") {
  TempDir tmp("cache");
  const ReturnPanel panel = testutil::random_panel(25, 4, 99);
  save_returns(panel, tmp.file("r.csv"));
  const ReturnPanel loaded = load_returns(tmp.file("r.csv"));
  CHECK(loaded.tickers == panel.tickers);
  CHECK(loaded.dates == panel.dates);
  CHECK(same_matrix(loaded.returns, panel.returns));
}
