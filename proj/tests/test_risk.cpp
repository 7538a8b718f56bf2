#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "nalloc/error.hpp"
#include "nalloc/risk.hpp"
#include "test_util.hpp"

using namespace nalloc;

namespace {

/// Direct two-pass evaluation, population divisor.
Vector two_pass_vol(const ReturnPanel& panel, Eigen::Index t, int window) {
  const Eigen::Index n = panel.cols();
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double mean = 0.0;
    for (Eigen::Index k = t - window; k < t; ++k) mean += panel.returns(k, i);
    mean /= double(window);
    double acc = 0.0;
    for (Eigen::Index k = t - window; k < t; ++k) {
      const double d = panel.returns(k, i) - mean;
      acc += d * d;
    }
    out(i) = std::sqrt(acc / double(window));
  }
  return out;
}

/// Textbook sample covariance of the trailing `window` forecasts.
Matrix textbook_cov(const std::vector<Forecast>& history, int window) {
  const size_t begin = history.size() - static_cast<size_t>(window);
  const Eigen::Index n = history[begin].mu_hat.size();
  Vector mean = Vector::Zero(n);
  for (int k = 0; k < window; ++k) mean += history[begin + k].mu_hat;
  mean /= double(window);
  Matrix cov = Matrix::Zero(n, n);
  for (int k = 0; k < window; ++k) {
    const Vector d = history[begin + k].mu_hat - mean;
    cov += d * d.transpose();
  }
  return cov / double(window - 1);
}

std::vector<Forecast> random_history(int count, int n, std::uint64_t seed,
                                     double scale = 0.01) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<Forecast> history;
  Date d = parse_date("2020-02-03");
  for (int k = 0; k < count; ++k) {
    Vector mu(n);
    for (Eigen::Index i = 0; i < n; ++i) mu(i) = normal(rng);
    history.push_back(Forecast{d, mu});
    d = next_weekday(d);
  }
  return history;
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  return solver.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("rolling_volatility") {
  SUBCASE("constant window has zero volatility") {
    ReturnPanel panel = testutil::random_panel(10, 2, 1);
    panel.returns.setConstant(0.004);
    const Vector sigma = rolling_volatility(panel, 8, 6);
    CHECK(sigma.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("alternating +x/-x window has volatility exactly x") {
    const double x = 0.02;
    ReturnPanel panel = testutil::random_panel(12, 1, 2);
    for (Eigen::Index t = 0; t < 12; ++t) panel.returns(t, 0) = (t % 2 ? x : -x);
    const Vector sigma = rolling_volatility(panel, 10, 8);
    CHECK(sigma(0) == doctest::Approx(x).epsilon(1e-15));
  }

  SUBCASE("random window matches direct two-pass evaluation to 1e-14") {
    const ReturnPanel panel = testutil::random_panel(60, 4, 3);
    for (const Eigen::Index t : {20L, 35L, 60L}) {
      const Vector got = rolling_volatility(panel, t, 20);
      const Vector expected = two_pass_vol(panel, t, 20);
      for (Eigen::Index i = 0; i < 4; ++i) {
        CHECK(got(i) == doctest::Approx(expected(i)).epsilon(1e-14));
      }
    }
  }

  SUBCASE("index bounds") {
    const ReturnPanel panel = testutil::random_panel(30, 2, 4);
    CHECK(testutil::thrown_code([&] { rolling_volatility(panel, 5, 6); }) ==
          ErrorCode::IndexOutOfRange);
    CHECK(testutil::thrown_code([&] { rolling_volatility(panel, 31, 6); }) ==
          ErrorCode::IndexOutOfRange);
  }

  SUBCASE("estimator converges on an i.i.d. window of 10000") {
    const double true_sigma = 0.015;
    const ReturnPanel panel = testutil::random_panel(10000, 1, 5, true_sigma);
    const Vector sigma = rolling_volatility(panel, 10000, 10000);
    CHECK(sigma(0) == doctest::Approx(true_sigma).epsilon(0.05));
  }
}

TEST_CASE("forecast_covariance") {
  SUBCASE("identical forecasts give the zero matrix") {
    auto history = random_history(6, 3, 11);
    for (auto& f : history) f.mu_hat = Vector::Constant(3, 0.007);
    const Matrix cov = forecast_covariance(history, 6);
    CHECK(cov.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("two scalar forecasts") {
    std::vector<Forecast> history = {
        Forecast{parse_date("2020-01-02"), Vector::Constant(1, 0.01)},
        Forecast{parse_date("2020-01-03"), Vector::Constant(1, 0.03)}};
    const Matrix cov = forecast_covariance(history, 2);
    CHECK(cov(0, 0) == doctest::Approx(0.0002).epsilon(1e-14));
  }

  SUBCASE("permuting the history leaves the output unchanged") {
    auto history = random_history(8, 3, 12);
    const Matrix base = forecast_covariance(history, 8);
    std::reverse(history.begin(), history.end());
    const Matrix reversed = forecast_covariance(history, 8);
    CHECK((base - reversed).cwiseAbs().maxCoeff() < 1e-16);
  }

  SUBCASE("matches the textbook oracle to 1e-12") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto history = random_history(20, 4, 100 + seed);
      const Matrix got = forecast_covariance(history, 12);
      const Matrix expected = textbook_cov(history, 12);
      CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((got - got.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SUBCASE("insufficient history") {
    const auto history = random_history(4, 2, 13);
    CHECK(testutil::thrown_code([&] { forecast_covariance(history, 5); }) ==
          ErrorCode::InsufficientHistory);
  }
}

TEST_CASE("condition_covariance") {
  std::mt19937_64 rng(21);

  SUBCASE("full shrinkage kills off-diagonals") {
    const auto history = random_history(8, 4, 22);
    const Matrix cov = forecast_covariance(history, 8);
    Vector sigma(4);
    sigma << 0.01, 0.02, 0.015, 0.03;
    const Matrix out = condition_covariance(cov, sigma, 1.0, 1e-8);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (i == j) {
          CHECK(out(i, j) ==
                doctest::Approx(sigma(i) * sigma(i) + 1e-8).epsilon(1e-12));
        } else {
          CHECK(out(i, j) == 0.0);
        }
      }
    }
  }

  SUBCASE("lambda=0, floor=0 reproduces a consistent input") {
    // cov already a valid correlation scaled by sigma
    Matrix corr(3, 3);
    corr << 1.0, 0.3, -0.2, 0.3, 1.0, 0.5, -0.2, 0.5, 1.0;
    Vector sigma(3);
    sigma << 0.01, 0.02, 0.03;
    const Matrix cov = sigma.asDiagonal() * corr * sigma.asDiagonal();
    const Matrix out = condition_covariance(cov, sigma, 0.0, 0.0);
    CHECK((out - cov).cwiseAbs().maxCoeff() < 1e-12 * cov.cwiseAbs().maxCoeff());
  }

  SUBCASE("random 5x5 is PSD after conditioning") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto history = random_history(4, 5, 300 + trial);  // rank deficient
      const Matrix cov = forecast_covariance(history, 4);
      Vector sigma(5);
      for (int i = 0; i < 5; ++i) sigma(i) = 0.005 + 0.002 * i;
      const Matrix out = condition_covariance(cov, sigma, 0.1, 1e-8);
      CHECK(min_eigenvalue(out) >= 0.0);
      CHECK((out - out.transpose()).cwiseAbs().maxCoeff() < 1e-18);
    }
  }

  SUBCASE("PSD property across shrinkage range on rank-deficient inputs") {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 3 + static_cast<int>(rng() % 8);  // up to 10
      const int window = 2 + static_cast<int>(rng() % std::max(1, n - 2));
      const auto history = random_history(window, n, rng());
      const Matrix cov = forecast_covariance(history, window);
      Vector sigma(n);
      for (int i = 0; i < n; ++i) sigma(i) = 0.001 + 0.03 * uni(rng);
      if (trial % 5 == 0) sigma(trial % n) = 0.0;  // degenerate asset
      const double lambda = std::nextafter(uni(rng), 1.0);
      const double floor = 1e-10 + 1e-8 * uni(rng);
      const Matrix out = condition_covariance(cov, sigma, lambda, floor);
      CHECK(min_eigenvalue(out) >= 0.0);
      // diagonal identity whenever cov diagonal is strictly positive
      for (int i = 0; i < n; ++i) {
        CHECK(out(i, i) ==
              doctest::Approx(sigma(i) * sigma(i) + floor).epsilon(1e-12));
      }
    }
  }

  SUBCASE("zero-volatility asset gets an identity row") {
    const auto history = random_history(10, 3, 77);
    const Matrix cov = forecast_covariance(history, 10);
    Vector sigma(3);
    sigma << 0.01, 0.0, 0.02;
    const Matrix out = condition_covariance(cov, sigma, 0.2, 1e-9);
    CHECK(out(0, 1) == 0.0);
    CHECK(out(1, 2) == 0.0);
    CHECK(out(1, 1) == doctest::Approx(1e-9).epsilon(1e-12));
  }

  SUBCASE("negative diagonal is rejected") {
    Matrix cov = Matrix::Identity(2, 2);
    cov(1, 1) = -1e-6;
    const Vector sigma = Vector::Constant(2, 0.01);
    CHECK(testutil::thrown_code(
              [&] { condition_covariance(cov, sigma, 0.1, 1e-8); }) ==
          ErrorCode::NegativeDiagonal);
  }
}

TEST_CASE("export_risk writes the sigma table and per-date matrices") {
  testutil::TempDir tmp("risk");
  std::vector<RiskEstimate> estimates;
  const auto history = random_history(6, 2, 91);
  for (int k = 0; k < 2; ++k) {
    RiskEstimate est;
    est.date = history[k].date;
    est.sigma = Vector::Constant(2, 0.01 * (k + 1));
    est.cov = Matrix::Identity(2, 2) * 1e-4;
    estimates.push_back(est);
  }
  export_risk(estimates, {"AA", "BB"}, tmp.path().string());
  const std::string sigma_csv = testutil::read_file(tmp.file("sigma.csv"));
  CHECK(sigma_csv.find("date,ticker,sigma") == 0);
  CHECK(sigma_csv.find("2020-02-03,AA,0.01") != std::string::npos);
  CHECK(std::filesystem::exists(tmp.path() / "cov" / "2020-02-03.csv"));
  CHECK(std::filesystem::exists(tmp.path() / "cov" / "2020-02-04.csv"));
}
