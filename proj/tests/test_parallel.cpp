#include <doctest.h>

#include <atomic>
#include <numeric>

#include "nalloc/backtest.hpp"
#include "nalloc/parallel.hpp"
#include "nalloc/synth.hpp"
#include "nalloc/train.hpp"
#include "test_util.hpp"

using namespace nalloc;

TEST_CASE("parallel_for covers every index exactly once") {
  for (int threads : {0, 1, 2, 5}) {
    std::vector<std::atomic<int>> hits(257);
    for (auto& h : hits) h = 0;
    parallel_for(257, threads, [&](std::int64_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h == 1);
  }
  parallel_for(0, 4, [&](std::int64_t) { FAIL("empty range must not run"); });
}

TEST_CASE("batch gradients are bitwise identical across thread counts") {
  SynthSpec spec;
  spec.n_assets = 4;
  spec.n_days = 200;
  spec.seed = 3;
  spec.ar_coeff = 0.1;
  const ReturnPanel panel = generate_panel(spec);
  const auto windows = make_windows(panel, 12);

  TrainConfig cfg;
  cfg.hidden_dim = 10;
  cfg.seed = 9;
  const LstmModel model = init_model(4, cfg);
  std::vector<int> batch(windows.size());
  std::iota(batch.begin(), batch.end(), 0);

  LstmParams serial = LstmParams::zeros(4, 10);
  const double loss1 = batch_gradients(model, windows, batch, serial, 1);
  for (int threads : {2, 3, 8}) {
    LstmParams parallel = LstmParams::zeros(4, 10);
    const double loss_n = batch_gradients(model, windows, batch, parallel, threads);
    CHECK(loss_n == loss1);
    auto a = serial.tensors();
    auto b = parallel.tensors();
    for (int k = 0; k < LstmParams::kTensorCount; ++k) {
      CHECK(testutil::same_matrix(*a[k], *b[k]));
    }
  }
}

TEST_CASE("chunked gradient reduction matches a straight sum") {
  // the fixed-chunk reduction must agree with a naive single-accumulator
  // sum to floating-point reassociation error
  SynthSpec spec;
  spec.n_assets = 2;
  spec.n_days = 80;
  spec.seed = 21;
  const ReturnPanel panel = generate_panel(spec);
  const auto windows = make_windows(panel, 6);

  TrainConfig cfg;
  cfg.hidden_dim = 5;
  cfg.seed = 2;
  const LstmModel model = init_model(2, cfg);

  LstmParams chunked = LstmParams::zeros(2, 5);
  std::vector<int> all(windows.size());
  std::iota(all.begin(), all.end(), 0);
  batch_gradients(model, windows, all, chunked, 1);

  LstmParams naive = LstmParams::zeros(2, 5);
  for (int k : all) {
    LstmParams one = LstmParams::zeros(2, 5);
    batch_gradients(model, windows, {k}, one, 1);
    auto acc = naive.tensors();
    auto part = one.tensors();
    for (int i = 0; i < LstmParams::kTensorCount; ++i) *acc[i] += *part[i];
  }
  auto acc = naive.tensors();
  for (auto* g : acc) *g /= double(windows.size());

  auto a = chunked.tensors();
  for (int k = 0; k < LstmParams::kTensorCount; ++k) {
    const double scale = std::max(1e-12, acc[k]->cwiseAbs().maxCoeff());
    CHECK((*a[k] - *acc[k]).cwiseAbs().maxCoeff() / scale < 1e-12);
  }
}

TEST_CASE("training result does not depend on the thread count") {
  SynthSpec spec;
  spec.n_assets = 3;
  spec.n_days = 150;
  spec.seed = 5;
  const ReturnPanel panel = generate_panel(spec);
  const auto windows = make_windows(panel, 8);

  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.hidden_dim = 6;
  cfg.batch_size = 16;
  cfg.seed = 31;

  cfg.threads = 1;
  const TrainResult serial = train(windows, cfg);
  cfg.threads = 4;
  const TrainResult parallel = train(windows, cfg);

  auto a = serial.model.params.tensors();
  auto b = parallel.model.params.tensors();
  for (int k = 0; k < LstmParams::kTensorCount; ++k) {
    CHECK(testutil::same_matrix(*a[k], *b[k]));
  }
  CHECK(serial.epoch_losses == parallel.epoch_losses);
}

TEST_CASE("backtest weights do not depend on the thread count") {
  SynthSpec spec;
  spec.n_assets = 3;
  spec.n_days = 220;
  spec.seed = 8;
  spec.garch_alpha = 0.05;
  spec.garch_beta = 0.9;
  spec.garch_omega = 5e-5;
  const ReturnPanel panel = generate_panel(spec);

  TrainConfig tc;
  tc.epochs = 1;
  tc.hidden_dim = 4;
  tc.seed = 3;
  tc.threads = 1;
  ReturnPanel head = panel;
  head.returns = panel.returns.topRows(100);
  head.dates.assign(panel.dates.begin(), panel.dates.begin() + 100);
  const LstmModel model = train(make_windows(head, 10), tc).model;

  BacktestConfig config;
  config.window = 10;
  config.cov_window = 8;
  config.hist_lookback = 50;
  config.test_start = panel.dates[100];

  config.threads = 1;
  const PipelineResult serial = run_pipeline(model, panel, config);
  config.threads = 6;
  const PipelineResult parallel = run_pipeline(model, panel, config);

  REQUIRE(serial.weights.size() == parallel.weights.size());
  for (size_t s = 0; s < serial.weights.size(); ++s) {
    CHECK(testutil::same_matrix(serial.weights[s].weights,
                                parallel.weights[s].weights));
  }
  REQUIRE(serial.risks.size() == parallel.risks.size());
  for (size_t k = 0; k < serial.risks.size(); ++k) {
    CHECK(testutil::same_matrix(serial.risks[k].cov, parallel.risks[k].cov));
  }
}
