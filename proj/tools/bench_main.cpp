// Serial vs OpenMP benchmark for the engine's data-parallel kernels. Every
// kernel reduces over a fixed grid, so the parallel result must match the
// serial reference bitwise; the last column checks that.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <vector>

#include "nalloc/backtest.hpp"
#include "nalloc/parallel.hpp"
#include "nalloc/risk.hpp"
#include "nalloc/synth.hpp"
#include "nalloc/train.hpp"

using namespace nalloc;

namespace {

double time_best_of(int repeats, const std::function<void()>& body) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    body();
    best = std::min(best, std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count());
  }
  return best;
}

void print_row(const char* name, double serial_s, double parallel_s,
               bool bitwise) {
  std::printf("%-18s %10.1f %10.1f %8.2fx %10s\n", name, serial_s * 1e3,
              parallel_s * 1e3, serial_s / parallel_s,
              bitwise ? "bitwise" : "DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nalloc-bench: serial vs OpenMP kernel comparison"};
  int threads = 0;
  int assets = 10;
  int days = 1200;
  int window = 30;
  int hidden = 64;
  int batch = 256;
  int repeats = 3;
  app.add_option("--threads", threads, "parallel thread count (0 = OpenMP default)");
  app.add_option("--assets", assets, "panel width");
  app.add_option("--days", days, "panel length");
  app.add_option("--window", window, "forecast window L");
  app.add_option("--hidden-dim", hidden, "LSTM hidden width");
  app.add_option("--batch", batch, "gradient batch size");
  app.add_option("--repeats", repeats, "best-of repeats per kernel");
  CLI11_PARSE(app, argc, argv);

  std::printf("workload: %d assets x %d days, L=%d, d=%d, batch=%d, "
              "parallel threads=%d\n\n",
              assets, days, window, hidden, batch, resolve_threads(threads));
  std::printf("%-18s %10s %10s %9s %10s\n", "kernel", "serial ms",
              "parallel ms", "speedup", "result");

  SynthSpec spec;
  spec.n_assets = assets;
  spec.n_days = days;
  spec.seed = 99;
  spec.garch_omega = 5e-5;
  spec.garch_alpha = 0.05;
  spec.garch_beta = 0.9;
  spec.cross_corr = 0.3;
  spec.ar_coeff = 0.1;
  const ReturnPanel panel = generate_panel(spec);

  TrainConfig cfg;
  cfg.hidden_dim = hidden;
  cfg.seed = 7;
  const LstmModel model = init_model(assets, cfg);
  const auto windows = make_windows(panel, window);

  // ---- mini-batch BPTT gradients -----------------------------------------
  {
    std::vector<int> idx(std::min<size_t>(batch, windows.size()));
    std::iota(idx.begin(), idx.end(), 0);
    LstmParams g1 = LstmParams::zeros(assets, hidden);
    LstmParams gn = LstmParams::zeros(assets, hidden);
    const double serial = time_best_of(
        repeats, [&] { batch_gradients(model, windows, idx, g1, 1); });
    const double parallel = time_best_of(
        repeats, [&] { batch_gradients(model, windows, idx, gn, threads); });
    bool same = true;
    auto a = g1.tensors();
    auto b = gn.tensors();
    for (int k = 0; k < LstmParams::kTensorCount; ++k) {
      if (!((a[k]->array() == b[k]->array()).all())) same = false;
    }
    print_row("batch_gradients", serial, parallel, same);
  }

  // ---- forecast pass over all scorable dates -----------------------------
  {
    const Eigen::Index first = window;
    const Eigen::Index count = panel.rows() - first;
    std::vector<Vector> out1(count), outn(count);
    auto pass = [&](std::vector<Vector>& out, int t) {
      parallel_for(count, t, [&](std::int64_t k) {
        Window w;
        w.inputs = panel.returns.middleRows(first + k - window, window);
        w.target = Vector::Zero(assets);
        w.target_date = panel.dates[static_cast<size_t>(first + k)];
        out[static_cast<size_t>(k)] = predict(model, w).mu_hat;
      });
    };
    const double serial = time_best_of(repeats, [&] { pass(out1, 1); });
    const double parallel = time_best_of(repeats, [&] { pass(outn, threads); });
    bool same = true;
    for (Eigen::Index k = 0; k < count; ++k) {
      if (!((out1[k].array() == outn[k].array()).all())) same = false;
    }
    print_row("forecast_pass", serial, parallel, same);
  }

  // ---- rolling volatility series ------------------------------------------
  {
    const Eigen::Index first = window;
    const Eigen::Index count = panel.rows() - first;
    Matrix out1(count, assets), outn(count, assets);
    auto pass = [&](Matrix& out, int t) {
      parallel_for(count, t, [&](std::int64_t k) {
        out.row(k) = rolling_volatility(panel, first + k, window).transpose();
      });
    };
    const double serial = time_best_of(repeats, [&] { pass(out1, 1); });
    const double parallel = time_best_of(repeats, [&] { pass(outn, threads); });
    print_row("rolling_vol_pass", serial, parallel,
              (out1.array() == outn.array()).all());
  }

  // ---- full neural backtest (forecast + risk + allocate) ------------------
  {
    BacktestConfig config;
    config.window = window;
    config.cov_window = std::min(window, 20);
    config.strategies = {"neural"};
    config.test_start = panel.dates[static_cast<size_t>(
        std::max<Eigen::Index>(window + config.cov_window, days / 3))];

    PipelineResult r1, rn;
    config.threads = 1;
    const double serial =
        time_best_of(repeats, [&] { r1 = run_pipeline(model, panel, config); });
    config.threads = threads;
    const double parallel =
        time_best_of(repeats, [&] { rn = run_pipeline(model, panel, config); });
    const bool same = (r1.weights[0].weights.array() ==
                       rn.weights[0].weights.array())
                          .all();
    print_row("neural_backtest", serial, parallel, same);
  }

  return 0;
}
