#pragma once

#include <cstdint>
#include <vector>

#include "nalloc/lstm.hpp"

namespace nalloc {

struct TrainConfig {
  int epochs = 50;
  double learning_rate = 1e-3;
  int batch_size = 64;
  int hidden_dim = 64;
  std::uint64_t seed = 0;
  double grad_clip_norm = 1.0;  // 0 disables clipping
  double beta1 = 0.9;           // first-moment decay
  double beta2 = 0.999;         // second-moment decay
  int threads = 0;              // 0 = OpenMP default, 1 = serial
};

/// Seeded initialization: gate and head weights uniform in +-1/sqrt(d),
/// forget-gate bias +1, other biases 0, normalization stats identity.
LstmModel init_model(int input_dim, const TrainConfig& config);

/// Mean over samples of (1/N) * ||target - prediction||^2, both in
/// normalized space.
double mse_loss(const std::vector<Vector>& predictions,
                const std::vector<Vector>& targets);

/// Mean loss and mean BPTT gradients over windows[batch]. Windows must
/// already be in normalized space. Gradient sums are reduced over a fixed
/// chunk grid, so the result is identical for any thread count.
double batch_gradients(const LstmModel& model,
                       const std::vector<Window>& windows,
                       const std::vector<int>& batch, LstmParams& grads,
                       int threads);

struct TrainResult {
  LstmModel model;
  std::vector<double> epoch_losses;  // mean per-window loss per epoch
};

/// Mini-batch gradient descent with first/second-moment scaling and global
/// gradient-norm clipping; gradients by backpropagation through time over
/// the full window. Deterministic for a fixed (windows, config) pair.
TrainResult train(const std::vector<Window>& windows,
                  const TrainConfig& config);

struct PredictionMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  double directional_accuracy = 0.0;
};

/// Pooled over all (date, asset) pairs, in raw return units. sign(0) counts
/// as positive on both sides.
PredictionMetrics prediction_metrics(const std::vector<Forecast>& forecasts,
                                     const ReturnPanel& actuals);

}  // namespace nalloc
