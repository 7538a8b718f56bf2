#pragma once

#include <array>
#include <vector>

#include "nalloc/market_data.hpp"

namespace nalloc {

/// All learnable tensors of the single-layer LSTM plus linear head.
/// W_* are input weights (d x N), U_* recurrent weights (d x d), b_* gate
/// biases (d x 1). Wmu/bmu project the final hidden state to per-asset
/// return forecasts (N x d, N x 1).
struct LstmParams {
  Matrix Wi, Wf, Wo, Wg;
  Matrix Ui, Uf, Uo, Ug;
  Matrix bi, bf, bo, bg;
  Matrix Wmu, bmu;

  static constexpr int kTensorCount = 14;

  static LstmParams zeros(int input_dim, int hidden_dim);

  /// Tensors in a fixed order. The order defines the layout of checkpoints
  /// and the reduction order of optimizer updates.
  std::array<Matrix*, kTensorCount> tensors() {
    return {&Wi, &Wf, &Wo, &Wg, &Ui, &Uf, &Uo, &Ug,
            &bi, &bf, &bo, &bg, &Wmu, &bmu};
  }
  std::array<const Matrix*, kTensorCount> tensors() const {
    return {&Wi, &Wf, &Wo, &Wg, &Ui, &Uf, &Uo, &Ug,
            &bi, &bf, &bo, &bg, &Wmu, &bmu};
  }

  static const char* tensor_name(int index);
};

struct LstmModel {
  int input_dim = 0;
  int hidden_dim = 0;
  LstmParams params;
  Vector norm_mean;  // per-asset z-score stats from the training split
  Vector norm_std;   // strictly positive
};

/// One training/prediction sample: L contiguous lagged return rows and the
/// return vector of the immediately following day.
struct Window {
  Matrix inputs;  // L x N, rows strictly precede target_date
  Vector target;  // N
  Date target_date;
};

/// One-step-ahead forecast in raw return units.
struct Forecast {
  Date date;
  Vector mu_hat;
};

/// Exactly T - L windows; window k has input rows k..k+L-1 and target row
/// k+L of the panel.
std::vector<Window> make_windows(const ReturnPanel& panel, int window_len);

/// Final hidden state of the LSTM recurrence over the normalized window
/// rows, h_0 = c_0 = 0, logistic gates, tanh cell/output squash.
Vector lstm_forward(const LstmModel& model, const Window& window);

/// Head output Wmu * h + bmu in normalized space.
Vector predict_normalized(const LstmModel& model, const Window& window);

/// De-normalized forecast: per asset, normalized output * std + mean.
Forecast predict(const LstmModel& model, const Window& window);

}  // namespace nalloc
