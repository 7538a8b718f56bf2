#include "nalloc/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "nalloc/error.hpp"
#include "nalloc/log.hpp"
#include "nalloc/parallel.hpp"

namespace nalloc {

namespace {

constexpr double kAdamEps = 1e-8;
constexpr int kGradChunks = 16;  // fixed reduction grid, independent of threads

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Forward pass keeping the full activation trace, then backpropagation
/// through time. Inputs are assumed normalized already. Returns the window
/// loss (1/N)||y - target||^2 and accumulates gradients into `grads`.
double window_backward(const LstmParams& p, int hidden_dim,
                       const Window& window, LstmParams& grads) {
  const Eigen::Index steps = window.inputs.rows();
  const Eigen::Index n = window.inputs.cols();
  const int d = hidden_dim;

  Matrix H = Matrix::Zero(d, steps + 1);  // H.col(t) = h_{t}, col 0 is h_0 = 0
  Matrix C = Matrix::Zero(d, steps + 1);
  Matrix I(d, steps), F(d, steps), O(d, steps), G(d, steps), TC(d, steps);

  for (Eigen::Index t = 0; t < steps; ++t) {
    const Vector x = window.inputs.row(t).transpose();
    const Vector h_prev = H.col(t);
    I.col(t) = (1.0 + (-(p.Wi * x + p.Ui * h_prev + p.bi).array()).exp()).inverse();
    F.col(t) = (1.0 + (-(p.Wf * x + p.Uf * h_prev + p.bf).array()).exp()).inverse();
    O.col(t) = (1.0 + (-(p.Wo * x + p.Uo * h_prev + p.bo).array()).exp()).inverse();
    G.col(t) = (p.Wg * x + p.Ug * h_prev + p.bg).array().tanh();
    C.col(t + 1) = F.col(t).cwiseProduct(C.col(t)) + I.col(t).cwiseProduct(G.col(t));
    TC.col(t) = C.col(t + 1).array().tanh();
    H.col(t + 1) = O.col(t).cwiseProduct(TC.col(t));
  }

  const Vector y = p.Wmu * H.col(steps) + p.bmu;
  const Vector err = y - window.target;
  const double loss = err.squaredNorm() / double(n);

  const Vector dy = (2.0 / double(n)) * err;
  grads.Wmu += dy * H.col(steps).transpose();
  grads.bmu += dy;

  Vector dh = p.Wmu.transpose() * dy;
  Vector dc = Vector::Zero(d);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto i = I.col(t), f = F.col(t), o = O.col(t), g = G.col(t),
               tc = TC.col(t);
    const Vector dao =
        dh.cwiseProduct(tc).cwiseProduct(o).cwiseProduct((1.0 - o.array()).matrix());
    dc += dh.cwiseProduct(o).cwiseProduct((1.0 - tc.array().square()).matrix());
    const Vector dai = dc.cwiseProduct(g).cwiseProduct(i).cwiseProduct(
        (1.0 - i.array()).matrix());
    const Vector daf = dc.cwiseProduct(C.col(t)).cwiseProduct(f).cwiseProduct(
        (1.0 - f.array()).matrix());
    const Vector dag =
        dc.cwiseProduct(i).cwiseProduct((1.0 - g.array().square()).matrix());

    const auto x_row = window.inputs.row(t);
    const auto h_prev = H.col(t).transpose();
    grads.Wi += dai * x_row;
    grads.Wf += daf * x_row;
    grads.Wo += dao * x_row;
    grads.Wg += dag * x_row;
    grads.Ui += dai * h_prev;
    grads.Uf += daf * h_prev;
    grads.Uo += dao * h_prev;
    grads.Ug += dag * h_prev;
    grads.bi += dai;
    grads.bf += daf;
    grads.bo += dao;
    grads.bg += dag;

    dh = p.Ui.transpose() * dai + p.Uf.transpose() * daf +
         p.Uo.transpose() * dao + p.Ug.transpose() * dag;
    dc = dc.cwiseProduct(f);
  }
  return loss;
}

}  // namespace

LstmModel init_model(int input_dim, const TrainConfig& config) {
  if (input_dim < 1) {
    throw Error(ErrorCode::DimensionMismatch, "input_dim must be >= 1");
  }
  if (config.hidden_dim < 1) {
    throw Error(ErrorCode::InvalidSpec, "hidden_dim must be >= 1");
  }
  LstmModel model;
  model.input_dim = input_dim;
  model.hidden_dim = config.hidden_dim;
  model.params = LstmParams::zeros(input_dim, config.hidden_dim);

  std::mt19937_64 rng(splitmix64(config.seed));
  const double bound = 1.0 / std::sqrt(double(config.hidden_dim));
  std::uniform_real_distribution<double> uni(-bound, bound);
  auto fill = [&](Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = uni(rng);
  };
  fill(model.params.Wi);
  fill(model.params.Wf);
  fill(model.params.Wo);
  fill(model.params.Wg);
  fill(model.params.Ui);
  fill(model.params.Uf);
  fill(model.params.Uo);
  fill(model.params.Ug);
  fill(model.params.Wmu);
  model.params.bf.setOnes();  // standard remedy for vanishing gradients

  model.norm_mean = Vector::Zero(input_dim);
  model.norm_std = Vector::Ones(input_dim);
  return model;
}

double mse_loss(const std::vector<Vector>& predictions,
                const std::vector<Vector>& targets) {
  if (predictions.size() != targets.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(predictions.size()) + " predictions vs " +
                    std::to_string(targets.size()) + " targets");
  }
  if (predictions.empty()) {
    throw Error(ErrorCode::LengthMismatch, "empty sample set");
  }
  double total = 0.0;
  for (size_t k = 0; k < predictions.size(); ++k) {
    if (predictions[k].size() != targets[k].size()) {
      throw Error(ErrorCode::LengthMismatch,
                  "sample " + std::to_string(k) + " width mismatch");
    }
    total += (predictions[k] - targets[k]).squaredNorm() /
             double(targets[k].size());
  }
  return total / double(predictions.size());
}

double batch_gradients(const LstmModel& model,
                       const std::vector<Window>& windows,
                       const std::vector<int>& batch, LstmParams& grads,
                       int threads) {
  if (batch.empty()) {
    throw Error(ErrorCode::EmptyDataset, "empty batch");
  }
  const int m = static_cast<int>(batch.size());
  const int chunks = std::min(kGradChunks, m);

  std::vector<LstmParams> partial(
      chunks, LstmParams::zeros(model.input_dim, model.hidden_dim));
  std::vector<double> partial_loss(chunks, 0.0);

  parallel_for(chunks, threads, [&](std::int64_t c) {
    const int begin = static_cast<int>(c) * m / chunks;
    const int end = static_cast<int>(c + 1) * m / chunks;
    for (int k = begin; k < end; ++k) {
      partial_loss[c] += window_backward(model.params, model.hidden_dim,
                                         windows[batch[k]], partial[c]);
    }
  });

  grads = LstmParams::zeros(model.input_dim, model.hidden_dim);
  auto acc = grads.tensors();
  double loss = 0.0;
  for (int c = 0; c < chunks; ++c) {
    loss += partial_loss[c];
    auto part = partial[c].tensors();
    for (int i = 0; i < LstmParams::kTensorCount; ++i) *acc[i] += *part[i];
  }
  const double inv = 1.0 / double(m);
  for (auto* g : acc) *g *= inv;
  return loss * inv;
}

TrainResult train(const std::vector<Window>& windows,
                  const TrainConfig& config) {
  if (windows.empty()) {
    throw Error(ErrorCode::EmptyDataset, "no training windows");
  }
  if (config.learning_rate <= 0.0) {
    throw Error(ErrorCode::InvalidSpec, "learning_rate must be > 0");
  }
  if (config.epochs < 0) {
    throw Error(ErrorCode::InvalidSpec, "epochs must be >= 0");
  }
  if (config.batch_size < 1) {
    throw Error(ErrorCode::InvalidSpec, "batch_size must be >= 1");
  }
  const Eigen::Index n = windows.front().inputs.cols();
  const Eigen::Index len = windows.front().inputs.rows();
  for (const auto& w : windows) {
    if (w.inputs.cols() != n || w.inputs.rows() != len || w.target.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "inconsistent window shapes");
    }
  }

  LstmModel model = init_model(static_cast<int>(n), config);

  // Per-asset z-score stats over the window targets (each panel row past the
  // first L appears exactly once as a target).
  const double m_count = double(windows.size());
  Vector mean = Vector::Zero(n);
  for (const auto& w : windows) mean += w.target;
  mean /= m_count;
  Vector var = Vector::Zero(n);
  for (const auto& w : windows) var += (w.target - mean).cwiseAbs2();
  var /= std::max(1.0, m_count - 1.0);
  Vector std = var.cwiseSqrt();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std(i) < 1e-12) std(i) = 1.0;  // constant column, leave unscaled
  }
  model.norm_mean = mean;
  model.norm_std = std;

  std::vector<Window> normalized(windows.size());
  for (size_t k = 0; k < windows.size(); ++k) {
    normalized[k].inputs =
        (windows[k].inputs.rowwise() - mean.transpose()).array().rowwise() /
        std.transpose().array();
    normalized[k].target = (windows[k].target - mean).cwiseQuotient(std);
    normalized[k].target_date = windows[k].target_date;
  }

  LstmParams m_state = LstmParams::zeros(model.input_dim, model.hidden_dim);
  LstmParams v_state = LstmParams::zeros(model.input_dim, model.hidden_dim);
  LstmParams grads = LstmParams::zeros(model.input_dim, model.hidden_dim);
  long step = 0;

  std::mt19937_64 shuffle_rng(splitmix64(config.seed ^ 0x5DEECE66DULL));
  std::vector<int> order(windows.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.epoch_losses.reserve(static_cast<size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (size_t pos = 0; pos < order.size(); pos += config.batch_size) {
      const size_t end = std::min(order.size(), pos + config.batch_size);
      const std::vector<int> batch(order.begin() + pos, order.begin() + end);
      const double loss =
          batch_gradients(model, normalized, batch, grads, config.threads);
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::DivergedLoss,
                    "non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      epoch_loss += loss * double(batch.size());

      if (config.grad_clip_norm > 0.0) {
        double sq = 0.0;
        for (const auto* g : grads.tensors()) sq += g->squaredNorm();
        const double norm = std::sqrt(sq);
        if (norm > config.grad_clip_norm) {
          const double scale = config.grad_clip_norm / norm;
          for (auto* g : grads.tensors()) *g *= scale;
        }
      }

      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, double(step));
      const double bc2 = 1.0 - std::pow(config.beta2, double(step));
      auto theta = model.params.tensors();
      auto mt = m_state.tensors();
      auto vt = v_state.tensors();
      auto gt = grads.tensors();
      for (int i = 0; i < LstmParams::kTensorCount; ++i) {
        *mt[i] = config.beta1 * *mt[i] + (1.0 - config.beta1) * *gt[i];
        *vt[i] = config.beta2 * *vt[i] + (1.0 - config.beta2) * gt[i]->cwiseAbs2();
        *theta[i] -= (config.learning_rate * (mt[i]->array() / bc1) /
                      ((vt[i]->array() / bc2).sqrt() + kAdamEps))
                         .matrix();
      }
    }
    epoch_loss /= double(windows.size());
    result.epoch_losses.push_back(epoch_loss);
    log_debug("epoch " + std::to_string(epoch + 1) + " mean loss " +
              std::to_string(epoch_loss));
  }

  result.model = std::move(model);
  return result;
}

PredictionMetrics prediction_metrics(const std::vector<Forecast>& forecasts,
                                     const ReturnPanel& actuals) {
  if (static_cast<Eigen::Index>(forecasts.size()) != actuals.rows()) {
    throw Error(ErrorCode::AlignmentError,
                std::to_string(forecasts.size()) + " forecasts vs " +
                    std::to_string(actuals.rows()) + " actual rows");
  }
  if (forecasts.empty()) {
    throw Error(ErrorCode::AlignmentError, "no forecasts");
  }
  const Eigen::Index n = actuals.cols();
  double sq = 0.0, abs = 0.0;
  long hits = 0;
  for (size_t k = 0; k < forecasts.size(); ++k) {
    if (forecasts[k].date != actuals.dates[k]) {
      throw Error(ErrorCode::AlignmentError,
                  "forecast date " + format_date(forecasts[k].date) +
                      " != panel date " + format_date(actuals.dates[k]));
    }
    if (forecasts[k].mu_hat.size() != n) {
      throw Error(ErrorCode::AlignmentError, "forecast width mismatch");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = forecasts[k].mu_hat(i) - actuals.returns(k, i);
      sq += e * e;
      abs += std::abs(e);
      const bool up_pred = forecasts[k].mu_hat(i) >= 0.0;  // sign(0) = +1
      const bool up_real = actuals.returns(k, i) >= 0.0;
      if (up_pred == up_real) ++hits;
    }
  }
  const double count = double(forecasts.size()) * double(n);
  PredictionMetrics m;
  m.rmse = std::sqrt(sq / count);
  m.mae = abs / count;
  m.directional_accuracy = double(hits) / count;
  return m;
}

}  // namespace nalloc
