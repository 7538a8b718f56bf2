#include "nalloc/lstm.hpp"

#include <cmath>

#include "nalloc/error.hpp"

namespace nalloc {

LstmParams LstmParams::zeros(int input_dim, int hidden_dim) {
  LstmParams p;
  p.Wi = p.Wf = p.Wo = p.Wg = Matrix::Zero(hidden_dim, input_dim);
  p.Ui = p.Uf = p.Uo = p.Ug = Matrix::Zero(hidden_dim, hidden_dim);
  p.bi = p.bf = p.bo = p.bg = Matrix::Zero(hidden_dim, 1);
  p.Wmu = Matrix::Zero(input_dim, hidden_dim);
  p.bmu = Matrix::Zero(input_dim, 1);
  return p;
}

const char* LstmParams::tensor_name(int index) {
  static const char* names[kTensorCount] = {"Wi", "Wf", "Wo", "Wg", "Ui",
                                            "Uf", "Uo", "Ug", "bi", "bf",
                                            "bo", "bg", "Wmu", "bmu"};
  return names[index];
}

std::vector<Window> make_windows(const ReturnPanel& panel, int window_len) {
  if (window_len < 1) {
    throw Error(ErrorCode::InvalidSpec, "window length must be >= 1");
  }
  const Eigen::Index t_rows = panel.rows();
  if (t_rows < window_len + 1) {
    throw Error(ErrorCode::TooShort,
                "panel has " + std::to_string(t_rows) + " rows, need at least " +
                    std::to_string(window_len + 1));
  }
  std::vector<Window> windows;
  windows.reserve(static_cast<size_t>(t_rows - window_len));
  for (Eigen::Index k = 0; k + window_len < t_rows; ++k) {
    Window w;
    w.inputs = panel.returns.middleRows(k, window_len);
    w.target = panel.returns.row(k + window_len).transpose();
    w.target_date = panel.dates[static_cast<size_t>(k + window_len)];
    windows.push_back(std::move(w));
  }
  return windows;
}

namespace detail {

inline Vector sigmoid(const Vector& x) {
  return ((-x.array()).exp() + 1.0).inverse().matrix();
}

void check_window_dims(const LstmModel& model, const Window& window) {
  if (window.inputs.cols() != model.input_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "window width " + std::to_string(window.inputs.cols()) +
                    " != model input_dim " + std::to_string(model.input_dim));
  }
}

}  // namespace detail

Vector lstm_forward(const LstmModel& model, const Window& window) {
  detail::check_window_dims(model, window);
  const auto& p = model.params;
  const Eigen::Index steps = window.inputs.rows();
  Vector h = Vector::Zero(model.hidden_dim);
  Vector c = Vector::Zero(model.hidden_dim);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const Vector x = (window.inputs.row(t).transpose() - model.norm_mean)
                         .cwiseQuotient(model.norm_std);
    const Vector i = detail::sigmoid(p.Wi * x + p.Ui * h + p.bi);
    const Vector f = detail::sigmoid(p.Wf * x + p.Uf * h + p.bf);
    const Vector o = detail::sigmoid(p.Wo * x + p.Uo * h + p.bo);
    const Vector g = (p.Wg * x + p.Ug * h + p.bg).array().tanh();
    c = f.cwiseProduct(c) + i.cwiseProduct(g);
    h = o.cwiseProduct(c.array().tanh().matrix());
  }
  return h;
}

Vector predict_normalized(const LstmModel& model, const Window& window) {
  const Vector h = lstm_forward(model, window);
  return model.params.Wmu * h + model.params.bmu;
}

Forecast predict(const LstmModel& model, const Window& window) {
  const Vector y = predict_normalized(model, window);
  return Forecast{window.target_date,
                  y.cwiseProduct(model.norm_std) + model.norm_mean};
}

}  // namespace nalloc
