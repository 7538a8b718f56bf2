#include "nalloc/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "nalloc/error.hpp"

namespace nalloc {

namespace {

constexpr char kMagic[] = "nalloc-model-v1\n";
constexpr size_t kMagicLen = sizeof(kMagic) - 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

double get_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
}

void get_matrix(std::istream& in, Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get_f64(in);
}

}  // namespace

void save_checkpoint(const Checkpoint& cp, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.write(kMagic, kMagicLen);
  put_u32(out, static_cast<std::uint32_t>(cp.model.input_dim));
  put_u32(out, static_cast<std::uint32_t>(cp.model.hidden_dim));
  put_u32(out, static_cast<std::uint32_t>(cp.tickers.size()));
  for (const auto& t : cp.tickers) {
    put_u32(out, static_cast<std::uint32_t>(t.size()));
    out.write(t.data(), static_cast<std::streamsize>(t.size()));
  }
  for (const auto* m : cp.model.params.tensors()) put_matrix(out, *m);
  for (Eigen::Index i = 0; i < cp.model.norm_mean.size(); ++i)
    put_f64(out, cp.model.norm_mean(i));
  for (Eigen::Index i = 0; i < cp.model.norm_std.size(); ++i)
    put_f64(out, cp.model.norm_std(i));
  put_u32(out, static_cast<std::uint32_t>(cp.config.epochs));
  put_f64(out, cp.config.learning_rate);
  put_u32(out, static_cast<std::uint32_t>(cp.config.batch_size));
  put_u32(out, static_cast<std::uint32_t>(cp.config.hidden_dim));
  put_u64(out, cp.config.seed);
  put_f64(out, cp.config.grad_clip_norm);
  put_f64(out, cp.config.beta1);
  put_f64(out, cp.config.beta2);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path);
  char magic[kMagicLen];
  in.read(magic, kMagicLen);
  if (!in || std::memcmp(magic, kMagic, kMagicLen) != 0) {
    throw Error(ErrorCode::IoError, path + " is not a nalloc-model-v1 file");
  }
  Checkpoint cp;
  cp.model.input_dim = static_cast<int>(get_u32(in));
  cp.model.hidden_dim = static_cast<int>(get_u32(in));
  if (!in || cp.model.input_dim < 1 || cp.model.hidden_dim < 1) {
    throw Error(ErrorCode::IoError, "corrupt dims in " + path);
  }
  const std::uint32_t n_tickers = get_u32(in);
  cp.tickers.resize(n_tickers);
  for (auto& t : cp.tickers) {
    const std::uint32_t len = get_u32(in);
    if (!in || len > 4096) throw Error(ErrorCode::IoError, "corrupt ticker in " + path);
    t.resize(len);
    in.read(t.data(), len);
  }
  cp.model.params = LstmParams::zeros(cp.model.input_dim, cp.model.hidden_dim);
  for (auto* m : cp.model.params.tensors()) get_matrix(in, *m);
  cp.model.norm_mean.resize(cp.model.input_dim);
  cp.model.norm_std.resize(cp.model.input_dim);
  for (Eigen::Index i = 0; i < cp.model.norm_mean.size(); ++i)
    cp.model.norm_mean(i) = get_f64(in);
  for (Eigen::Index i = 0; i < cp.model.norm_std.size(); ++i)
    cp.model.norm_std(i) = get_f64(in);
  cp.config.epochs = static_cast<int>(get_u32(in));
  cp.config.learning_rate = get_f64(in);
  cp.config.batch_size = static_cast<int>(get_u32(in));
  cp.config.hidden_dim = static_cast<int>(get_u32(in));
  cp.config.seed = get_u64(in);
  cp.config.grad_clip_norm = get_f64(in);
  cp.config.beta1 = get_f64(in);
  cp.config.beta2 = get_f64(in);
  if (!in) throw Error(ErrorCode::IoError, "truncated checkpoint " + path);
  return cp;
}

}  // namespace nalloc
