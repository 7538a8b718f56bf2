#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "nalloc/error.hpp"
#include "nalloc/market_data.hpp"

namespace testutil {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    dir_ = std::filesystem::temp_directory_path() /
           ("nalloc_" + tag + "_" + std::to_string(counter_++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  std::filesystem::path path() const { return dir_; }
  std::string file(const std::string& name) const { return (dir_ / name).string(); }

 private:
  std::filesystem::path dir_;
  static inline int counter_ = 0;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

/// Return panel with i.i.d. normal entries and weekday dates.
inline nalloc::ReturnPanel random_panel(int days, int assets,
                                        std::uint64_t seed,
                                        double scale = 0.01) {
  nalloc::ReturnPanel panel;
  for (int i = 0; i < assets; ++i) panel.tickers.push_back("A" + std::to_string(i + 1));
  panel.returns.resize(days, assets);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  nalloc::Date d = nalloc::parse_date("2015-01-05");
  for (int t = 0; t < days; ++t) {
    panel.dates.push_back(d);
    d = nalloc::next_weekday(d);
    for (int i = 0; i < assets; ++i) panel.returns(t, i) = normal(rng);
  }
  return panel;
}

inline bool same_matrix(const nalloc::Matrix& a, const nalloc::Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

/// Runs fn, expecting an Error; returns its code, or IoError + test failure
/// if nothing was thrown.
template <class Fn>
nalloc::ErrorCode thrown_code(Fn&& fn) {
  try {
    fn();
  } catch (const nalloc::Error& e) {
    return e.code();
  }
  return nalloc::ErrorCode::IoError;
}

/// Message of the Error thrown by fn, empty if none was thrown.
template <class Fn>
std::string thrown_message(Fn&& fn) {
  try {
    fn();
  } catch (const nalloc::Error& e) {
    return e.what();
  }
  return {};
}

/// Random symmetric positive-definite matrix A'A + jitter * I.
inline nalloc::Matrix random_spd(int n, std::mt19937_64& rng,
                                 double scale = 1.0, double jitter = 1e-3) {
  std::normal_distribution<double> normal(0.0, scale);
  nalloc::Matrix a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = normal(rng);
  nalloc::Matrix s = a.transpose() * a + jitter * nalloc::Matrix::Identity(n, n);
  return (s + s.transpose()) / 2.0;
}

}  // namespace testutil
