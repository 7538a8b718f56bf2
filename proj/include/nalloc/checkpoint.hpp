#pragma once

#include <string>
#include <vector>

#include "nalloc/train.hpp"

namespace nalloc {

/// Model checkpoint: the trained LSTM, the config that produced it, and the
/// ticker order it was trained on.
struct Checkpoint {
  LstmModel model;
  TrainConfig config;
  std::vector<std::string> tickers;
};

/// Binary `nalloc-model-v1` file: magic tag, dims, ticker list, all parameter
/// tensors row-major (LstmParams::tensors order), normalization stats, then
/// the training config. Little-endian doubles. Writing the same checkpoint
/// twice produces identical bytes.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace nalloc
