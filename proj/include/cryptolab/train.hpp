// Mini-batch training of the LSTM with the Adam update rule.
//
// The run is bitwise deterministic for a given (seed, data, config): window
// order is shuffled with a hand-rolled Fisher-Yates over the seeded
// generator, batches are visited in that order, and gradient accumulation
// order is fixed.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cryptolab/data/windows.hpp"
#include "cryptolab/lstm.hpp"
#include "cryptolab/losses.hpp"

namespace cryptolab {

struct TrainConfig {
  int epochs = 20;
  double learning_rate = 1e-3;
  int batch_size = 32;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;  // last fraction of windows, chronological
  Loss loss = Loss::Mae;

  // Adam moment decay and damping constants.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_mae = 0.0;
  double val_loss = 0.0;
  double val_mae = 0.0;
};

struct TrainResult {
  LstmParams params;
  std::vector<EpochLog> log;
};

// Runs config.epochs of mini-batch gradient descent starting from the given
// parameters. Train metrics are the running mean over the epoch's batches;
// validation metrics are evaluated at the end of each epoch on the held-out
// chronological tail (or on the full training set when the tail is empty).
// Throws TrainingError naming the epoch if the loss turns non-finite.
TrainResult train(const LstmParams& initial, const TrainConfig& config,
                  const WindowSet& train_windows);

// Model checkpoint: JSON carrying shapes, the originating seed, and every
// weight. Doubles survive the round trip bit-exactly.
void save_checkpoint(const LstmParams& params, std::uint64_t seed,
                     const std::string& path);

struct Checkpoint {
  LstmParams params;
  std::uint64_t seed = 0;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cryptolab
