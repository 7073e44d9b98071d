#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "melodist/encoding.hpp"
#include "melodist/neural/model.hpp"

namespace melodist {

struct TrainingConfig {
  double lambda = 1.0;
  int lambda_warmup = 0;  // epochs over which the penalty weight ramps linearly up to lambda
  double learning_rate = 1e-3;
  double lr_decay = 1.0;  // learning rate multiplier applied after each epoch
  int epochs = 10;
  int batch_size = 32;
  std::uint64_t seed = 1;
  bool teacher_forcing = true;
  double sampling_prob = 0.0;  // scheduled sampling: chance a step reads its own argmax
  double clip_norm = 0.0;  // global gradient-norm clip, 0 disables

  int layers = 1;
  int hidden = 64;
  int features = 64;
  int label_dim = 16;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;     // mean minibatch loss over the epoch
  double l1_term = 0.0;  // mean unweighted l1 term (invariant mode only)

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> log;
};

// Adam (beta1 0.9, beta2 0.999, eps 1e-8) from a seeded initialization.
// Transposing and invariant modes draw their transpositions uniformly from each
// sequence's equivalence class, afresh every epoch. Throws Divergence if a
// batch loss becomes non-finite.
TrainResult train(const TrainingConfig& config, const Corpus& corpus, Mode mode,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

// Fraction of tokens recovered by greedy decoding of each sequence's own
// encoding (conditioned on its own starting note where the model needs one).
double reconstruction_accuracy(const ModelParams& params, const std::vector<TokenSequence>& sequences);

}  // namespace melodist
