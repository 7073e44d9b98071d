#pragma once

// Training objectives. All losses are means over the batch of per-sequence
// cross-entropies summed over time steps.

#include <span>
#include <vector>

#include "melodist/neural/model.hpp"
#include "melodist/rng.hpp"

namespace melodist {

enum class LossKind { Reconstruction, Transposing, Invariant };

LossKind loss_for(Mode mode);

// One training item. For reconstruction only `source` is used. For the
// transposing loss the decoder reproduces `target` = output.s from enc(source).
// For the invariant loss the decoder reads the average of enc(source) and
// enc(paired) where paired = pair.s.
struct Example {
  TokenSequence source;
  Transposition pair;
  TokenSequence paired;
  Transposition output;
  TokenSequence target;

  static Example reconstruction(TokenSequence s);
  static Example transposing(TokenSequence s, int semitones, const Vocabulary& vocab);
  static Example invariant(TokenSequence s, int pair_semitones, int output_semitones, const Vocabulary& vocab);
};

struct LossValue {
  double loss = 0.0;     // including the weighted l1 term
  double l1_term = 0.0;  // batch mean of |enc(s) - enc(t.s)|_1, unweighted
};

// Checks every example against its kind; throws ModeMismatch/ContractViolation.
void check_batch(const ModelParams& params, LossKind kind, std::span<const Example> batch);

// How the decoder is fed while computing a loss. With teacher forcing each step
// reads the previous ground-truth token, except that with probability
// `sampling_prob` (drawn from `rng`) it reads its own previous argmax instead.
// Without teacher forcing every step reads its own argmax.
struct DecoderFeed {
  bool teacher_forcing = true;
  double sampling_prob = 0.0;
  Rng* rng = nullptr;
};

// Loss of the batch; when `grad` is non-empty it is overwritten with the exact
// gradient (same layout as params.weights). Fed-back argmax tokens are treated
// as constants.
LossValue evaluate(const ModelParams& params, LossKind kind, std::span<const Example> batch, double lambda,
                   std::span<double> grad = {}, const DecoderFeed& feed = {});

double loss_ae(const ModelParams& params, std::span<const TokenSequence> batch);
double loss_transposing(const ModelParams& params, std::span<const Example> batch);
double loss_invariant(const ModelParams& params, std::span<const Example> batch, double lambda);

std::vector<double> grad(const ModelParams& params, LossKind kind, std::span<const Example> batch, double lambda);

}  // namespace melodist
