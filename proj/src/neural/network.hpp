#pragma once

// Forward passes that record what the backward passes need. Weight gradients
// accumulate into a flat array laid out like ModelParams::weights.

#include <span>
#include <vector>

#include "melodist/neural/model.hpp"

namespace melodist::detail {

struct StackTrace {
  std::size_t hidden = 0;
  std::size_t steps = 0;
  std::vector<std::size_t> input_dims;
  // Per layer. h and c hold steps + 1 rows, row 0 being the initial state.
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> h;
  std::vector<std::vector<double>> c;
  std::vector<std::vector<double>> gates;  // post-activation i, f, g, o
  std::vector<std::vector<double>> tanh_c;

  std::span<const double> top(std::size_t t) const {  // top-layer output at step t
    return {h.back().data() + (t + 1) * hidden, hidden};
  }
};

// h0/c0 hold layers * H values, or are empty for a zero initial state.
void stack_begin(StackTrace& tr, std::size_t layers, std::size_t hidden, std::size_t input_dim,
                 std::span<const double> h0, std::span<const double> c0, std::size_t reserve_steps);

std::span<const double> stack_step(StackTrace& tr, const double* w, const std::vector<LstmBlocks>& blocks,
                                   std::span<const double> input);

// d_top holds steps * H values. d_inputs (steps * input_dim), dh0 and dc0
// (layers * H) are overwritten; any of them may be empty to skip.
void stack_backward(const StackTrace& tr, const double* w, double* g, const std::vector<LstmBlocks>& blocks,
                    std::span<const double> d_top, std::span<double> d_inputs, std::span<double> dh0,
                    std::span<double> dc0);

struct EncodeTrace {
  std::vector<int> tokens;
  StackTrace stack;
  std::vector<double> pre;       // projection before the ReLU
  std::vector<double> features;  // after the ReLU
};

void encode_forward(const ModelParams& params, const Layout& layout, std::span<const int> tokens,
                    EncodeTrace& tr);

// Accumulates the gradient of a loss whose derivative with respect to the
// features is d_features.
void encode_backward(const ModelParams& params, const Layout& layout, const EncodeTrace& tr,
                     std::span<const double> d_features, double* grad);

struct DecodeTrace {
  std::vector<double> z;  // features, then the label embedding when conditioned
  int label = -1;
  std::vector<int> inputs;  // decoder input token per step (start symbol first)
  StackTrace stack;
  std::vector<double> probs;  // steps x A
};

// Teacher-forced when `target` is non-empty, otherwise greedy.
void decode_forward(const ModelParams& params, const Layout& layout, std::span<const double> features,
                    int label, std::span<const int> target, DecodeTrace& tr);

// Summed cross-entropy of the decoded rows against `target`.
double cross_entropy(const DecodeTrace& tr, std::span<const int> target, std::size_t alphabet);

// Backward of scale * cross_entropy. Adds dLoss/dfeatures into d_features.
void decode_backward(const ModelParams& params, const Layout& layout, const DecodeTrace& tr,
                     std::span<const int> target, double scale, double* grad, std::span<double> d_features);

}  // namespace melodist::detail
