#pragma once

// Recurrent sequence-to-sequence autoencoder. The encoder is an LSTM stack
// whose last top-layer hidden state is projected and passed through a ReLU to
// give the feature vector. The decoder is a second LSTM stack seeded from a
// linear projection of the feature vector (concatenated with a learned
// embedding of the target's starting note in the transposing modes).

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "melodist/encoding.hpp"
#include "melodist/rankdist.hpp"

namespace melodist {

enum class Mode { Plain, Transposing, Invariant };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);  // "plain" | "transposing" | "invariant"

struct Architecture {
  Mode mode = Mode::Plain;
  int layers = 1;
  int hidden = 64;
  int features = 64;  // N
  int alphabet = 0;   // A, output classes; the decoder input adds one start symbol
  int length = 0;     // L
  int num_labels = 0;  // starting-note labels, 0 in Plain mode
  int label_dim = 16;
  bool feed_features = true;  // decoder also reads the code at every step

  bool conditioned() const { return mode != Mode::Plain; }
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct Block {
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
};

struct LstmBlocks {
  Block wx;  // 4H x input, gate rows ordered input, forget, cell, output
  Block wh;  // 4H x H
  Block b;   // 4H x 1
};

// Offsets of every named weight block inside the flat weight array.
struct Layout {
  Block embed;  // (A + 1) x H, row A is the start symbol
  std::vector<LstmBlocks> encoder;
  Block enc_w;  // N x H
  Block enc_b;
  Block label_embed;  // num_labels x label_dim
  Block init_w;       // layers * 2H x (N + label_dim); rows give h0 then c0 per layer
  Block init_b;
  std::vector<LstmBlocks> decoder;
  Block out_w;  // A x H
  Block out_b;
  std::size_t total = 0;

  explicit Layout(const Architecture& arch);
};

std::size_t weight_count(const Architecture& arch);

struct ModelParams {
  Architecture arch;
  Vocabulary vocabulary;
  int label_base = 0;  // midi pitch of starting-note label 0
  std::uint64_t seed = 0;
  std::vector<double> weights;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// All weights zero. alphabet comes from the vocabulary; labels cover `range`.
ModelParams make_model(Architecture arch, const Vocabulary& vocab, const VoiceRange& range);

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per matrix. Biases are zero
// except the LSTM forget gates (3) and the code layer (0.5).
void initialize(ModelParams& params, std::uint64_t seed);

// Validates shape metadata and weight finiteness; throws ShapeMismatch/NonFinite.
void validate(const ModelParams& params);

std::vector<int> to_indices(const ModelParams& params, const TokenSequence& seq);
int label_index(const ModelParams& params, const Transposition& t);

FeatureVector encode(const ModelParams& params, const TokenSequence& seq);

struct OutputDistribution {
  int length = 0;
  int alphabet = 0;
  std::vector<double> probs;  // row-major length x alphabet

  std::span<const double> row(int i) const {
    return {probs.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(alphabet),
            static_cast<std::size_t>(alphabet)};
  }
};

// With a target the decoder is teacher-forced on it; without, each step is fed
// the argmax of the previous one. `t` must be given exactly when the model is
// conditioned on a starting note.
OutputDistribution decode(const ModelParams& params, std::span<const double> features,
                          const std::optional<Transposition>& t,
                          const std::optional<TokenSequence>& target = std::nullopt);

// Greedy decode of enc(seq), mapped back to tokens.
TokenSequence reconstruct(const ModelParams& params, const TokenSequence& seq,
                          const std::optional<Transposition>& t = std::nullopt);

// (enc(a) + enc(b)) / 2.
FeatureVector averaged_encoding(const ModelParams& params, const TokenSequence& a,
                                const TokenSequence& b);

}  // namespace melodist
