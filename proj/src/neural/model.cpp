#include "melodist/neural/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "melodist/error.hpp"
#include "melodist/rng.hpp"
#include "network.hpp"

namespace melodist {
namespace {

Block take(std::size_t& cursor, std::size_t rows, std::size_t cols) {
  Block b{cursor, rows, cols};
  cursor += rows * cols;
  return b;
}

std::vector<LstmBlocks> take_stack(std::size_t& cursor, std::size_t layers, std::size_t hidden,
                                   std::size_t input_dim) {
  std::vector<LstmBlocks> out;
  for (std::size_t l = 0; l < layers; ++l) {
    LstmBlocks blk;
    blk.wx = take(cursor, 4 * hidden, l == 0 ? input_dim : hidden);
    blk.wh = take(cursor, 4 * hidden, hidden);
    blk.b = take(cursor, 4 * hidden, 1);
    out.push_back(blk);
  }
  return out;
}

void check_arch(const Architecture& a) {
  if (a.layers < 1 || a.hidden < 1 || a.features < 1 || a.alphabet < 1 || a.length < 1 || a.label_dim < 0 ||
      a.num_labels < 0) {
    throw Error(ErrorCode::ShapeMismatch, "architecture dimensions must be positive");
  }
  if (a.conditioned() && (a.num_labels < 1 || a.label_dim < 1)) {
    throw Error(ErrorCode::ShapeMismatch, "conditioned modes need starting-note labels");
  }
}

void fill_uniform(Rng& rng, std::vector<double>& w, const Block& b, std::size_t fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (std::size_t i = 0; i < b.size(); ++i) w[b.offset + i] = rng.uniform(-bound, bound);
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Plain: return "plain";
    case Mode::Transposing: return "transposing";
    case Mode::Invariant: return "invariant";
  }
  return "plain";
}

Mode parse_mode(std::string_view text) {
  if (text == "plain") return Mode::Plain;
  if (text == "transposing") return Mode::Transposing;
  if (text == "invariant") return Mode::Invariant;
  throw Error(ErrorCode::Config, "mode: unknown value '" + std::string(text) +
                                     "' (expected plain, transposing or invariant)");
}

Layout::Layout(const Architecture& arch) {
  check_arch(arch);
  const auto H = static_cast<std::size_t>(arch.hidden);
  const auto N = static_cast<std::size_t>(arch.features);
  const auto A = static_cast<std::size_t>(arch.alphabet);
  const auto layers = static_cast<std::size_t>(arch.layers);
  const std::size_t D = arch.conditioned() ? static_cast<std::size_t>(arch.label_dim) : 0;
  const std::size_t labels = arch.conditioned() ? static_cast<std::size_t>(arch.num_labels) : 0;

  std::size_t cursor = 0;
  embed = take(cursor, A + 1, H);
  encoder = take_stack(cursor, layers, H, H);
  enc_w = take(cursor, N, H);
  enc_b = take(cursor, N, 1);
  label_embed = take(cursor, labels, D);
  init_w = take(cursor, 2 * layers * H, N + D);
  init_b = take(cursor, 2 * layers * H, 1);
  decoder = take_stack(cursor, layers, H, arch.feed_features ? H + N + D : H);
  out_w = take(cursor, A, H);
  out_b = take(cursor, A, 1);
  total = cursor;
}

std::size_t weight_count(const Architecture& arch) { return Layout(arch).total; }

ModelParams make_model(Architecture arch, const Vocabulary& vocab, const VoiceRange& range) {
  ModelParams p;
  arch.alphabet = static_cast<int>(vocab.size());
  arch.num_labels = arch.conditioned() ? range.size() : 0;
  p.arch = arch;
  p.vocabulary = vocab;
  p.label_base = arch.conditioned() ? range.lo : 0;
  p.weights.assign(weight_count(arch), 0.0);
  return p;
}

void initialize(ModelParams& params, std::uint64_t seed) {
  const Layout layout(params.arch);
  params.weights.assign(layout.total, 0.0);
  params.seed = seed;
  Rng rng(seed);
  auto& w = params.weights;
  const auto H = static_cast<std::size_t>(params.arch.hidden);

  fill_uniform(rng, w, layout.embed, 1);
  for (const auto* stack : {&layout.encoder, &layout.decoder}) {
    for (const auto& blk : *stack) {
      fill_uniform(rng, w, blk.wx, blk.wx.cols);
      fill_uniform(rng, w, blk.wh, blk.wh.cols);
      for (std::size_t k = 0; k < H; ++k) w[blk.b.offset + H + k] = 3.0;
    }
  }
  fill_uniform(rng, w, layout.enc_w, layout.enc_w.cols);
  // Positive code bias keeps the ReLU units active early in training.
  for (std::size_t k = 0; k < layout.enc_b.size(); ++k) w[layout.enc_b.offset + k] = 0.5;
  fill_uniform(rng, w, layout.label_embed, 1);
  fill_uniform(rng, w, layout.init_w, layout.init_w.cols);
  fill_uniform(rng, w, layout.out_w, layout.out_w.cols);
}

void validate(const ModelParams& params) {
  const auto& a = params.arch;
  if (static_cast<std::size_t>(a.alphabet) != params.vocabulary.size()) {
    throw Error(ErrorCode::ShapeMismatch, "alphabet size does not match vocabulary");
  }
  if (params.weights.size() != weight_count(a)) {
    throw Error(ErrorCode::ShapeMismatch, "weight count " + std::to_string(params.weights.size()) +
                                              " does not match architecture (" +
                                              std::to_string(weight_count(a)) + ")");
  }
  for (double v : params.weights) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite weight");
  }
}

std::vector<int> to_indices(const ModelParams& params, const TokenSequence& seq) {
  if (static_cast<int>(seq.size()) != params.arch.length) {
    throw Error(ErrorCode::ShapeMismatch, "sequence length " + std::to_string(seq.size()) +
                                              " but model expects " + std::to_string(params.arch.length));
  }
  std::vector<int> out;
  out.reserve(seq.size());
  for (const auto& t : seq) {
    auto idx = params.vocabulary.find(t);
    if (!idx) throw Error(ErrorCode::ShapeMismatch, "token " + to_string(t) + " outside model vocabulary");
    out.push_back(*idx);
  }
  return out;
}

int label_index(const ModelParams& params, const Transposition& t) {
  if (!t.absolute_label.is_note()) {
    throw Error(ErrorCode::ContractViolation, "absolute transposition label must be a note");
  }
  const int idx = t.absolute_label.midi - params.label_base;
  if (idx < 0 || idx >= params.arch.num_labels) {
    throw Error(ErrorCode::ShapeMismatch, "starting note " + to_string(t.absolute_label) + " has no label");
  }
  return idx;
}

FeatureVector encode(const ModelParams& params, const TokenSequence& seq) {
  const Layout layout(params.arch);
  if (params.weights.size() != layout.total) throw Error(ErrorCode::ShapeMismatch, "weight array size");
  const auto tokens = to_indices(params, seq);
  detail::EncodeTrace tr;
  detail::encode_forward(params, layout, tokens, tr);
  return std::move(tr.features);
}

OutputDistribution decode(const ModelParams& params, std::span<const double> features,
                          const std::optional<Transposition>& t, const std::optional<TokenSequence>& target) {
  const Layout layout(params.arch);
  if (params.weights.size() != layout.total) throw Error(ErrorCode::ShapeMismatch, "weight array size");
  if (features.size() != static_cast<std::size_t>(params.arch.features)) {
    throw Error(ErrorCode::ShapeMismatch, "feature vector has " + std::to_string(features.size()) + " entries");
  }
  if (params.arch.conditioned() != t.has_value()) {
    throw Error(ErrorCode::MissingTransposition,
                params.arch.conditioned() ? "this model decodes relative to a starting note; none given"
                                          : "plain autoencoder takes no transposition");
  }
  const int label = t ? label_index(params, *t) : -1;
  std::vector<int> tgt;
  if (target) tgt = to_indices(params, *target);
  detail::DecodeTrace tr;
  detail::decode_forward(params, layout, features, label, tgt, tr);
  OutputDistribution out;
  out.length = params.arch.length;
  out.alphabet = params.arch.alphabet;
  out.probs = std::move(tr.probs);
  return out;
}

TokenSequence reconstruct(const ModelParams& params, const TokenSequence& seq, const std::optional<Transposition>& t) {
  const auto features = encode(params, seq);
  const auto dist = decode(params, features, t);
  TokenSequence out;
  for (int i = 0; i < dist.length; ++i) {
    auto row = dist.row(i);
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    out.push_back(params.vocabulary.token_of(best));
  }
  return out;
}

FeatureVector averaged_encoding(const ModelParams& params, const TokenSequence& a, const TokenSequence& b) {
  if (params.arch.mode != Mode::Invariant) {
    throw Error(ErrorCode::ModeMismatch, "averaged encoding is defined for the invariant model");
  }
  if (!same_class(a, b)) throw Error(ErrorCode::ContractViolation, "sequences are not transpositions of each other");
  auto x = encode(params, a);
  const auto y = encode(params, b);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = 0.5 * (x[k] + y[k]);
  return x;
}

}  // namespace melodist
