#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <cmath>
#include <vector>

#include "melodist/encoding.hpp"
#include "melodist/neural/losses.hpp"
#include "melodist/neural/model.hpp"
#include "melodist/rng.hpp"

namespace melodist::testing {

// HOLD, REST and the eight pitches C4..G4: A = 10.
inline Vocabulary tiny_vocabulary() {
  std::vector<Token> notes;
  for (int m = 60; m <= 67; ++m) notes.push_back(Token::note(m));
  return Vocabulary(notes);
}

inline VoiceRange tiny_range() { return {60, 67}; }

// hidden 8, N 8, L 6, A 10.
inline ModelParams tiny_model(Mode mode, std::uint64_t seed) {
  Architecture arch;
  arch.mode = mode;
  arch.hidden = 8;
  arch.features = 8;
  arch.length = 6;
  arch.label_dim = 4;
  auto p = make_model(arch, tiny_vocabulary(), tiny_range());
  initialize(p, seed);
  // Nonzero biases so every bias path carries signal in gradient checks.
  Rng rng(seed + 1000);
  const Layout layout(p.arch);
  for (const Block* b : {&layout.enc_b, &layout.init_b, &layout.out_b}) {
    for (std::size_t i = 0; i < b->size(); ++i) p.weights[b->offset + i] = rng.uniform(-0.3, 0.3);
  }
  for (const auto* stack : {&layout.encoder, &layout.decoder}) {
    for (const auto& blk : *stack) {
      for (std::size_t i = 0; i < blk.b.size(); ++i) p.weights[blk.b.offset + i] += rng.uniform(-0.3, 0.3);
    }
  }
  return p;
}

// Random sequence over the tiny vocabulary, pitches confined to [lo, hi],
// guaranteed to contain a note.
inline TokenSequence random_sequence(Rng& rng, int length, int lo = 60, int hi = 67) {
  TokenSequence s;
  for (int i = 0; i < length; ++i) {
    const auto r = rng.below(10);
    if (r < 2) {
      s.push_back(Token::hold());
    } else if (r < 3) {
      s.push_back(Token::rest());
    } else {
      s.push_back(Token::note(rng.uniform_int(lo, hi)));
    }
  }
  if (!first_sounded(s)) s[0] = Token::note(lo);
  return s;
}

inline std::vector<FeatureVector> random_features(Rng& rng, std::size_t count, std::size_t n) {
  std::vector<FeatureVector> out(count, FeatureVector(n));
  for (auto& v : out) {
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  }
  return out;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;
};

// Central differences on every weight. A coordinate's relative error is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
inline GradCheck finite_difference_check(const ModelParams& params, LossKind kind,
                                         const std::vector<Example>& batch, double lambda,
                                         double step = 1e-4) {
  const auto analytic = grad(params, kind, batch, lambda);
  ModelParams probe = params;
  GradCheck out;
  out.coordinates = analytic.size();
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double w = probe.weights[i];
    probe.weights[i] = w + step;
    const double up = evaluate(probe, kind, batch, lambda).loss;
    probe.weights[i] = w - step;
    const double down = evaluate(probe, kind, batch, lambda).loss;
    probe.weights[i] = w;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > out.max_rel_error) {
      out.max_rel_error = rel;
      out.worst_index = i;
    }
  }
  return out;
}

// Batch of three items valid for `kind` on the tiny model.
inline std::vector<Example> tiny_batch(LossKind kind, std::uint64_t seed) {
  Rng rng(seed);
  const auto vocab = tiny_vocabulary();
  std::vector<Example> batch;
  for (int k = 0; k < 3; ++k) {
    // Pitches within [61, 65] leave room for shifts of -1..+2.
    auto s = random_sequence(rng, 6, 61, 65);
    switch (kind) {
      case LossKind::Reconstruction: batch.push_back(Example::reconstruction(s)); break;
      case LossKind::Transposing: batch.push_back(Example::transposing(s, k - 1, vocab)); break;
      case LossKind::Invariant: batch.push_back(Example::invariant(s, 2 - k, k - 1, vocab)); break;
    }
  }
  return batch;
}

}  // namespace melodist::testing
