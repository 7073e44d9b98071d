#include "melodist/neural/losses.hpp"

#include <algorithm>
#include <cmath>

#include "melodist/error.hpp"
#include "network.hpp"

namespace melodist {
namespace {

Transposition label_of(const TokenSequence& seq, int semitones) {
  auto first = first_sounded(seq);
  if (!first) throw Error(ErrorCode::NoSoundedNote, "sequence has no sounded note");
  return {semitones, *first};
}

Mode required_mode(LossKind kind) {
  switch (kind) {
    case LossKind::Reconstruction: return Mode::Plain;
    case LossKind::Transposing: return Mode::Transposing;
    case LossKind::Invariant: return Mode::Invariant;
  }
  return Mode::Plain;
}

void check_transposed(const TokenSequence& source, const Transposition& t, const TokenSequence& moved) {
  if (!same_class(source, moved) || moved.size() != source.size()) {
    throw Error(ErrorCode::ContractViolation, "transposed sequence does not match its source");
  }
  auto s0 = first_sounded(source);
  auto m0 = first_sounded(moved);
  if (!s0 || !m0 || m0->midi - s0->midi != t.semitones || !(t.absolute_label == *m0)) {
    throw Error(ErrorCode::ContractViolation, "transposition does not map source onto target");
  }
}

}  // namespace

LossKind loss_for(Mode mode) {
  switch (mode) {
    case Mode::Plain: return LossKind::Reconstruction;
    case Mode::Transposing: return LossKind::Transposing;
    case Mode::Invariant: return LossKind::Invariant;
  }
  return LossKind::Reconstruction;
}

Example Example::reconstruction(TokenSequence s) {
  Example e;
  e.target = s;
  e.source = std::move(s);
  return e;
}

Example Example::transposing(TokenSequence s, int semitones, const Vocabulary& vocab) {
  Example e;
  e.target = transpose(s, semitones, vocab);
  e.output = label_of(e.target, semitones);
  e.source = std::move(s);
  return e;
}

Example Example::invariant(TokenSequence s, int pair_semitones, int output_semitones, const Vocabulary& vocab) {
  Example e;
  e.paired = transpose(s, pair_semitones, vocab);
  e.pair = label_of(e.paired, pair_semitones);
  e.target = transpose(s, output_semitones, vocab);
  e.output = label_of(e.target, output_semitones);
  e.source = std::move(s);
  return e;
}

void check_batch(const ModelParams& params, LossKind kind, std::span<const Example> batch) {
  if (params.arch.mode != required_mode(kind)) {
    throw Error(ErrorCode::ModeMismatch, "loss requires a " + std::string(to_string(required_mode(kind))) +
                                             " model, got " + std::string(to_string(params.arch.mode)));
  }
  if (batch.empty()) throw Error(ErrorCode::ContractViolation, "empty batch");
  for (const auto& ex : batch) {
    switch (kind) {
      case LossKind::Reconstruction:
        if (ex.target != ex.source) throw Error(ErrorCode::ContractViolation, "reconstruction target differs from source");
        break;
      case LossKind::Transposing:
        check_transposed(ex.source, ex.output, ex.target);
        break;
      case LossKind::Invariant:
        check_transposed(ex.source, ex.pair, ex.paired);
        check_transposed(ex.source, ex.output, ex.target);
        break;
    }
  }
}

LossValue evaluate(const ModelParams& params, LossKind kind, std::span<const Example> batch, double lambda,
                   std::span<double> grad, const DecoderFeed& feed) {
  check_batch(params, kind, batch);
  if (feed.teacher_forcing && feed.sampling_prob > 0.0 && feed.rng == nullptr) {
    throw Error(ErrorCode::ContractViolation, "scheduled sampling needs a random stream");
  }
  const Layout layout(params.arch);
  if (params.weights.size() != layout.total) throw Error(ErrorCode::ShapeMismatch, "weight array size");
  const bool want_grad = !grad.empty();
  if (want_grad) {
    if (grad.size() != layout.total) throw Error(ErrorCode::ShapeMismatch, "gradient buffer size");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  const auto N = static_cast<std::size_t>(params.arch.features);
  const auto A = static_cast<std::size_t>(params.arch.alphabet);
  const double scale = 1.0 / static_cast<double>(batch.size());

  detail::EncodeTrace enc_a;
  detail::EncodeTrace enc_b;
  detail::DecodeTrace dec;
  std::vector<double> z(N);
  std::vector<double> dz(N);
  std::vector<double> d_a(N);
  std::vector<double> d_b(N);
  double ce_total = 0.0;
  double l1_total = 0.0;

  for (const auto& ex : batch) {
    const auto target = to_indices(params, ex.target);
    std::vector<int> fed;
    if (feed.teacher_forcing) {
      fed = target;
      if (feed.sampling_prob > 0.0) {
        for (int& v : fed) {
          if (feed.rng->bernoulli(feed.sampling_prob)) v = -1;
        }
      }
    }
    const std::span<const int> forced(fed);
    detail::encode_forward(params, layout, to_indices(params, ex.source), enc_a);
    const int label = kind == LossKind::Reconstruction ? -1 : label_index(params, ex.output);

    if (kind != LossKind::Invariant) {
      detail::decode_forward(params, layout, enc_a.features, label, forced, dec);
      ce_total += detail::cross_entropy(dec, target, A);
      if (want_grad) {
        std::fill(dz.begin(), dz.end(), 0.0);
        detail::decode_backward(params, layout, dec, target, scale, grad.data(), dz);
        detail::encode_backward(params, layout, enc_a, dz, grad.data());
      }
      continue;
    }

    detail::encode_forward(params, layout, to_indices(params, ex.paired), enc_b);
    double l1 = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      z[k] = 0.5 * (enc_a.features[k] + enc_b.features[k]);
      l1 += std::abs(enc_a.features[k] - enc_b.features[k]);
    }
    l1_total += l1;
    detail::decode_forward(params, layout, z, label, forced, dec);
    ce_total += detail::cross_entropy(dec, target, A);
    if (want_grad) {
      std::fill(dz.begin(), dz.end(), 0.0);
      detail::decode_backward(params, layout, dec, target, scale, grad.data(), dz);
      for (std::size_t k = 0; k < N; ++k) {
        const double diff = enc_a.features[k] - enc_b.features[k];
        const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        d_a[k] = 0.5 * dz[k] + scale * lambda * sign;
        d_b[k] = 0.5 * dz[k] - scale * lambda * sign;
      }
      detail::encode_backward(params, layout, enc_a, d_a, grad.data());
      detail::encode_backward(params, layout, enc_b, d_b, grad.data());
    }
  }

  LossValue v;
  v.l1_term = l1_total * scale;
  v.loss = ce_total * scale + lambda * v.l1_term;
  return v;
}

double loss_ae(const ModelParams& params, std::span<const TokenSequence> batch) {
  std::vector<Example> examples;
  examples.reserve(batch.size());
  for (const auto& s : batch) examples.push_back(Example::reconstruction(s));
  return evaluate(params, LossKind::Reconstruction, examples, 0.0).loss;
}

double loss_transposing(const ModelParams& params, std::span<const Example> batch) {
  return evaluate(params, LossKind::Transposing, batch, 0.0).loss;
}

double loss_invariant(const ModelParams& params, std::span<const Example> batch, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::ContractViolation, "lambda must be nonnegative");
  return evaluate(params, LossKind::Invariant, batch, lambda).loss;
}

std::vector<double> grad(const ModelParams& params, LossKind kind, std::span<const Example> batch, double lambda) {
  std::vector<double> g(weight_count(params.arch));
  evaluate(params, kind, batch, lambda, g);
  return g;
}

}  // namespace melodist
