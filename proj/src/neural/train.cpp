#include "melodist/neural/train.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <numeric>
#include <string>

#include "melodist/error.hpp"
#include "melodist/neural/losses.hpp"
#include "melodist/rng.hpp"

namespace melodist {
namespace {

struct Adam {
  double lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;

  Adam(double learning_rate, std::size_t n) : lr(learning_rate), m(n, 0.0), v(n, 0.0) {}

  void update(std::vector<double>& w, const std::vector<double>& g) {
    ++step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
};

void check_config(const TrainingConfig& c) {
  if (c.epochs < 0) throw Error(ErrorCode::Config, "epochs must be >= 0");
  if (c.batch_size < 1) throw Error(ErrorCode::Config, "batch_size must be >= 1");
  if (!(c.learning_rate > 0.0)) throw Error(ErrorCode::Config, "learning_rate must be positive");
  if (c.lambda_warmup < 0) throw Error(ErrorCode::Config, "lambda_warmup must be >= 0");
  if (!(c.lambda >= 0.0)) throw Error(ErrorCode::Config, "lambda must be nonnegative");
  if (!(c.lr_decay > 0.0 && c.lr_decay <= 1.0)) throw Error(ErrorCode::Config, "lr_decay must be in (0, 1]");
  if (!(c.sampling_prob >= 0.0 && c.sampling_prob <= 1.0)) {
    throw Error(ErrorCode::Config, "sampling_prob must be in [0, 1]");
  }
  if (!(c.clip_norm >= 0.0)) throw Error(ErrorCode::Config, "clip_norm must be nonnegative");
}

}  // namespace

TrainResult train(const TrainingConfig& config, const Corpus& corpus, Mode mode,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  check_config(config);
  if (corpus.size() == 0) throw Error(ErrorCode::CorpusTooSmall, "empty corpus");

  Architecture arch;
  arch.mode = mode;
  arch.layers = config.layers;
  arch.hidden = config.hidden;
  arch.features = config.features;
  arch.label_dim = config.label_dim;
  arch.length = corpus.length();

  TrainResult result;
  result.params = make_model(arch, corpus.vocabulary, corpus.voice_range);
  auto& params = result.params;
  initialize(params, config.seed);

  const LossKind kind = loss_for(mode);
  std::vector<std::vector<int>> shifts;
  if (kind != LossKind::Reconstruction) {
    shifts.reserve(corpus.size());
    for (const auto& s : corpus.sequences) {
      std::vector<int> cls;
      for (const auto& m : equivalence_class(s, corpus)) cls.push_back(m.transposition.semitones);
      shifts.push_back(std::move(cls));
    }
  }

  // Separate streams so shuffling and transposition sampling stay independent.
  Rng order_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Rng sample_rng(config.seed ^ 0xc2b2ae3d27d4eb4fULL);
  Rng feed_rng(config.seed ^ 0x165667b19e3779f9ULL);
  const DecoderFeed feed{config.teacher_forcing, config.sampling_prob, &feed_rng};
  Adam adam(config.learning_rate, params.weights.size());
  std::vector<double> g(params.weights.size());
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto B = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    const double lambda =
        epoch <= config.lambda_warmup ? config.lambda * epoch / static_cast<double>(config.lambda_warmup + 1) : config.lambda;
    double loss_sum = 0.0;
    double l1_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += B) {
      std::vector<Example> batch;
      for (std::size_t i = start; i < std::min(start + B, order.size()); ++i) {
        const std::size_t k = order[i];
        const auto& s = corpus.sequences[k];
        switch (kind) {
          case LossKind::Reconstruction:
            batch.push_back(Example::reconstruction(s));
            break;
          case LossKind::Transposing: {
            const auto& cls = shifts[k];
            batch.push_back(Example::transposing(s, cls[sample_rng.below(cls.size())], corpus.vocabulary));
            break;
          }
          case LossKind::Invariant: {
            const auto& cls = shifts[k];
            const int t = cls[sample_rng.below(cls.size())];
            const int t_out = cls[sample_rng.below(cls.size())];
            batch.push_back(Example::invariant(s, t, t_out, corpus.vocabulary));
            break;
          }
        }
      }
      const LossValue v = evaluate(params, kind, batch, lambda, g, feed);
      if (!std::isfinite(v.loss)) {
        throw Error(ErrorCode::Divergence, "loss became non-finite at epoch " + std::to_string(epoch) + ", batch " +
                                               std::to_string(batches + 1));
      }
      if (config.clip_norm > 0.0) {
        double norm = 0.0;
        for (double x : g) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > config.clip_norm) {
          const double f = config.clip_norm / norm;
          for (double& x : g) x *= f;
        }
      }
      adam.update(params.weights, g);
      loss_sum += v.loss;
      l1_sum += v.l1_term;
      ++batches;
    }
    adam.lr *= config.lr_decay;
    EpochRecord rec{epoch, loss_sum / static_cast<double>(batches), l1_sum / static_cast<double>(batches)};
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

double reconstruction_accuracy(const ModelParams& params, const std::vector<TokenSequence>& sequences) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& s : sequences) {
    std::optional<Transposition> t;
    if (params.arch.conditioned()) t = Transposition{0, *first_sounded(s)};
    const auto out = reconstruct(params, s, t);
    for (std::size_t i = 0; i < s.size(); ++i) correct += out[i] == s[i] ? 1 : 0;
    total += s.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace melodist
