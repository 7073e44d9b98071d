#include "melodist/metric.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "melodist/error.hpp"
#include "melodist/rng.hpp"

namespace melodist {
namespace {

const ModelParams& model_of(const DistanceSpec& spec) {
  if (spec.model == nullptr) throw Error(ErrorCode::ContractViolation, "distance spec has no model");
  return *spec.model;
}

RankVector encode_ranks(const ModelParams& model, const TokenSequence& s) { return rank_vector(encode(model, s)); }

}  // namespace

DistanceSpec parse_rank(std::string_view text) {
  DistanceSpec spec;
  if (text == "spearman") {
    spec.kind = RankKind::Spearman;
  } else if (text == "kendall") {
    spec.kind = RankKind::KendallDissimilarity;
  } else if (text.starts_with("tspearman:")) {
    spec.kind = RankKind::TruncatedSpearman;
    const std::string digits(text.substr(10));
    try {
      std::size_t used = 0;
      spec.order = std::stoi(digits, &used);
      if (used != digits.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::Usage, "rank: bad truncation order in '" + std::string(text) + "'");
    }
    if (spec.order < 1) throw Error(ErrorCode::BadOrder, "rank: truncation order must be >= 1");
  } else {
    throw Error(ErrorCode::Usage, "rank: expected spearman, tspearman:<l> or kendall, got '" + std::string(text) + "'");
  }
  return spec;
}

std::string to_string(const DistanceSpec& spec) {
  switch (spec.kind) {
    case RankKind::Spearman: return "spearman";
    case RankKind::TruncatedSpearman: return "tspearman:" + std::to_string(spec.order);
    case RankKind::KendallDissimilarity: return "kendall";
  }
  return "spearman";
}

void check_spec(const DistanceSpec& spec) {
  const auto& model = model_of(spec);
  if (spec.kind == RankKind::TruncatedSpearman && (spec.order < 1 || spec.order > model.arch.features)) {
    throw Error(ErrorCode::BadOrder, "truncation order " + std::to_string(spec.order) + " outside [1, " +
                                         std::to_string(model.arch.features) + "]");
  }
  if (spec.kind == RankKind::KendallDissimilarity && model.arch.features < 2) {
    throw Error(ErrorCode::TooShort, "Kendall distance needs at least two features");
  }
}

double rank_distance(const DistanceSpec& spec, const RankVector& a, const RankVector& b) {
  switch (spec.kind) {
    case RankKind::Spearman: return spearman_rho(a, b);
    case RankKind::TruncatedSpearman: return truncated_spearman(a, b, spec.order);
    case RankKind::KendallDissimilarity: return 1.0 - kendall_tau(a, b);
  }
  return 0.0;
}

double corpus_distance(const DistanceSpec& spec, const TokenSequence& a, const TokenSequence& b) {
  check_spec(spec);
  const auto& model = model_of(spec);
  return rank_distance(spec, encode_ranks(model, a), encode_ranks(model, b));
}

EncodedSet::EncodedSet(const ModelParams& model, std::vector<TokenSequence> sequences)
    : model_(&model), sequences_(std::move(sequences)) {
  features_.reserve(sequences_.size());
  ranks_.reserve(sequences_.size());
  for (const auto& s : sequences_) {
    features_.push_back(encode(model, s));
    ranks_.push_back(rank_vector(features_.back()));
  }
}

std::vector<Neighbor> knn(const DistanceSpec& spec, const TokenSequence& query, const EncodedSet& candidates,
                          std::size_t k, bool dedup) {
  check_spec(spec);
  if (&model_of(spec) != &candidates.model()) {
    throw Error(ErrorCode::ContractViolation, "candidates were encoded by a different model");
  }
  if (k < 1) throw Error(ErrorCode::Usage, "k must be >= 1");
  const RankVector q = encode_ranks(candidates.model(), query);
  std::vector<Neighbor> all(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) all[i] = {i, rank_distance(spec, q, candidates.ranks(i))};
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
  });
  std::vector<Neighbor> out;
  for (const auto& n : all) {
    if (out.size() >= k) break;
    if (dedup && std::any_of(out.begin(), out.end(), [&](const Neighbor& kept) {
          return candidates.sequence(kept.index) == candidates.sequence(n.index);
        })) {
      continue;
    }
    out.push_back(n);
  }
  return out;
}

std::vector<Neighbor> knn(const DistanceSpec& spec, const TokenSequence& query,
                          const std::vector<TokenSequence>& candidates, std::size_t k, bool dedup) {
  const EncodedSet set(model_of(spec), candidates);
  return knn(spec, query, set, k, dedup);
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double auc_rank_sum(const std::vector<double>& in_class, const std::vector<double>& cross_class) {
  if (in_class.empty() || cross_class.empty()) return 0.0;
  struct Item {
    double value;
    bool cross;
  };
  std::vector<Item> items;
  items.reserve(in_class.size() + cross_class.size());
  for (double v : in_class) items.push_back({v, false});
  for (double v : cross_class) items.push_back({v, true});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.value < b.value; });
  // Twice the midrank of a tie group spanning 1-based ranks [first, last] is
  // first + last, an integer.
  std::int64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    while (j < items.size() && items[j].value == items[i].value) ++j;
    const auto twice_mid = static_cast<std::int64_t>(i + 1 + j);
    for (std::size_t m = i; m < j; ++m) {
      if (items[m].cross) twice_rank_sum += twice_mid;
    }
    i = j;
  }
  const auto nc = static_cast<std::int64_t>(cross_class.size());
  const auto ni = static_cast<std::int64_t>(in_class.size());
  const std::int64_t twice_u = twice_rank_sum - nc * (nc + 1);
  return static_cast<double>(twice_u) / static_cast<double>(2 * ni * nc);
}

double auc_pairwise(const std::vector<double>& in_class, const std::vector<double>& cross_class) {
  if (in_class.empty() || cross_class.empty()) return 0.0;
  std::int64_t twice = 0;
  for (double a : in_class) {
    for (double b : cross_class) {
      if (a < b) {
        twice += 2;
      } else if (a == b) {
        twice += 1;
      }
    }
  }
  const auto n = static_cast<std::int64_t>(in_class.size()) * static_cast<std::int64_t>(cross_class.size());
  return static_cast<double>(twice) / static_cast<double>(2 * n);
}

Histogram make_histogram(const std::vector<double>& in_class, const std::vector<double>& cross_class, int bins) {
  if (bins < 1) throw Error(ErrorCode::Usage, "histogram needs at least one bin");
  Histogram h;
  double lo = 0.0;
  double hi = 0.0;
  bool first = true;
  for (const auto* sample : {&in_class, &cross_class}) {
    for (double v : *sample) {
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  }
  if (hi <= lo) hi = lo + 1.0;
  const auto nb = static_cast<std::size_t>(bins);
  h.edges.resize(nb + 1);
  for (std::size_t b = 0; b <= nb; ++b) h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(nb);
  auto bin_of = [&](double v) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(nb));
    return std::min(b, nb - 1);
  };
  h.in_counts.assign(nb, 0);
  h.cross_counts.assign(nb, 0);
  for (double v : in_class) ++h.in_counts[bin_of(v)];
  for (double v : cross_class) ++h.cross_counts[bin_of(v)];
  return h;
}

EvalReport invariance_eval(const DistanceSpec& spec, const Corpus& corpus, int n_pairs, std::uint64_t seed, int bins) {
  check_spec(spec);
  const auto& model = model_of(spec);
  if (n_pairs < 1) throw Error(ErrorCode::Usage, "n_pairs must be >= 1");

  std::vector<std::vector<ClassMember>> classes;
  std::vector<std::size_t> transposable;
  classes.reserve(corpus.size());
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    classes.push_back(equivalence_class(corpus.sequences[k], corpus));
    if (classes.back().size() >= 2) transposable.push_back(k);
  }
  if (transposable.empty()) throw Error(ErrorCode::CorpusTooSmall, "no equivalence class has two members");
  if (corpus.size() < 2) throw Error(ErrorCode::CorpusTooSmall, "cross-class pairs need two sequences");

  std::vector<std::optional<RankVector>> cache(corpus.size());
  auto ranks_of = [&](std::size_t k) -> const RankVector& {
    if (!cache[k]) cache[k] = encode_ranks(model, corpus.sequences[k]);
    return *cache[k];
  };

  Rng rng(seed);
  EvalReport r;
  r.in_class.reserve(static_cast<std::size_t>(n_pairs));
  r.cross_class.reserve(static_cast<std::size_t>(n_pairs));
  for (int p = 0; p < n_pairs; ++p) {
    const std::size_t k = transposable[rng.below(transposable.size())];
    const auto& cls = classes[k];
    std::vector<const ClassMember*> others;
    for (const auto& m : cls) {
      if (m.transposition.semitones != 0) others.push_back(&m);
    }
    const ClassMember& m = *others[rng.below(others.size())];
    r.in_class.push_back(rank_distance(spec, ranks_of(k), encode_ranks(model, m.sequence)));
  }
  for (int p = 0; p < n_pairs; ++p) {
    std::size_t i = 0;
    std::size_t j = 0;
    int attempts = 0;
    do {
      if (++attempts > 10000) throw Error(ErrorCode::CorpusTooSmall, "cannot find two distinct classes");
      i = rng.below(corpus.size());
      j = rng.below(corpus.size());
    } while (i == j || same_class(corpus.sequences[i], corpus.sequences[j]));
    r.cross_class.push_back(rank_distance(spec, ranks_of(i), ranks_of(j)));
  }
  r.median_in = median(r.in_class);
  r.median_cross = median(r.cross_class);
  r.auc = auc_rank_sum(r.in_class, r.cross_class);
  r.histogram = make_histogram(r.in_class, r.cross_class, bins);
  return r;
}

CensusReport distance_value_census(const DistanceSpec& spec, const Corpus& corpus, int pairs, std::uint64_t seed) {
  check_spec(spec);
  const auto& model = model_of(spec);
  if (pairs < 1) throw Error(ErrorCode::Usage, "pairs must be >= 1");
  if (corpus.size() < 2) throw Error(ErrorCode::CorpusTooSmall, "census needs two sequences");
  std::vector<std::optional<RankVector>> cache(corpus.size());
  auto ranks_of = [&](std::size_t k) -> const RankVector& {
    if (!cache[k]) cache[k] = encode_ranks(model, corpus.sequences[k]);
    return *cache[k];
  };
  Rng rng(seed);
  std::set<double> rank_values;
  std::set<int> edit_values;
  for (int p = 0; p < pairs; ++p) {
    std::size_t i = rng.below(corpus.size());
    std::size_t j = rng.below(corpus.size() - 1);
    if (j >= i) ++j;
    rank_values.insert(rank_distance(spec, ranks_of(i), ranks_of(j)));
    edit_values.insert(edit_distance(corpus.sequences[i], corpus.sequences[j]));
  }
  CensusReport c;
  c.pairs = pairs;
  c.length = corpus.length();
  c.rank_distinct = rank_values.size();
  c.edit_distinct = edit_values.size();
  c.ratio = static_cast<double>(c.rank_distinct) / static_cast<double>(c.edit_distinct);
  return c;
}

}  // namespace melodist
