#pragma once

// Corpus-dependent distances: a rank distance applied to the features a trained
// encoder assigns to two sequences. With an invariant model this is the
// transposition-invariant variant.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "melodist/encoding.hpp"
#include "melodist/neural/model.hpp"
#include "melodist/rankdist.hpp"

namespace melodist {

enum class RankKind { Spearman, TruncatedSpearman, KendallDissimilarity };

struct DistanceSpec {
  RankKind kind = RankKind::Spearman;
  int order = 0;  // truncation order, TruncatedSpearman only
  const ModelParams* model = nullptr;
};

// "spearman", "tspearman:<l>" or "kendall". The model pointer is left null.
DistanceSpec parse_rank(std::string_view text);
std::string to_string(const DistanceSpec& spec);

// Throws BadOrder when the truncation order does not fit the model.
void check_spec(const DistanceSpec& spec);

// Kendall is reported as the dissimilarity 1 - tau.
double rank_distance(const DistanceSpec& spec, const RankVector& a, const RankVector& b);

double corpus_distance(const DistanceSpec& spec, const TokenSequence& a, const TokenSequence& b);

// Candidate encodings computed once and reused across queries.
class EncodedSet {
 public:
  EncodedSet(const ModelParams& model, std::vector<TokenSequence> sequences);

  std::size_t size() const { return sequences_.size(); }
  const TokenSequence& sequence(std::size_t i) const { return sequences_[i]; }
  const FeatureVector& features(std::size_t i) const { return features_[i]; }
  const RankVector& ranks(std::size_t i) const { return ranks_[i]; }
  const ModelParams& model() const { return *model_; }

 private:
  const ModelParams* model_;
  std::vector<TokenSequence> sequences_;
  std::vector<FeatureVector> features_;
  std::vector<RankVector> ranks_;
};

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// The k nearest candidates, ascending by distance then index. With `dedup`,
// a candidate whose tokens equal an earlier-ranked one is skipped.
std::vector<Neighbor> knn(const DistanceSpec& spec, const TokenSequence& query, const EncodedSet& candidates,
                          std::size_t k, bool dedup = false);
std::vector<Neighbor> knn(const DistanceSpec& spec, const TokenSequence& query,
                          const std::vector<TokenSequence>& candidates, std::size_t k, bool dedup = false);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges spanning both samples
  std::vector<int> in_counts;
  std::vector<int> cross_counts;

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

struct EvalReport {
  std::vector<double> in_class;
  std::vector<double> cross_class;
  double median_in = 0.0;
  double median_cross = 0.0;
  double auc = 0.0;  // P(in < cross), ties counted half
  Histogram histogram;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

double median(std::vector<double> values);

// Both compute P(a < b) + P(a == b) / 2 from the same integer numerator, so
// they agree exactly.
double auc_rank_sum(const std::vector<double>& in_class, const std::vector<double>& cross_class);
double auc_pairwise(const std::vector<double>& in_class, const std::vector<double>& cross_class);

Histogram make_histogram(const std::vector<double>& in_class, const std::vector<double>& cross_class, int bins);

// In-class pairs are (s, t.s) with t a non-identity transposition of a random
// corpus sequence; cross-class pairs are two random corpus sequences that are
// not transpositions of each other.
EvalReport invariance_eval(const DistanceSpec& spec, const Corpus& corpus, int n_pairs, std::uint64_t seed,
                           int bins = 30);

struct CensusReport {
  int pairs = 0;
  int length = 0;
  std::size_t rank_distinct = 0;
  std::size_t edit_distinct = 0;
  double ratio = 0.0;  // rank_distinct / edit_distinct

  friend bool operator==(const CensusReport&, const CensusReport&) = default;
};

// Distinct values taken by the rank-based distance and by the edit distance
// over the same random corpus pairs.
CensusReport distance_value_census(const DistanceSpec& spec, const Corpus& corpus, int pairs, std::uint64_t seed);

}  // namespace melodist
