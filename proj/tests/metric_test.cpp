#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "melodist/error.hpp"
#include "melodist/metric.hpp"
#include "melodist/neural/model.hpp"
#include "melodist/report.hpp"
#include "melodist/rng.hpp"

namespace melodist {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::Usage;
}

class MetricTest : public ::testing::Test {
 protected:
  MetricTest() : corpus(generate_synthetic_corpus(4, 60, 8)) {
    Architecture arch;
    arch.mode = Mode::Invariant;
    arch.hidden = 12;
    arch.features = 10;
    arch.label_dim = 4;
    arch.length = 8;
    model = make_model(arch, corpus.vocabulary, corpus.voice_range);
    initialize(model, 5);
  }

  DistanceSpec spec(std::string_view text) const {
    auto s = parse_rank(text);
    s.model = &model;
    return s;
  }

  Corpus corpus;
  ModelParams model;
};

TEST(ParseRank, Forms) {
  EXPECT_EQ(parse_rank("spearman").kind, RankKind::Spearman);
  EXPECT_EQ(parse_rank("kendall").kind, RankKind::KendallDissimilarity);
  const auto t = parse_rank("tspearman:5");
  EXPECT_EQ(t.kind, RankKind::TruncatedSpearman);
  EXPECT_EQ(t.order, 5);
  EXPECT_EQ(to_string(t), "tspearman:5");
  EXPECT_EQ(code_of([] { parse_rank("pearson"); }), ErrorCode::Usage);
  EXPECT_EQ(code_of([] { parse_rank("tspearman:x"); }), ErrorCode::Usage);
  EXPECT_EQ(code_of([] { parse_rank("tspearman:0"); }), ErrorCode::BadOrder);
}

TEST_F(MetricTest, SpecChecks) {
  EXPECT_EQ(code_of([&] { check_spec(parse_rank("spearman")); }), ErrorCode::ContractViolation);
  EXPECT_EQ(code_of([&] { check_spec(spec("tspearman:11")); }), ErrorCode::BadOrder);
  check_spec(spec("tspearman:10"));
}

TEST_F(MetricTest, DistanceBasics) {
  for (auto text : {"spearman", "tspearman:4", "kendall"}) {
    const auto d = spec(text);
    for (std::size_t i = 0; i + 1 < corpus.size(); i += 7) {
      const auto& a = corpus.sequences[i];
      const auto& b = corpus.sequences[i + 1];
      EXPECT_EQ(corpus_distance(d, a, a), 0.0) << text;
      EXPECT_EQ(corpus_distance(d, a, b), corpus_distance(d, b, a)) << text;
      EXPECT_GE(corpus_distance(d, a, b), 0.0) << text;
    }
  }
}

TEST_F(MetricTest, CorpusDistanceIsRankDistanceOfEncodings) {
  const auto& a = corpus.sequences[3];
  const auto& b = corpus.sequences[9];
  const auto ra = rank_vector(encode(model, a));
  const auto rb = rank_vector(encode(model, b));
  EXPECT_EQ(corpus_distance(spec("spearman"), a, b), spearman_rho(ra, rb));
  EXPECT_EQ(corpus_distance(spec("tspearman:3"), a, b), truncated_spearman(ra, rb, 3));
  EXPECT_EQ(corpus_distance(spec("kendall"), a, b), 1.0 - kendall_tau(ra, rb));
}

TEST_F(MetricTest, KnnIsSortedAndMatchesBruteForce) {
  const auto d = spec("spearman");
  const auto& query = corpus.sequences[0];
  const auto result = knn(d, query, corpus.sequences, 10);
  ASSERT_EQ(result.size(), 10u);
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < corpus.size(); ++i) all.push_back({i, corpus_distance(d, query, corpus.sequences[i])});
  std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.distance < y.distance; });
  EXPECT_TRUE(std::equal(result.begin(), result.end(), all.begin()));
  EXPECT_EQ(result.front().index, 0u);
  EXPECT_EQ(result.front().distance, 0.0);
}

TEST_F(MetricTest, KnnTruncatesAndBreaksTiesByIndex) {
  const auto d = spec("kendall");
  std::vector<TokenSequence> cands(5, corpus.sequences[2]);
  const auto r = knn(d, corpus.sequences[7], cands, 50);
  ASSERT_EQ(r.size(), 5u);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i].index, i);
  const auto dedup = knn(d, corpus.sequences[7], cands, 50, true);
  ASSERT_EQ(dedup.size(), 1u);
  EXPECT_EQ(dedup[0].index, 0u);
  EXPECT_EQ(code_of([&] { knn(d, corpus.sequences[7], cands, 0); }), ErrorCode::Usage);
}

TEST_F(MetricTest, CachedCandidatesGiveIdenticalResults) {
  const EncodedSet set(model, corpus.sequences);
  for (auto text : {"spearman", "tspearman:2", "kendall"}) {
    const auto d = spec(text);
    for (std::size_t q : {1u, 17u, 42u}) {
      EXPECT_EQ(knn(d, corpus.sequences[q], set, 8), knn(d, corpus.sequences[q], corpus.sequences, 8));
    }
  }
  ModelParams other = model;
  other.weights[0] += 1.0;
  auto d = spec("spearman");
  d.model = &other;
  EXPECT_EQ(code_of([&] { knn(d, corpus.sequences[0], set, 3); }), ErrorCode::ContractViolation);
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
}

TEST(Auc, LimitingCases) {
  EXPECT_EQ(auc_rank_sum({0.1, 0.2}, {0.3, 0.4, 0.5}), 1.0);
  EXPECT_EQ(auc_rank_sum({0.6, 0.7}, {0.3, 0.4, 0.5}), 0.0);
  EXPECT_EQ(auc_rank_sum({0.5, 0.5}, {0.5, 0.5, 0.5}), 0.5);
  EXPECT_EQ(auc_pairwise({0.5, 0.5}, {0.5, 0.5, 0.5}), 0.5);
  // One tie out of four pairs, three wins.
  EXPECT_EQ(auc_pairwise({0.1, 0.3}, {0.3, 0.4}), 0.875);
}

TEST(Auc, RankSumAgreesWithPairwiseExactly) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(1 + rng.below(40));
    std::vector<double> b(1 + rng.below(40));
    // Coarse grid so ties are common.
    for (auto& x : a) x = static_cast<double>(rng.below(12)) / 4.0;
    for (auto& x : b) x = static_cast<double>(rng.below(12)) / 4.0 + 0.5;
    EXPECT_EQ(auc_rank_sum(a, b), auc_pairwise(a, b));
  }
}

TEST(Histogram, CountsCoverSamples) {
  const auto h = make_histogram({0.0, 0.5, 1.0}, {0.25, 2.0}, 4);
  ASSERT_EQ(h.edges.size(), 5u);
  EXPECT_EQ(h.edges.front(), 0.0);
  EXPECT_EQ(h.edges.back(), 2.0);
  int in = 0;
  int cross = 0;
  for (int c : h.in_counts) in += c;
  for (int c : h.cross_counts) cross += c;
  EXPECT_EQ(in, 3);
  EXPECT_EQ(cross, 2);
  EXPECT_EQ(h.cross_counts.back(), 1);
}

TEST_F(MetricTest, InvarianceEvalIsSeededAndSized) {
  const auto d = spec("spearman");
  const auto a = invariance_eval(d, corpus, 40, 3);
  const auto b = invariance_eval(d, corpus, 40, 3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.in_class.size(), 40u);
  EXPECT_EQ(a.cross_class.size(), 40u);
  EXPECT_EQ(a.auc, auc_pairwise(a.in_class, a.cross_class));
  EXPECT_EQ(a.median_in, median(a.in_class));
  EXPECT_NE(invariance_eval(d, corpus, 40, 4).in_class, a.in_class);
}

TEST_F(MetricTest, InvarianceEvalRejectsTinyCorpus) {
  Corpus one = make_corpus({corpus.sequences[0]}, {"only"});
  EXPECT_EQ(code_of([&] { invariance_eval(spec("spearman"), one, 10, 1); }), ErrorCode::CorpusTooSmall);
}

TEST_F(MetricTest, CensusIsBoundedAndSeeded) {
  const auto d = spec("spearman");
  const auto c = distance_value_census(d, corpus, 300, 2);
  EXPECT_EQ(c, distance_value_census(d, corpus, 300, 2));
  EXPECT_EQ(c.length, 8);
  EXPECT_LE(c.edit_distinct, 9u);
  EXPECT_GT(c.rank_distinct, c.edit_distinct);
  EXPECT_DOUBLE_EQ(c.ratio, static_cast<double>(c.rank_distinct) / static_cast<double>(c.edit_distinct));
}

TEST_F(MetricTest, ReportArtifacts) {
  const auto d = spec("kendall");
  const auto r = invariance_eval(d, corpus, 12, 9);
  const auto csv = distances_csv(r);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "pair_kind,distance");
  int in = 0;
  int cross = 0;
  while (std::getline(lines, line)) {
    if (line.rfind("in_class,", 0) == 0) ++in;
    if (line.rfind("cross_class,", 0) == 0) ++cross;
  }
  EXPECT_EQ(in, 12);
  EXPECT_EQ(cross, 12);
  const auto j = summary_json(r, d);
  EXPECT_EQ(j.at("rank"), "kendall");
  EXPECT_EQ(j.at("auc").get<double>(), r.auc);
  EXPECT_EQ(j.at("in_counts").size(), 30u);
  EXPECT_NE(histogram_svg(r, "t").find("<svg"), std::string::npos);
}

}  // namespace
}  // namespace melodist
