#pragma once

// Rank-based distances between feature vectors, and the token-level
// Levenshtein baseline.

#include <cstdint>
#include <span>
#include <vector>

#include "melodist/encoding.hpp"

namespace melodist {

using FeatureVector = std::vector<double>;

// perm[i] is the 1-based index of the (i+1)-th largest entry. Ties are broken
// by ascending index, so the permutation is unique.
struct RankVector {
  std::vector<int> perm;

  std::size_t size() const { return perm.size(); }
  friend bool operator==(const RankVector&, const RankVector&) = default;
};

RankVector rank_vector(std::span<const double> x);

double spearman_rho(std::span<const double> x, std::span<const double> y);
double spearman_rho(const RankVector& px, const RankVector& py);

// Spearman distance restricted to the first `order` rank positions, 1 <= order <= N.
double truncated_spearman(std::span<const double> x, std::span<const double> y, int order);
double truncated_spearman(const RankVector& px, const RankVector& py, int order);

struct PairCounts {
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;

  friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

// Concordant/discordant position pairs between two rank vectors.
PairCounts kendall_counts_quadratic(const RankVector& px, const RankVector& py);
PairCounts kendall_counts(const RankVector& px, const RankVector& py);  // O(N log N)

double kendall_tau(std::span<const double> x, std::span<const double> y);
double kendall_tau(const RankVector& px, const RankVector& py);

int edit_distance(const TokenSequence& a, const TokenSequence& b);

}  // namespace melodist
