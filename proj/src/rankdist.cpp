#include "melodist/rankdist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "melodist/error.hpp"

namespace melodist {
namespace {

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::LengthMismatch,
                "vectors of length " + std::to_string(a) + " and " + std::to_string(b));
  }
}

double partial_rank_l2(const RankVector& px, const RankVector& py, std::size_t order) {
  double sum = 0.0;
  for (std::size_t i = 0; i < order; ++i) {
    const double d = px.perm[i] - py.perm[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

// Counts inversions of `a` in place by bottom-up merge sort.
std::int64_t count_inversions(std::vector<int>& a) {
  const std::size_t n = a.size();
  std::vector<int> buf(n);
  std::int64_t inversions = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (a[i] <= a[j]) {
          buf[k++] = a[i++];
        } else {
          inversions += static_cast<std::int64_t>(mid - i);
          buf[k++] = a[j++];
        }
      }
      while (i < mid) buf[k++] = a[i++];
      while (j < hi) buf[k++] = a[j++];
    }
    std::swap(a, buf);
  }
  return inversions;
}

double tau_from_counts(const PairCounts& c, std::size_t n) {
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(c.concordant - c.discordant) / pairs;
}

}  // namespace

RankVector rank_vector(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "feature vector has a non-finite entry");
  }
  RankVector r;
  r.perm.resize(x.size());
  std::iota(r.perm.begin(), r.perm.end(), 1);
  std::stable_sort(r.perm.begin(), r.perm.end(),
                   [&](int a, int b) { return x[static_cast<std::size_t>(a - 1)] > x[static_cast<std::size_t>(b - 1)]; });
  return r;
}

double spearman_rho(const RankVector& px, const RankVector& py) {
  require_same_length(px.size(), py.size());
  return partial_rank_l2(px, py, px.size());
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  require_same_length(x.size(), y.size());
  return spearman_rho(rank_vector(x), rank_vector(y));
}

double truncated_spearman(const RankVector& px, const RankVector& py, int order) {
  require_same_length(px.size(), py.size());
  if (order < 1 || static_cast<std::size_t>(order) > px.size()) {
    throw Error(ErrorCode::BadOrder, "truncation order " + std::to_string(order) + " outside [1, " +
                                         std::to_string(px.size()) + "]");
  }
  return partial_rank_l2(px, py, static_cast<std::size_t>(order));
}

double truncated_spearman(std::span<const double> x, std::span<const double> y, int order) {
  require_same_length(x.size(), y.size());
  return truncated_spearman(rank_vector(x), rank_vector(y), order);
}

PairCounts kendall_counts_quadratic(const RankVector& px, const RankVector& py) {
  require_same_length(px.size(), py.size());
  PairCounts c;
  const std::size_t n = px.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool up_x = px.perm[i] < px.perm[j];
      const bool up_y = py.perm[i] < py.perm[j];
      if (up_x == up_y) {
        ++c.concordant;
      } else {
        ++c.discordant;
      }
    }
  }
  return c;
}

PairCounts kendall_counts(const RankVector& px, const RankVector& py) {
  require_same_length(px.size(), py.size());
  const std::size_t n = px.size();
  // Order positions by their value in px; discordant pairs are then the
  // inversions of the corresponding py values.
  std::vector<int> by_x(n);
  for (std::size_t i = 0; i < n; ++i) by_x[static_cast<std::size_t>(px.perm[i] - 1)] = py.perm[i];
  PairCounts c;
  c.discordant = count_inversions(by_x);
  c.concordant = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2 - c.discordant;
  return c;
}

double kendall_tau(const RankVector& px, const RankVector& py) {
  require_same_length(px.size(), py.size());
  if (px.size() < 2) throw Error(ErrorCode::TooShort, "Kendall tau needs N >= 2");
  return tau_from_counts(kendall_counts(px, py), px.size());
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  require_same_length(x.size(), y.size());
  if (x.size() < 2) throw Error(ErrorCode::TooShort, "Kendall tau needs N >= 2");
  return kendall_tau(rank_vector(x), rank_vector(y));
}

int edit_distance(const TokenSequence& a, const TokenSequence& b) {
  std::vector<int> prev(b.size() + 1);
  std::vector<int> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace melodist
