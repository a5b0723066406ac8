#pragma once

// Largest subsets of {1, ..., N} containing no (k, eps)-AP.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "apavoid/ap_detect.hpp"
#include "apavoid/bounds.hpp"
#include "apavoid/parallel.hpp"

namespace apavoid {

struct ExtremalResult {
  long n = 0;
  int k = 0;
  Rational epsilon;
  int cardinality = 0;
  std::vector<long> witness;
  bool exact = false;
  std::uint64_t nodes_explored = 0;
};

struct ExtremalOptions {
  long exact_limit = 64;
  unsigned threads = 1;
};

enum class GreedyStrategy { left_to_right, randomized };

namespace detail {

inline void validate_extremal(long n, int k, const Rational& eps) {
  if (n < 1) throw domain_error("N must be at least 1");
  validate_search(k, eps);
}

/// Progression tests for subsets of {1..n}. Whether (a, b, c) is a (3, eps)-AP
/// depends only on the gaps (b - a, c - b), so those verdicts are tabulated once.
/// Consecutive triples of a (k, eps)-AP are (3, eps)-APs, which prunes longer tuples;
/// complete candidates for k >= 4 are confirmed exactly.
class IntegerProgressionTable {
 public:
  IntegerProgressionTable(long n, int k, const Rational& eps)
      : width_(static_cast<std::size_t>(std::max(n, 1L))), k_(k), eps_(eps), triple_(width_ * width_, 0) {
    for (std::size_t d1 = 1; d1 < width_; ++d1)
      for (std::size_t d2 = 1; d2 < width_; ++d2) {
        const Rational t[3] = {Rational(0), Rational(static_cast<long>(d1)), Rational(static_cast<long>(d1 + d2))};
        triple_[d1 * width_ + d2] = minimax_distortion(t).epsilon_star <= eps ? 1 : 0;
      }
  }

  bool triple(long d1, long d2) const {
    return triple_[static_cast<std::size_t>(d1) * width_ + static_cast<std::size_t>(d2)] != 0;
  }

  /// Whether `members` (sorted, all below x) together with x contain a (k, eps)-AP ending at x.
  bool completes(std::span<const long> members, long x) const {
    if (members.size() + 1 < static_cast<std::size_t>(k_)) return false;
    std::vector<long> tail(static_cast<std::size_t>(k_));
    tail[static_cast<std::size_t>(k_ - 1)] = x;
    for (std::size_t i = members.size(); i-- > 0;) {
      tail[static_cast<std::size_t>(k_ - 2)] = members[i];
      if (extend_down(members, i, k_ - 3, tail)) return true;
    }
    return false;
  }

 private:
  // Fills position `pos` with a member below index `limit`.
  bool extend_down(std::span<const long> members, std::size_t limit, int pos, std::vector<long>& tail) const {
    if (pos < 0) return k_ == 3 || confirm(tail);
    const auto p = static_cast<std::size_t>(pos);
    if (limit < p) return false;
    const long next = tail[p + 1];
    const long after = tail[p + 2] - next;
    for (std::size_t i = limit; i-- > 0;) {
      // For a fixed outer gap the admissible inner gaps form an interval around it.
      if (!triple(next - members[i], after)) {
        if (next - members[i] > after) break;
        continue;
      }
      tail[p] = members[i];
      if (extend_down(members, i, pos - 1, tail)) return true;
    }
    return false;
  }

  bool confirm(const std::vector<long>& tail) const {
    std::vector<Rational> b;
    b.reserve(tail.size());
    for (long v : tail) b.emplace_back(v);
    return minimax_distortion(b).epsilon_star <= eps_;
  }

  std::size_t width_;
  int k_;
  Rational eps_;
  std::vector<std::uint8_t> triple_;
};

// Decision search: lexicographically smallest progression-free subset of {1..n}
// of size `target` that contains 1 (and n, when `need_last`), restricted to a fixed
// second element. Pruning uses the already-known optimum r(m) for m < n: the tail
// {x..n} is a translate of {1..n-x+1}, so it holds at most r(n-x+1) members.
class DecisionSearch {
 public:
  DecisionSearch(long n, const IntegerProgressionTable& progressions, int target, bool need_last,
                 std::span<const int> table)
      : n_(n), progressions_(progressions), target_(target), need_last_(need_last), table_(table) {}

  std::optional<std::vector<long>> run(long second) {
    nodes_ = 1;
    chosen_.assign({1});
    if (target_ <= 1) return need_last_ && n_ != 1 ? std::nullopt : std::optional(chosen_);
    if (2 + tail_bound(second + 1) < target_) return std::nullopt;
    if (need_last_ && target_ == 2 && second != n_) return std::nullopt;
    if (progressions_.completes(chosen_, second)) return std::nullopt;
    chosen_.push_back(second);
    if (descend(second + 1)) return chosen_;
    return std::nullopt;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  int tail_bound(long x) const {
    const long remaining = n_ - x + 1;
    if (remaining <= 0) return 0;
    return table_[static_cast<std::size_t>(remaining)];
  }

  bool descend(long x) {
    ++nodes_;
    const int size = static_cast<int>(chosen_.size());
    if (size == target_) return !need_last_ || chosen_.back() == n_;
    if (x > n_ || size + tail_bound(x) < target_) return false;

    const bool would_finish = size + 1 == target_;
    if (!(need_last_ && would_finish && x != n_) && !progressions_.completes(chosen_, x)) {
      chosen_.push_back(x);
      if (descend(x + 1)) return true;
      chosen_.pop_back();
    }
    if (need_last_ && x == n_) return false;
    return descend(x + 1);
  }

  long n_;
  const IntegerProgressionTable& progressions_;
  int target_;
  bool need_last_;
  std::span<const int> table_;
  std::vector<long> chosen_;
  std::uint64_t nodes_ = 0;
};

struct DecisionOutcome {
  std::optional<std::vector<long>> witness;
  std::uint64_t nodes = 0;
};

inline DecisionOutcome decide(long n, const IntegerProgressionTable& progressions, int target, bool need_last,
                              std::span<const int> table, unsigned threads) {
  // Subtree i fixes the second member to i + 2.
  const std::size_t subtrees = n >= 2 ? static_cast<std::size_t>(n - 1) : 1;
  std::vector<std::optional<std::vector<long>>> found(subtrees);
  std::vector<std::uint64_t> nodes(subtrees, 0);
  const auto first = parallel_first(subtrees, threads, [&](std::size_t i) {
    DecisionSearch s(n, progressions, target, need_last, table);
    found[i] = s.run(static_cast<long>(i) + 2);
    nodes[i] = s.nodes();
    return found[i].has_value();
  });
  DecisionOutcome out;
  const std::size_t last = first ? *first : subtrees - 1;
  for (std::size_t i = 0; i <= last; ++i) out.nodes += nodes[i];
  if (first) out.witness = found[*first];
  return out;
}

}  // namespace detail

/// r_k(eps, N) by exact branch and bound, with the lexicographically smallest
/// witness of maximum size. Solves N' = k..N in turn: r(N') is r(N'-1) or
/// r(N'-1) + 1, and a set realising the larger value must contain both 1 and N'.
inline ExtremalResult exact_rk(long n, int k, const Rational& eps, ExtremalOptions options = {}) {
  detail::validate_extremal(n, k, eps);
  if (n > options.exact_limit)
    throw resource_error("N = " + std::to_string(n) + " exceeds the exact-search limit " +
                         std::to_string(options.exact_limit) + "; use greedy_rk for a lower bound");
  const unsigned threads = resolve_threads(options.threads);

  const detail::IntegerProgressionTable progressions(n, k, eps);
  std::vector<int> table(static_cast<std::size_t>(n) + 1, 0);
  std::vector<long> witness;
  std::uint64_t nodes = 0;
  for (long m = 1; m <= n; ++m) {
    if (m < k) {
      table[static_cast<std::size_t>(m)] = static_cast<int>(m);
      witness.push_back(m);
      continue;
    }
    const int previous = table[static_cast<std::size_t>(m - 1)];
    auto grown = detail::decide(m, progressions, previous + 1, true, table, threads);
    nodes += grown.nodes;
    if (grown.witness) {
      table[static_cast<std::size_t>(m)] = previous + 1;
      witness = std::move(*grown.witness);
      continue;
    }
    table[static_cast<std::size_t>(m)] = previous;
    auto same = detail::decide(m, progressions, previous, false, table, threads);
    nodes += same.nodes;
    witness = std::move(*same.witness);
  }
  return {n, k, eps, table[static_cast<std::size_t>(n)], std::move(witness), true, nodes};
}

/// Maximal-by-inclusion progression-free subset built by a single greedy pass.
inline ExtremalResult greedy_rk(long n, int k, const Rational& eps, GreedyStrategy strategy,
                                std::uint64_t seed = 0) {
  detail::validate_extremal(n, k, eps);
  std::vector<long> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 1L);
  if (strategy == GreedyStrategy::randomized) {
    // Fisher-Yates with explicit index draws so the permutation is library independent.
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  }

  std::vector<Rational> members;
  std::uint64_t checks = 0;
  for (long x : order) {
    ++checks;
    const auto pos = std::lower_bound(members.begin(), members.end(), Rational(x));
    const auto at = static_cast<std::size_t>(pos - members.begin());
    members.insert(pos, Rational(x));
    if (members.size() >= static_cast<std::size_t>(k) && find_almost_ap_through(members, at, k, eps))
      members.erase(members.begin() + static_cast<long>(at));
  }
  std::vector<long> witness;
  for (const auto& r : members) witness.push_back(numerator(r).convert_to<long>());
  return {n, k, eps, static_cast<int>(witness.size()), std::move(witness), false, checks};
}

struct ScalingRow {
  long n = 0;
  int r = 0;
  bool exact = false;
  double log_ratio = 0;
  Real thm1_upper;
  std::optional<Real> thm3_lower;
};

/// log r_k(eps, N) / log N for each N >= 2, exact where the search limit allows.
inline std::vector<ScalingRow> rk_scaling_table(int k, const Rational& eps, std::span<const long> ns,
                                                ExtremalOptions options = {}) {
  if (eps <= 0 || eps >= Rational(1, 2)) throw domain_error("epsilon must lie in (0, 1/2)");
  for (std::size_t i = 1; i < ns.size(); ++i)
    if (ns[i] <= ns[i - 1]) throw domain_error("N list must be increasing");
  const Real upper = thm1_upper_bound(k, eps).value;
  std::optional<Real> lower;
  if (eps < Rational(k - 2, 4)) lower = thm3_lower_bound(k, eps).value;

  std::vector<ScalingRow> rows;
  for (long n : ns) {
    if (n < 2) continue;
    const ExtremalResult res = n <= options.exact_limit ? exact_rk(n, k, eps, options)
                                                        : greedy_rk(n, k, eps, GreedyStrategy::left_to_right);
    rows.push_back({n, res.cardinality, res.exact,
                    std::log(static_cast<double>(res.cardinality)) / std::log(static_cast<double>(n)), upper, lower});
  }
  return rows;
}

}  // namespace apavoid
