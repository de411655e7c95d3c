#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "comprank/error.hpp"
#include "comprank/rng.hpp"

namespace comprank {

/// Ordered index pair (first presented, second presented).
struct IndexPair {
  std::uint32_t i = 0;
  std::uint32_t j = 0;

  bool operator==(const IndexPair&) const = default;
};

struct FullOrdered {};
struct FullUnordered {};

/// K distinct ordered pairs, uniform without replacement.
struct RandomK {
  std::size_t k = 0;
  std::uint64_t seed = 0;
};

/// A random Hamilton cycle (N pairs, connected, covers every item)
/// followed by K - N uniform random distinct pairs.
struct RoundRobinPlusRandom {
  std::size_t k = 0;
  std::uint64_t seed = 0;
};

using SelectionStrategy = std::variant<FullOrdered, FullUnordered, RandomK, RoundRobinPlusRandom>;

inline std::size_t ordered_pair_capacity(std::size_t n) { return n * (n - 1); }

namespace detail {

inline void require_n(std::size_t n) {
  if (n < 2) {
    throw Error(ErrorKind::Validation, "pair selection needs at least 2 items");
  }
}

}  // namespace detail

/// All N(N-1) ordered pairs in lexicographic order.
inline std::vector<IndexPair> full_ordered_pairs(std::size_t n) {
  detail::require_n(n);
  std::vector<IndexPair> pairs;
  pairs.reserve(ordered_pair_capacity(n));
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      if (i != j) pairs.push_back({i, j});
    }
  }
  return pairs;
}

/// All N(N-1)/2 unordered pairs, emitted as (i, j) with i < j.
inline std::vector<IndexPair> full_unordered_pairs(std::size_t n) {
  detail::require_n(n);
  std::vector<IndexPair> pairs;
  pairs.reserve(ordered_pair_capacity(n) / 2);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      pairs.push_back({i, j});
    }
  }
  return pairs;
}

/// Seeded Fisher-Yates shuffle of the full ordered pair list. Prefixes of
/// this list are uniform without-replacement samples, and prefixes nest
/// across K values for a fixed seed.
inline std::vector<IndexPair> shuffled_full_order(std::size_t n, std::uint64_t seed) {
  std::vector<IndexPair> pairs = full_ordered_pairs(n);
  Xoshiro256pp rng(seed);
  rng.shuffle(pairs);
  return pairs;
}

/// First K pairs of a fixed shuffled order; K=0 yields an empty list.
inline std::vector<IndexPair> subset_prefix(const std::vector<IndexPair>& full_order,
                                            std::size_t k) {
  if (k > full_order.size()) {
    throw Error(ErrorKind::Range, "prefix length " + std::to_string(k) +
                                      " exceeds list size " + std::to_string(full_order.size()));
  }
  return std::vector<IndexPair>(full_order.begin(), full_order.begin() + static_cast<std::ptrdiff_t>(k));
}

inline std::vector<IndexPair> select_pairs(std::size_t n, const SelectionStrategy& strategy) {
  detail::require_n(n);
  const std::size_t capacity = ordered_pair_capacity(n);

  if (std::holds_alternative<FullOrdered>(strategy)) {
    return full_ordered_pairs(n);
  }
  if (std::holds_alternative<FullUnordered>(strategy)) {
    return full_unordered_pairs(n);
  }
  if (const auto* random_k = std::get_if<RandomK>(&strategy)) {
    if (random_k->k > capacity) {
      throw Error(ErrorKind::Capacity, "K = " + std::to_string(random_k->k) +
                                           " exceeds N(N-1) = " + std::to_string(capacity));
    }
    return subset_prefix(shuffled_full_order(n, random_k->seed), random_k->k);
  }
  const auto& rr = std::get<RoundRobinPlusRandom>(strategy);
  if (rr.k < n) {
    throw Error(ErrorKind::Validation,
                "round-robin selection needs K >= N to close the cycle");
  }
  if (rr.k > capacity) {
    throw Error(ErrorKind::Capacity, "K = " + std::to_string(rr.k) +
                                         " exceeds N(N-1) = " + std::to_string(capacity));
  }

  // Hamilton cycle over a seeded permutation: guarantees coverage and a
  // connected comparison graph.
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  Xoshiro256pp cycle_rng(derive_seed(rr.seed, 1));
  cycle_rng.shuffle(perm);

  std::vector<IndexPair> pairs;
  pairs.reserve(rr.k);
  std::unordered_set<std::uint64_t> used;
  used.reserve(rr.k);
  auto key = [n](const IndexPair& p) {
    return static_cast<std::uint64_t>(p.i) * static_cast<std::uint64_t>(n) + p.j;
  };
  for (std::size_t t = 0; t < n; ++t) {
    const IndexPair edge{perm[t], perm[(t + 1) % n]};
    pairs.push_back(edge);
    used.insert(key(edge));
  }

  const std::vector<IndexPair> fill = shuffled_full_order(n, derive_seed(rr.seed, 2));
  for (const IndexPair& candidate : fill) {
    if (pairs.size() == rr.k) break;
    if (used.insert(key(candidate)).second) {
      pairs.push_back(candidate);
    }
  }
  return pairs;
}

}  // namespace comprank
