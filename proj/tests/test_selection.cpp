#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <utility>
#include <vector>

#include "comprank/model.hpp"
#include "comprank/selection.hpp"

using namespace comprank;

namespace {

// Hand-rolled connectivity check (union by repeated sweeps), independent of
// the library's union-find.
bool connected_by_sweeps(std::size_t n, const std::vector<IndexPair>& pairs) {
  std::vector<bool> reached(n, false);
  if (n == 0) return false;
  reached[0] = true;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const IndexPair& p : pairs) {
      if (reached[p.i] != reached[p.j]) {
        reached[p.i] = reached[p.j] = true;
        changed = true;
      }
    }
  }
  for (bool r : reached) {
    if (!r) return false;
  }
  return true;
}

std::set<std::pair<std::uint32_t, std::uint32_t>> as_set(const std::vector<IndexPair>& pairs) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> out;
  for (const IndexPair& p : pairs) out.emplace(p.i, p.j);
  return out;
}

}  // namespace

TEST_CASE("full orderings") {
  const auto ordered = select_pairs(3, FullOrdered{});
  CHECK(ordered.size() == 6);
  CHECK(as_set(ordered).size() == 6);

  const auto unordered = select_pairs(3, FullUnordered{});
  CHECK(unordered.size() == 3);
  for (const IndexPair& p : unordered) CHECK(p.i < p.j);
}

TEST_CASE("random K is distinct, in range, and seed-deterministic") {
  const auto pairs = select_pairs(50, RandomK{200, 17});
  CHECK(pairs.size() == 200);
  const auto unique = as_set(pairs);
  CHECK(unique.size() == 200);
  for (const IndexPair& p : pairs) {
    CHECK(p.i != p.j);
    CHECK(p.i < 50);
    CHECK(p.j < 50);
  }
  CHECK(select_pairs(50, RandomK{200, 17}) == pairs);
  CHECK(select_pairs(50, RandomK{200, 18}) != pairs);
}

TEST_CASE("capacity limits") {
  CHECK_THROWS_AS(select_pairs(3, RandomK{7, 0}), Error);
  CHECK_NOTHROW(select_pairs(3, RandomK{6, 0}));
  CHECK_THROWS_AS(select_pairs(5, RoundRobinPlusRandom{4, 0}), Error);  // K < N
  CHECK_THROWS_AS(select_pairs(5, RoundRobinPlusRandom{21, 0}), Error);
  CHECK_THROWS_AS(select_pairs(1, FullOrdered{}), Error);
}

TEST_CASE("round robin plus random covers and connects") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 5 + seed % 11;
    const std::size_t k = n + seed % (n * (n - 1) - n + 1);
    const auto pairs = select_pairs(n, RoundRobinPlusRandom{k, seed});
    CHECK(pairs.size() == k);
    CHECK(as_set(pairs).size() == k);  // no duplicates
    CHECK(connected_by_sweeps(n, pairs));
    std::vector<bool> seen(n, false);
    for (const IndexPair& p : pairs) seen[p.i] = seen[p.j] = true;
    for (bool s : seen) CHECK(s);
  }
}

TEST_CASE("minimal round robin is exactly a covering cycle") {
  const auto pairs = select_pairs(5, RoundRobinPlusRandom{5, 3});
  CHECK(pairs.size() == 5);
  CHECK(connected_by_sweeps(5, pairs));
}

TEST_CASE("subset prefixes nest") {
  const auto full = shuffled_full_order(12, 99);
  CHECK(full.size() == 12 * 11);
  CHECK(subset_prefix(full, 0).empty());
  CHECK(subset_prefix(full, full.size()) == full);

  const auto first10 = subset_prefix(full, 10);
  const auto first20 = subset_prefix(full, 20);
  for (std::size_t k = 0; k < 10; ++k) CHECK(first10[k] == first20[k]);

  CHECK_THROWS_AS(subset_prefix(full, full.size() + 1), Error);
}

TEST_CASE("shuffle is a permutation of the full set") {
  const auto shuffled = shuffled_full_order(9, 4);
  CHECK(as_set(shuffled) == as_set(full_ordered_pairs(9)));
}
