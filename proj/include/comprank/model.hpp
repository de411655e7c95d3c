#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "comprank/error.hpp"

namespace comprank {

/// One candidate text, with an optional gold attribute score
/// (e.g. mean response time in seconds, or a difficulty rating).
struct Item {
  std::string id;
  std::string text;
  std::optional<double> gold_score;

  bool operator==(const Item&) const = default;
};

/// Ordered, immutable collection of items. Iteration order is insertion
/// order; that order also defines the dense index used by the optimizer.
class ItemSet {
 public:
  ItemSet() = default;

  explicit ItemSet(std::vector<Item> items) : items_(std::move(items)) {
    index_.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) {
      const Item& item = items_[i];
      if (item.id.empty()) {
        throw Error(ErrorKind::Validation, "item at position " + std::to_string(i) + " has an empty id");
      }
      if (item.gold_score && !std::isfinite(*item.gold_score)) {
        throw Error(ErrorKind::Validation, "item '" + item.id + "' has a non-finite gold score");
      }
      if (!index_.emplace(item.id, i).second) {
        throw Error(ErrorKind::Validation, "duplicate item id '" + item.id + "'");
      }
    }
  }

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }

  const Item& operator[](std::size_t i) const { return items_[i]; }
  const std::vector<Item>& items() const noexcept { return items_; }

  auto begin() const noexcept { return items_.begin(); }
  auto end() const noexcept { return items_.end(); }

  std::optional<std::size_t> index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool all_have_gold() const {
    for (const Item& item : items_) {
      if (!item.gold_score) return false;
    }
    return true;
  }

  /// Gold scores in item order; requires every item to carry one.
  std::vector<double> gold_scores() const {
    std::vector<double> out;
    out.reserve(items_.size());
    for (const Item& item : items_) {
      if (!item.gold_score) {
        throw Error(ErrorKind::Validation, "item '" + item.id + "' has no gold score");
      }
      out.push_back(*item.gold_score);
    }
    return out;
  }

  bool operator==(const ItemSet& other) const { return items_ == other.items_; }

 private:
  std::vector<Item> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// One judged pair: the item presented first, the item presented second,
/// and the judged probability that the first beats the second. Indices are
/// dense positions in the universe ItemSet. Construction enforces the
/// invariants in every code path.
class Comparison {
 public:
  Comparison(std::size_t first, std::size_t second, double prob)
      : first_(first), second_(second), prob_(prob) {
    if (first == second) {
      throw Error(ErrorKind::Validation, "self-pair: item compared against itself");
    }
    if (!std::isfinite(prob) || prob < 0.0 || prob > 1.0) {
      throw Error(ErrorKind::Range, "comparison probability must lie in [0, 1]");
    }
  }

  std::size_t first() const noexcept { return first_; }
  std::size_t second() const noexcept { return second_; }
  double prob() const noexcept { return prob_; }

  bool operator==(const Comparison&) const = default;

 private:
  std::size_t first_;
  std::size_t second_;
  double prob_;
};

/// A set of comparisons over a shared item universe. Duplicate ordered
/// pairs are retained; repeated judgments all count.
class ComparisonSet {
 public:
  ComparisonSet(std::shared_ptr<const ItemSet> universe, std::vector<Comparison> comparisons)
      : universe_(std::move(universe)), comparisons_(std::move(comparisons)) {
    if (!universe_) {
      throw Error(ErrorKind::Validation, "comparison set requires a universe");
    }
    for (const Comparison& c : comparisons_) {
      if (c.first() >= universe_->size() || c.second() >= universe_->size()) {
        throw Error(ErrorKind::Validation, "comparison references an index outside the universe");
      }
    }
  }

  ComparisonSet(ItemSet universe, std::vector<Comparison> comparisons)
      : ComparisonSet(std::make_shared<const ItemSet>(std::move(universe)), std::move(comparisons)) {}

  const ItemSet& universe() const noexcept { return *universe_; }
  std::shared_ptr<const ItemSet> universe_ptr() const noexcept { return universe_; }
  const std::vector<Comparison>& comparisons() const noexcept { return comparisons_; }
  std::size_t size() const noexcept { return comparisons_.size(); }
  bool empty() const noexcept { return comparisons_.empty(); }

 private:
  std::shared_ptr<const ItemSet> universe_;
  std::vector<Comparison> comparisons_;
};

enum class Gauge { MeanZero, Raw };

/// Scores over the item universe, keyed by id and aligned with the
/// universe's dense index order.
class ScoreVector {
 public:
  ScoreVector(const ItemSet& universe, std::vector<double> values, Gauge gauge)
      : values_(std::move(values)), gauge_(gauge) {
    if (values_.size() != universe.size()) {
      throw Error(ErrorKind::Validation, "score vector size does not match the universe");
    }
    ids_.reserve(universe.size());
    for (const Item& item : universe) ids_.push_back(item.id);
    build_index();
    check_gauge();
  }

  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  Gauge gauge() const noexcept { return gauge_; }

  double operator[](std::size_t i) const { return values_[i]; }

  double at(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) {
      throw Error(ErrorKind::Validation, "unknown item id '" + std::string(id) + "'");
    }
    return values_[it->second];
  }

  double mean() const {
    double sum = 0.0;
    for (double v : values_) sum += v;
    return values_.empty() ? 0.0 : sum / static_cast<double>(values_.size());
  }

  ScoreVector to_mean_zero() const {
    ScoreVector out = *this;
    const double mu = out.mean();
    for (double& v : out.values_) v -= mu;
    out.gauge_ = Gauge::MeanZero;
    out.check_gauge();
    return out;
  }

  bool operator==(const ScoreVector& other) const {
    return ids_ == other.ids_ && values_ == other.values_ && gauge_ == other.gauge_;
  }

 private:
  void build_index() {
    index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);
  }

  void check_gauge() const {
    if (gauge_ == Gauge::MeanZero && !values_.empty() && std::fabs(mean()) > 1e-9) {
      throw Error(ErrorKind::Validation, "mean-zero score vector has nonzero mean");
    }
  }

  std::vector<std::string> ids_;
  std::vector<double> values_;
  Gauge gauge_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Coverage / connectivity / duplication report for a comparison set.
struct ValidationReport {
  std::size_t item_count = 0;
  std::size_t covered_count = 0;
  std::vector<std::string> uncovered_ids;
  bool connected = false;
  std::size_t component_count = 0;
  std::size_t duplicate_ordered_pairs = 0;  // sum over ordered pairs of (multiplicity - 1)

  bool operator==(const ValidationReport&) const = default;
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Pure reporting; never mutates or rejects the input.
inline ValidationReport validate(const ComparisonSet& set) {
  const ItemSet& universe = set.universe();
  const std::size_t n = universe.size();

  ValidationReport report;
  report.item_count = n;

  std::vector<bool> covered(n, false);
  detail::UnionFind components(n);
  std::unordered_map<std::uint64_t, std::size_t> pair_counts;
  pair_counts.reserve(set.size());

  for (const Comparison& c : set.comparisons()) {
    covered[c.first()] = true;
    covered[c.second()] = true;
    components.unite(c.first(), c.second());
    const std::uint64_t key =
        static_cast<std::uint64_t>(c.first()) * static_cast<std::uint64_t>(n) +
        static_cast<std::uint64_t>(c.second());
    const std::size_t count = ++pair_counts[key];
    if (count > 1) ++report.duplicate_ordered_pairs;
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (covered[i]) {
      ++report.covered_count;
    } else {
      report.uncovered_ids.push_back(universe[i].id);
    }
  }

  std::vector<bool> seen_root(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = components.find(i);
    if (!seen_root[root]) {
      seen_root[root] = true;
      ++report.component_count;
    }
  }
  report.connected = !set.empty() && report.component_count == 1;
  return report;
}

}  // namespace comprank
