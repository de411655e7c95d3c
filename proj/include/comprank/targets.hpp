#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "comprank/error.hpp"
#include "comprank/model.hpp"
#include "comprank/numeric.hpp"
#include "comprank/rng.hpp"
#include "comprank/selection.hpp"

namespace comprank {

/// Link function applied to the scaled score gap.
enum class Link { Sigmoid, Probit };

/// Configuration for converting gold-score gaps into soft pairwise
/// probabilities. gamma = 0 selects the hard-decision limit; sigma_s left
/// unset means "compute from the supplied score set".
struct TargetConfig {
  double gamma = 5.0;
  Link link = Link::Sigmoid;
  std::optional<double> sigma_s;  // nullopt = Auto

  void check() const {
    if (!std::isfinite(gamma) || gamma < 0.0) {
      throw Error(ErrorKind::Config, "gamma must be finite and >= 0");
    }
    if (sigma_s && (!std::isfinite(*sigma_s) || *sigma_s <= 0.0)) {
      throw Error(ErrorKind::Config, "sigma_s must be finite and > 0");
    }
  }
};

/// Population standard deviation of a training score set. Zero spread is
/// rejected: it would make the scaled gap undefined.
inline double score_stddev(std::span<const double> scores) {
  if (scores.size() < 2) {
    throw Error(ErrorKind::Validation, "score_stddev needs at least 2 scores");
  }
  require_finite(scores, "scores");
  const double sd = population_stddev(scores);
  if (sd <= 0.0) {
    throw Error(ErrorKind::DegenerateScale, "all scores equal: sigma_s = 0 leaves the scaled gap undefined");
  }
  return sd;
}

/// Soft pairwise probability f((s_i - s_j) / (gamma * sigma_s)); at
/// gamma = 0 the hard limit: 1 / 0 by sign, 0.5 on ties.
inline double soft_target(double s_i, double s_j, const TargetConfig& cfg) {
  cfg.check();
  if (!std::isfinite(s_i) || !std::isfinite(s_j)) {
    throw Error(ErrorKind::Input, "soft_target requires finite scores");
  }
  if (cfg.gamma == 0.0) {
    if (s_i > s_j) return 1.0;
    if (s_i < s_j) return 0.0;
    return 0.5;
  }
  if (!cfg.sigma_s) {
    throw Error(ErrorKind::Config, "soft_target needs an explicit sigma_s (Auto applies only when a score set is supplied)");
  }
  const double arg = (s_i - s_j) / (cfg.gamma * *cfg.sigma_s);
  return cfg.link == Link::Sigmoid ? sigmoid(arg) : norm_cdf(arg);
}

/// Soft binary cross entropy -(y log yhat + (1-y) log(1-yhat)).
/// yhat is clamped to [eps, 1-eps], eps = 1e-12, before the logarithms.
inline double soft_bce(double y, double y_hat) {
  if (!std::isfinite(y) || y < 0.0 || y > 1.0) {
    throw Error(ErrorKind::Range, "label y must lie in [0, 1]");
  }
  constexpr double kEps = 1e-12;
  const double clamped = std::clamp(y_hat, kEps, 1.0 - kEps);
  return -(y * std::log(clamped) + (1.0 - y) * std::log(1.0 - clamped));
}

/// One exported training pair: ids, texts, and the soft label.
struct TrainingPair {
  std::string id_i;
  std::string id_j;
  std::string text_i;
  std::string text_j;
  double target = 0.5;

  bool operator==(const TrainingPair&) const = default;
};

/// Ordered pairs sampled uniformly with replacement (duplicates allowed);
/// the default export pairing.
struct WithReplacement {
  std::size_t count = 0;
};

using TrainingPairing = std::variant<SelectionStrategy, WithReplacement>;

namespace detail {

inline double resolve_sigma(const ItemSet& items, const TargetConfig& cfg) {
  if (cfg.sigma_s) return *cfg.sigma_s;
  std::vector<double> golds;
  golds.reserve(items.size());
  for (const Item& item : items) {
    if (item.gold_score) golds.push_back(*item.gold_score);
  }
  return score_stddev(golds);
}

inline double gold_or_throw(const Item& item) {
  if (!item.gold_score) {
    throw Error(ErrorKind::Validation, "item '" + item.id + "' has no gold score");
  }
  return *item.gold_score;
}

}  // namespace detail

/// Convert gold scores into soft training pairs. Deterministic given the
/// seed; with-replacement sampling uses rng_seed, seeded strategies use
/// their own embedded seed.
inline std::vector<TrainingPair> build_training_pairs(const ItemSet& items, TargetConfig cfg,
                                                      const TrainingPairing& pairing,
                                                      std::uint64_t rng_seed) {
  cfg.check();
  if (items.size() < 2) {
    throw Error(ErrorKind::Validation, "training pairs need at least 2 items");
  }
  if (cfg.gamma > 0.0 && !cfg.sigma_s) {
    cfg.sigma_s = detail::resolve_sigma(items, cfg);
  }

  std::vector<IndexPair> pairs;
  if (const auto* with_replacement = std::get_if<WithReplacement>(&pairing)) {
    const std::size_t n = items.size();
    Xoshiro256pp rng(rng_seed);
    pairs.reserve(with_replacement->count);
    for (std::size_t k = 0; k < with_replacement->count; ++k) {
      const auto i = static_cast<std::uint32_t>(rng.below(n));
      auto j = static_cast<std::uint32_t>(rng.below(n - 1));
      if (j >= i) ++j;
      pairs.push_back({i, j});
    }
  } else {
    pairs = select_pairs(items.size(), std::get<SelectionStrategy>(pairing));
  }

  std::vector<TrainingPair> out;
  out.reserve(pairs.size());
  for (const IndexPair& pair : pairs) {
    const Item& item_i = items[pair.i];
    const Item& item_j = items[pair.j];
    const double s_i = detail::gold_or_throw(item_i);
    const double s_j = detail::gold_or_throw(item_j);
    out.push_back({item_i.id, item_j.id, item_i.text, item_j.text, soft_target(s_i, s_j, cfg)});
  }
  return out;
}

/// Equal-width histogram over [0, 1].
struct Histogram {
  std::vector<std::size_t> counts;

  std::size_t bins() const noexcept { return counts.size(); }

  std::size_t total() const noexcept {
    std::size_t sum = 0;
    for (std::size_t c : counts) sum += c;
    return sum;
  }

  double bin_lo(std::size_t b) const { return static_cast<double>(b) / static_cast<double>(bins()); }
  double bin_hi(std::size_t b) const { return static_cast<double>(b + 1) / static_cast<double>(bins()); }
};

/// Bin soft targets into `bins` equal-width bins over [0, 1]; the value 1.0
/// lands in the last bin.
inline Histogram target_histogram(std::span<const double> targets, std::size_t bins) {
  if (bins < 2) {
    throw Error(ErrorKind::Config, "histogram needs at least 2 bins");
  }
  Histogram hist;
  hist.counts.assign(bins, 0);
  for (double t : targets) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw Error(ErrorKind::Range, "target outside [0, 1]");
    }
    auto b = static_cast<std::size_t>(t * static_cast<double>(bins));
    if (b >= bins) b = bins - 1;
    ++hist.counts[b];
  }
  return hist;
}

}  // namespace comprank
