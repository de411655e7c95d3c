#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "comprank/error.hpp"
#include "comprank/metrics.hpp"
#include "comprank/model.hpp"
#include "comprank/numeric.hpp"
#include "comprank/rng.hpp"
#include "comprank/scoring.hpp"
#include "comprank/selection.hpp"
#include "comprank/targets.hpp"

namespace comprank {

/// Judge emulating a model finetuned on soft targets: returns
/// sigmoid(scaled gap + Gaussian logit noise). With zero noise this is
/// exactly soft_target with the same gamma.
struct SoftCalibrated {
  double gamma_judge = 5.0;
  double logit_noise_sd = 0.0;
};

/// Judge emulating hard finetuning: binary decision, flipped with
/// probability flip_prob; ties answered 0.5 without a flip.
struct HardDecision {
  double flip_prob = 0.0;
};

/// Judge emulating zero-shot mismatch: a constant logit bias on top of the
/// soft model.
struct Miscalibrated {
  double gamma_judge = 5.0;
  double logit_noise_sd = 0.0;
  double logit_bias = 0.0;
};

using JudgeModel = std::variant<SoftCalibrated, HardDecision, Miscalibrated>;

struct StandardNormal {};
struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};
using ScoreDist = std::variant<StandardNormal, Uniform>;

struct TrialConfig {
  std::size_t n = 50;
  ScoreDist true_score_dist = StandardNormal{};
  JudgeModel judge = SoftCalibrated{};
  SelectionStrategy strategy = FullOrdered{};
  ScoringMethod method = ScoringMethod::PoEBT;
  OptimizerConfig optimizer{};
  std::uint64_t seed = 0;
};

namespace detail {

inline void check_judge(const JudgeModel& judge) {
  if (const auto* soft = std::get_if<SoftCalibrated>(&judge)) {
    if (!std::isfinite(soft->gamma_judge) || soft->gamma_judge <= 0.0) {
      throw Error(ErrorKind::Config, "gamma_judge must be finite and > 0");
    }
    if (!std::isfinite(soft->logit_noise_sd) || soft->logit_noise_sd < 0.0) {
      throw Error(ErrorKind::Config, "logit_noise_sd must be finite and >= 0");
    }
  } else if (const auto* hard = std::get_if<HardDecision>(&judge)) {
    if (!std::isfinite(hard->flip_prob) || hard->flip_prob < 0.0 || hard->flip_prob >= 0.5) {
      throw Error(ErrorKind::Config, "flip_prob must lie in [0, 0.5)");
    }
  } else {
    const auto& mis = std::get<Miscalibrated>(judge);
    if (!std::isfinite(mis.gamma_judge) || mis.gamma_judge <= 0.0 ||
        !std::isfinite(mis.logit_noise_sd) || mis.logit_noise_sd < 0.0 ||
        !std::isfinite(mis.logit_bias)) {
      throw Error(ErrorKind::Config, "miscalibrated judge parameters must be finite");
    }
  }
}

}  // namespace detail

inline std::vector<double> sample_true_score_values(std::size_t n, const ScoreDist& dist,
                                                    std::uint64_t seed) {
  if (n < 2) {
    throw Error(ErrorKind::Validation, "need at least 2 items");
  }
  Xoshiro256pp rng(seed);
  std::vector<double> values(n);
  if (std::holds_alternative<StandardNormal>(dist)) {
    for (double& v : values) v = rng.normal();
  } else {
    const auto& uniform = std::get<Uniform>(dist);
    if (!(uniform.lo < uniform.hi)) {
      throw Error(ErrorKind::Config, "uniform distribution needs lo < hi");
    }
    for (double& v : values) v = rng.uniform(uniform.lo, uniform.hi);
  }
  return values;
}

/// Items "item-0001", "item-0002", ... with no texts, used by simulations.
inline ItemSet synthetic_items(std::size_t n) {
  std::vector<Item> items;
  items.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    std::string id = std::to_string(k);
    id.insert(0, k < 10 ? "000" : k < 100 ? "00" : k < 1000 ? "0" : "");
    items.push_back({"item-" + id, "", std::nullopt});
  }
  return ItemSet(std::move(items));
}

inline ScoreVector sample_true_scores(std::size_t n, const ScoreDist& dist, std::uint64_t seed) {
  return ScoreVector(synthetic_items(n), sample_true_score_values(n, dist, seed), Gauge::Raw);
}

/// One simulated judgment for an ordered pair. sigma_s must be the
/// population stddev of true_scores.
inline Comparison simulate_judge(IndexPair pair, std::span<const double> true_scores,
                                 double sigma_s, const JudgeModel& judge, Xoshiro256pp& rng) {
  detail::check_judge(judge);
  const double s_i = true_scores[pair.i];
  const double s_j = true_scores[pair.j];

  double p = 0.5;
  if (const auto* soft = std::get_if<SoftCalibrated>(&judge)) {
    double arg = (s_i - s_j) / (soft->gamma_judge * sigma_s);
    if (soft->logit_noise_sd > 0.0) arg += rng.normal(0.0, soft->logit_noise_sd);
    p = sigmoid(arg);
  } else if (const auto* hard = std::get_if<HardDecision>(&judge)) {
    if (s_i == s_j) {
      p = 0.5;
    } else {
      p = s_i > s_j ? 1.0 : 0.0;
      if (hard->flip_prob > 0.0 && rng.uniform() < hard->flip_prob) p = 1.0 - p;
    }
  } else {
    const auto& mis = std::get<Miscalibrated>(judge);
    double arg = (s_i - s_j) / (mis.gamma_judge * sigma_s) + mis.logit_bias;
    if (mis.logit_noise_sd > 0.0) arg += rng.normal(0.0, mis.logit_noise_sd);
    p = sigmoid(arg);
  }
  return Comparison(pair.i, pair.j, p);
}

/// Simulate judgments for a whole pair list with a fresh judge RNG stream.
inline ComparisonSet simulate_comparisons(std::shared_ptr<const ItemSet> universe,
                                          const std::vector<IndexPair>& pairs,
                                          std::span<const double> true_scores,
                                          const JudgeModel& judge, std::uint64_t judge_seed) {
  const double sigma_s = score_stddev(true_scores);
  Xoshiro256pp rng(judge_seed);
  std::vector<Comparison> comparisons;
  comparisons.reserve(pairs.size());
  for (const IndexPair& pair : pairs) {
    comparisons.push_back(simulate_judge(pair, true_scores, sigma_s, judge, rng));
  }
  return ComparisonSet(std::move(universe), std::move(comparisons));
}

/// Sample true scores, select pairs, judge them, score the comparisons,
/// and evaluate against the true scores. Sub-streams are derived from the
/// trial seed, so a trial is fully reproducible from its config.
inline MetricReport run_trial(const TrialConfig& cfg) {
  detail::check_judge(cfg.judge);
  const std::vector<double> truth =
      sample_true_score_values(cfg.n, cfg.true_score_dist, derive_seed(cfg.seed, 1));
  const auto universe = std::make_shared<const ItemSet>(synthetic_items(cfg.n));
  const std::vector<IndexPair> pairs = select_pairs(cfg.n, cfg.strategy);
  const ComparisonSet comparisons =
      simulate_comparisons(universe, pairs, truth, cfg.judge, derive_seed(cfg.seed, 2));
  const ScoringResult result = score(comparisons, cfg.method, cfg.optimizer);
  MetricReport report = evaluate(result.scores.values(), truth);
  for (const std::string& w : result.warnings) report.warnings.push_back(w);
  return report;
}

}  // namespace comprank
