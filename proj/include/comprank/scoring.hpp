#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "comprank/calibrate.hpp"
#include "comprank/error.hpp"
#include "comprank/model.hpp"
#include "comprank/numeric.hpp"
#include "comprank/rng.hpp"

namespace comprank {

enum class ScoringMethod { WinRatio, AvgProb, BTHard, PoEBT, PoETM };

inline std::string_view scoring_method_name(ScoringMethod method) {
  switch (method) {
    case ScoringMethod::WinRatio: return "win-ratio";
    case ScoringMethod::AvgProb: return "avg-prob";
    case ScoringMethod::BTHard: return "bt";
    case ScoringMethod::PoEBT: return "poe-bt";
    case ScoringMethod::PoETM: return "poe-tm";
  }
  throw Error(ErrorKind::Config, "unknown scoring method");
}

struct Zeros {};
struct Seeded {
  std::uint64_t seed = 0;
};
using InitScheme = std::variant<Zeros, Seeded>;

struct OptimizerConfig {
  std::size_t max_iters = 2000;
  double grad_tol = 1e-8;          // infinity norm of the gradient
  double l2_lambda = 0.01;         // quadratic penalty weight
  InitScheme init = Zeros{};

  void check() const {
    if (max_iters == 0) throw Error(ErrorKind::Config, "max_iters must be positive");
    if (!std::isfinite(grad_tol) || grad_tol <= 0.0) {
      throw Error(ErrorKind::Config, "grad_tol must be finite and > 0");
    }
    if (!std::isfinite(l2_lambda) || l2_lambda < 0.0) {
      throw Error(ErrorKind::Config, "l2_lambda must be finite and >= 0");
    }
  }
};

/// Objective value and its gradient over the dense score vector.
struct ObjectiveEval {
  double value = 0.0;
  std::vector<double> grad;
};

/// Scores plus solver diagnostics.
struct ScoringResult {
  ScoreVector scores;
  std::size_t iterations = 0;
  bool converged = true;
  std::vector<std::string> warnings;
};

namespace detail {

/// Bradley-Terry expert: P(i beats j) = sigmoid(s_i - s_j).
struct BtExpert {
  static constexpr const char* name = "poe-bt";
  static double loglik(double d, double p) {
    return p * log_sigmoid(d) + (1.0 - p) * log_sigmoid(-d);
  }
  static double dloglik(double d, double p) { return p - sigmoid(d); }
};

/// Thurstone-Mosteller expert: P(i beats j) = Phi(s_i - s_j).
struct TmExpert {
  static constexpr const char* name = "poe-tm";
  static double loglik(double d, double p) {
    return p * log_norm_cdf(d) + (1.0 - p) * log_norm_cdf(-d);
  }
  static double dloglik(double d, double p) {
    return p * norm_pdf_cdf_ratio(d) - (1.0 - p) * norm_pdf_cdf_ratio(-d);
  }
};

template <class Expert>
double poe_value(const ComparisonSet& set, std::span<const double> s, double l2_lambda) {
  double value = 0.0;
  for (const Comparison& c : set.comparisons()) {
    value += Expert::loglik(s[c.first()] - s[c.second()], c.prob());
  }
  for (double si : s) value -= 0.5 * l2_lambda * si * si;
  return value;
}

template <class Expert>
ObjectiveEval poe_value_grad(const ComparisonSet& set, std::span<const double> s,
                             double l2_lambda) {
  if (s.size() != set.universe().size()) {
    throw Error(ErrorKind::Validation, "score vector size does not match the universe");
  }
  require_finite(s, "scores");
  ObjectiveEval out;
  out.grad.assign(s.size(), 0.0);
  double value = 0.0;
  for (const Comparison& c : set.comparisons()) {
    const double d = s[c.first()] - s[c.second()];
    value += Expert::loglik(d, c.prob());
    const double g = Expert::dloglik(d, c.prob());
    out.grad[c.first()] += g;
    out.grad[c.second()] -= g;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    value -= 0.5 * l2_lambda * s[i] * s[i];
    out.grad[i] -= l2_lambda * s[i];
  }
  out.value = value;
  return out;
}

inline double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

/// Component labels of the undirected comparison graph.
inline std::vector<std::size_t> component_roots(const ComparisonSet& set) {
  UnionFind uf(set.universe().size());
  for (const Comparison& c : set.comparisons()) uf.unite(c.first(), c.second());
  std::vector<std::size_t> roots(set.universe().size());
  for (std::size_t i = 0; i < roots.size(); ++i) roots[i] = uf.find(i);
  return roots;
}

/// Subtract each component's mean. The translation mode of every component
/// is exactly quadratic with curvature l2_lambda (flat at lambda = 0), its
/// optimum is mean zero, and gradients have zero component sums; centering
/// the start point therefore removes the one ill-conditioned direction
/// without changing the optimum.
inline void center_per_component(std::vector<double>& x, std::span<const std::size_t> roots) {
  std::vector<double> sums(x.size(), 0.0);
  std::vector<std::size_t> counts(x.size(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    sums[roots[i]] += x[i];
    ++counts[roots[i]];
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] -= sums[roots[i]] / static_cast<double>(counts[roots[i]]);
  }
}

template <class Expert>
ScoringResult poe_solve(const ComparisonSet& set, const OptimizerConfig& cfg) {
  cfg.check();
  if (set.empty()) {
    throw Error(ErrorKind::Validation, "cannot score an empty comparison set");
  }
  const std::size_t n = set.universe().size();

  std::vector<double> x(n, 0.0);
  if (const auto* seeded = std::get_if<Seeded>(&cfg.init)) {
    Xoshiro256pp rng(seeded->seed);
    for (double& xi : x) xi = rng.uniform(-1.0, 1.0);
  }
  center_per_component(x, component_roots(set));

  ObjectiveEval eval = poe_value_grad<Expert>(set, x, cfg.l2_lambda);
  double step = 1.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool stalled = false;
  std::vector<double> candidate(n);

  for (; iterations < cfg.max_iters; ++iterations) {
    if (inf_norm(eval.grad) <= cfg.grad_tol) {
      converged = true;
      break;
    }
    double grad_sq = 0.0;
    for (double g : eval.grad) grad_sq += g * g;

    // Backtracking line search along the gradient (Armijo, with a small
    // absolute slack so rounding noise near the optimum cannot stall it).
    double t = std::min(step * 2.0, 1e6);
    const double slack = std::fabs(eval.value) * 1e-15;
    bool accepted = false;
    for (int halvings = 0; halvings < 80; ++halvings) {
      for (std::size_t i = 0; i < n; ++i) candidate[i] = x[i] + t * eval.grad[i];
      const double f_new = poe_value<Expert>(set, candidate, cfg.l2_lambda);
      if (std::isfinite(f_new) && f_new >= eval.value + 1e-4 * t * grad_sq - slack) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      stalled = true;
      break;
    }
    x.swap(candidate);
    step = t;
    eval = poe_value_grad<Expert>(set, x, cfg.l2_lambda);
  }
  if (!converged && inf_norm(eval.grad) <= cfg.grad_tol) converged = true;

  ScoringResult result{
      ScoreVector(set.universe(), std::move(x), Gauge::Raw).to_mean_zero(),
      iterations, converged, {}};
  if (!converged) {
    result.warnings.push_back(stalled
                                  ? "line search stalled before reaching the gradient tolerance"
                                  : "did not converge within " + std::to_string(cfg.max_iters) +
                                        " iterations");
  }
  if (cfg.l2_lambda == 0.0) {
    const auto& values = result.scores.values();
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*hi - *lo > 15.0) {
      result.warnings.push_back(
          "score spread exceeds 15 with no regularization: likely divergence "
          "(perfect separation)");
    }
  }
  return result;
}

inline void require_nonempty(const ComparisonSet& set) {
  if (set.empty()) {
    throw Error(ErrorKind::Validation, "cannot score an empty comparison set");
  }
}

inline void warn_uncovered(ScoringResult& result, std::span<const std::size_t> appearances) {
  std::size_t uncovered = 0;
  for (std::size_t a : appearances) {
    if (a == 0) ++uncovered;
  }
  if (uncovered > 0) {
    result.warnings.push_back(std::to_string(uncovered) +
                              " item(s) appear in no comparison and were scored 0");
  }
}

}  // namespace detail

/// Log of the PoE-BT product (normalizers dropped; they are constant in s)
/// minus the L2 penalty, with its exact analytic gradient.
inline ObjectiveEval poe_bt_loglik_grad(const ComparisonSet& set, std::span<const double> s,
                                        double l2_lambda) {
  return detail::poe_value_grad<detail::BtExpert>(set, s, l2_lambda);
}

inline ObjectiveEval poe_bt_loglik_grad(const ComparisonSet& set, const ScoreVector& s,
                                        double l2_lambda) {
  return poe_bt_loglik_grad(set, s.values(), l2_lambda);
}

/// Thurstone-Mosteller analogue: sigmoid replaced by the normal CDF.
inline ObjectiveEval poe_tm_loglik_grad(const ComparisonSet& set, std::span<const double> s,
                                        double l2_lambda) {
  return detail::poe_value_grad<detail::TmExpert>(set, s, l2_lambda);
}

inline ObjectiveEval poe_tm_loglik_grad(const ComparisonSet& set, const ScoreVector& s,
                                        double l2_lambda) {
  return poe_tm_loglik_grad(set, s.values(), l2_lambda);
}

/// Fraction of an item's comparisons it wins; p > 0.5 counts as a win for
/// the first item, a tie at exactly 0.5 as half a win for each side.
inline ScoringResult win_ratio(const ComparisonSet& set) {
  detail::require_nonempty(set);
  const std::size_t n = set.universe().size();
  std::vector<double> wins(n, 0.0);
  std::vector<std::size_t> appearances(n, 0);
  for (const Comparison& c : set.comparisons()) {
    ++appearances[c.first()];
    ++appearances[c.second()];
    if (c.prob() > 0.5) {
      wins[c.first()] += 1.0;
    } else if (c.prob() < 0.5) {
      wins[c.second()] += 1.0;
    } else {
      wins[c.first()] += 0.5;
      wins[c.second()] += 0.5;
    }
  }
  std::vector<double> values(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (appearances[i] > 0) values[i] = wins[i] / static_cast<double>(appearances[i]);
  }
  ScoringResult result{ScoreVector(set.universe(), std::move(values), Gauge::Raw), 0, true, {}};
  detail::warn_uncovered(result, appearances);
  return result;
}

/// Mean judged win probability of an item across its comparisons
/// (p when it was presented first, 1 - p when second).
inline ScoringResult avg_prob(const ComparisonSet& set) {
  detail::require_nonempty(set);
  const std::size_t n = set.universe().size();
  std::vector<double> sums(n, 0.0);
  std::vector<std::size_t> appearances(n, 0);
  for (const Comparison& c : set.comparisons()) {
    ++appearances[c.first()];
    ++appearances[c.second()];
    sums[c.first()] += c.prob();
    sums[c.second()] += 1.0 - c.prob();
  }
  std::vector<double> values(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (appearances[i] > 0) values[i] = sums[i] / static_cast<double>(appearances[i]);
  }
  ScoringResult result{ScoreVector(set.universe(), std::move(values), Gauge::Raw), 0, true, {}};
  detail::warn_uncovered(result, appearances);
  return result;
}

/// Maximize the PoE-BT objective by gradient ascent with backtracking line
/// search; the result is gauge-fixed to mean zero.
inline ScoringResult poe_bt_score(const ComparisonSet& set, const OptimizerConfig& cfg = {}) {
  return detail::poe_solve<detail::BtExpert>(set, cfg);
}

/// Same solver as poe_bt_score restricted to binary outcomes (classical BT
/// maximum likelihood with the same L2 penalty); bit-identical to
/// poe_bt_score on any input it accepts.
inline ScoringResult bt_hard_score(const ComparisonSet& set, const OptimizerConfig& cfg = {}) {
  for (const Comparison& c : set.comparisons()) {
    if (c.prob() != 0.0 && c.prob() != 1.0) {
      throw Error(ErrorKind::MethodMismatch,
                  "bt expects hard outcomes p in {0, 1}; use poe-bt for soft probabilities");
    }
  }
  return poe_bt_score(set, cfg);
}

/// PoE with Thurstone-Mosteller experts.
inline ScoringResult poe_tm_score(const ComparisonSet& set, const OptimizerConfig& cfg = {}) {
  return detail::poe_solve<detail::TmExpert>(set, cfg);
}

inline ScoringResult score(const ComparisonSet& set, ScoringMethod method,
                           const OptimizerConfig& cfg = {}) {
  switch (method) {
    case ScoringMethod::WinRatio: return win_ratio(set);
    case ScoringMethod::AvgProb: return avg_prob(set);
    case ScoringMethod::BTHard: return bt_hard_score(set, cfg);
    case ScoringMethod::PoEBT: return poe_bt_score(set, cfg);
    case ScoringMethod::PoETM: return poe_tm_score(set, cfg);
  }
  throw Error(ErrorKind::Config, "unknown scoring method");
}

inline ScoringMethod parse_scoring_method(std::string_view name) {
  if (name == "win-ratio") return ScoringMethod::WinRatio;
  if (name == "avg-prob") return ScoringMethod::AvgProb;
  if (name == "bt") return ScoringMethod::BTHard;
  if (name == "poe-bt") return ScoringMethod::PoEBT;
  if (name == "poe-tm") return ScoringMethod::PoETM;
  throw Error(ErrorKind::Config, "unknown scoring method '" + std::string(name) + "'");
}

}  // namespace comprank
