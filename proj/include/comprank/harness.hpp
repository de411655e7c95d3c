#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "comprank/error.hpp"
#include "comprank/io.hpp"
#include "comprank/judge_client.hpp"
#include "comprank/metrics.hpp"
#include "comprank/model.hpp"
#include "comprank/rng.hpp"
#include "comprank/scoring.hpp"
#include "comprank/selection.hpp"
#include "comprank/simulate.hpp"
#include "comprank/targets.hpp"
#include "comprank/version.hpp"

namespace comprank::harness {

struct GlobalOptions {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::filesystem::path out_dir = "out";
  std::string format = "csv";
  std::vector<std::string> argv;  // recorded in manifests when invoked via the CLI

  void check() const {
    if (format != "csv") {
      throw Error(ErrorKind::Config, "unsupported output format '" + format + "'");
    }
    if (jobs < 1) {
      throw Error(ErrorKind::Config, "--jobs must be >= 1");
    }
  }
};

/// Deterministic double formatting for CSV cells.
inline std::string fmt_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return buffer;
}

inline std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

/// Every command records what it ran and what it wrote. Re-running a
/// non-network command with the recorded argv reproduces the outputs
/// byte-identically.
inline void write_manifest(const GlobalOptions& global, const std::string& command,
                           nlohmann::ordered_json config, std::vector<std::uint64_t> seeds,
                           std::vector<std::string> outputs) {
  nlohmann::ordered_json manifest;
  manifest["command"] = command;
  manifest["tool"] = std::string(kToolName) + " " + std::string(kVersion);
  manifest["timestamp"] = utc_timestamp();
  manifest["argv"] = global.argv;
  manifest["config"] = std::move(config);
  manifest["seeds"] = std::move(seeds);
  manifest["outputs"] = std::move(outputs);
  std::ofstream out = detail::open_output(global.out_dir / (command + "_manifest.json"));
  out << manifest.dump(2) << '\n';
}

/// Run fn(0..count-1) on up to `jobs` threads; results must be written to
/// pre-sized slots so the output order does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreOptions {
  std::filesystem::path items_path;
  std::filesystem::path comparisons_path;
  ScoringMethod method = ScoringMethod::PoEBT;
  OptimizerConfig optimizer{};
};

inline void save_scores(const ScoringResult& result, ScoringMethod method, double l2_lambda,
                        const std::filesystem::path& path) {
  std::ofstream out = detail::open_output(path);
  nlohmann::ordered_json header;
  header["method"] = scoring_method_name(method);
  header["lambda"] = l2_lambda;
  header["iterations"] = result.iterations;
  header["converged"] = result.converged;
  out << header.dump() << '\n';
  const auto& ids = result.scores.ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    nlohmann::ordered_json record;
    record["id"] = ids[i];
    record["score"] = result.scores[i];
    out << record.dump() << '\n';
  }
}

inline int cmd_score(const ScoreOptions& opts, const GlobalOptions& global) {
  global.check();
  const auto universe = std::make_shared<const ItemSet>(load_items(opts.items_path));
  const ComparisonSet comparisons = load_comparisons(opts.comparisons_path, universe);

  const ValidationReport report = validate(comparisons);
  if (!report.connected) {
    std::cerr << "warning: comparison graph is disconnected (" << report.component_count
              << " components); scores are gauge-fixed globally, relative offsets between "
                 "components are not identified by the data\n";
  }
  if (!report.uncovered_ids.empty()) {
    std::cerr << "warning: " << report.uncovered_ids.size()
              << " item(s) appear in no comparison\n";
  }

  const ScoringResult result = score(comparisons, opts.method, opts.optimizer);
  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << '\n';

  const std::filesystem::path scores_path = global.out_dir / "scores.jsonl";
  save_scores(result, opts.method, opts.optimizer.l2_lambda, scores_path);

  // Metrics over the items that carry gold scores.
  std::vector<double> pred;
  std::vector<double> gold;
  for (std::size_t i = 0; i < universe->size(); ++i) {
    if ((*universe)[i].gold_score) {
      pred.push_back(result.scores[i]);
      gold.push_back(*(*universe)[i].gold_score);
    }
  }
  nlohmann::ordered_json metrics_json;
  const std::filesystem::path metrics_path = global.out_dir / "metrics.json";
  if (pred.size() >= 2) {
    const MetricReport metrics = evaluate(pred, gold);
    metrics_json["available"] = true;
    metrics_json["n"] = metrics.n;
    metrics_json["spearman"] = metrics.spearman;
    metrics_json["pearson"] = metrics.pearson;
    metrics_json["spearman_pct"] = 100.0 * metrics.spearman;
    metrics_json["pearson_pct"] = 100.0 * metrics.pearson;
    metrics_json["rmse_scaled"] = metrics.rmse_scaled;
    metrics_json["calib_a"] = metrics.calib_a;
    metrics_json["calib_b"] = metrics.calib_b;
    metrics_json["warnings"] = metrics.warnings;
    std::cout << "scored " << universe->size() << " items with "
              << scoring_method_name(opts.method) << ": spearman=" << fmt_double(metrics.spearman)
              << " pearson=" << fmt_double(metrics.pearson)
              << " rmse_scaled=" << fmt_double(metrics.rmse_scaled) << '\n';
  } else {
    metrics_json["available"] = false;
    std::cout << "scored " << universe->size() << " items with "
              << scoring_method_name(opts.method) << "; metrics unavailable (no gold scores)\n";
  }
  {
    std::ofstream out = detail::open_output(metrics_path);
    out << metrics_json.dump(2) << '\n';
  }

  nlohmann::ordered_json config;
  config["items"] = opts.items_path.string();
  config["comparisons"] = opts.comparisons_path.string();
  config["method"] = scoring_method_name(opts.method);
  config["max_iters"] = opts.optimizer.max_iters;
  config["grad_tol"] = opts.optimizer.grad_tol;
  config["lambda"] = opts.optimizer.l2_lambda;
  write_manifest(global, "score", std::move(config), {},
                 {scores_path.string(), metrics_path.string()});
  return 0;
}

// ---------------------------------------------------------------------------
// curve
// ---------------------------------------------------------------------------

struct CurveOptions {
  std::size_t n = 50;
  ScoreDist dist = StandardNormal{};
  JudgeModel judge = SoftCalibrated{5.0, 0.0};
  std::vector<std::string> k_grid = {"1N", "2N", "4N", "full"};
  std::size_t num_seeds = 10;
  std::vector<ScoringMethod> methods = {ScoringMethod::PoEBT};
  OptimizerConfig optimizer{};
};

/// Grid tokens: "full", "<m>N" (multiples of N), or a plain integer.
inline std::vector<std::size_t> parse_k_grid(const std::vector<std::string>& tokens,
                                             std::size_t n) {
  const std::size_t capacity = ordered_pair_capacity(n);
  std::vector<std::size_t> ks;
  for (const std::string& token : tokens) {
    std::size_t k = 0;
    try {
      if (token == "full") {
        k = capacity;
      } else if (!token.empty() && (token.back() == 'N' || token.back() == 'n')) {
        k = static_cast<std::size_t>(std::stoull(token.substr(0, token.size() - 1))) * n;
      } else {
        k = static_cast<std::size_t>(std::stoull(token));
      }
    } catch (const std::exception&) {
      throw Error(ErrorKind::Config, "cannot parse K token '" + token + "'");
    }
    if (k < 1 || k > capacity) {
      throw Error(ErrorKind::Capacity, "K token '" + token + "' resolves to " +
                                           std::to_string(k) + ", outside [1, " +
                                           std::to_string(capacity) + "]");
    }
    ks.push_back(k);
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.empty()) {
    throw Error(ErrorKind::Config, "empty K grid");
  }
  return ks;
}

inline std::string judge_description(const JudgeModel& judge) {
  if (const auto* soft = std::get_if<SoftCalibrated>(&judge)) {
    return "soft(gamma=" + fmt_double(soft->gamma_judge) +
           ",noise=" + fmt_double(soft->logit_noise_sd) + ")";
  }
  if (const auto* hard = std::get_if<HardDecision>(&judge)) {
    return "hard(flip=" + fmt_double(hard->flip_prob) + ")";
  }
  const auto& mis = std::get<Miscalibrated>(judge);
  return "miscalibrated(gamma=" + fmt_double(mis.gamma_judge) +
         ",noise=" + fmt_double(mis.logit_noise_sd) + ",bias=" + fmt_double(mis.logit_bias) + ")";
}

struct CurveCell {
  std::string method;
  std::size_t k = 0;
  std::size_t seed_index = 0;
  MetricReport metrics;
};

/// One row per (method, K, seed) with nested-prefix subsets per seed:
/// judgments are simulated once over a seeded shuffle of the full ordered
/// pair list, and each K takes the first K of them.
inline std::vector<CurveCell> run_curve(const CurveOptions& opts, const GlobalOptions& global) {
  detail::check_judge(opts.judge);
  const std::vector<std::size_t> ks = parse_k_grid(opts.k_grid, opts.n);
  const auto universe = std::make_shared<const ItemSet>(synthetic_items(opts.n));

  std::vector<std::vector<CurveCell>> per_seed(opts.num_seeds);
  parallel_for(opts.num_seeds, global.jobs, [&](std::size_t seed_index) {
    const std::uint64_t trial_seed = derive_seed(global.seed, seed_index);
    const std::vector<double> truth =
        sample_true_score_values(opts.n, opts.dist, derive_seed(trial_seed, 1));
    const std::vector<IndexPair> full_order =
        shuffled_full_order(opts.n, derive_seed(trial_seed, 11));
    const ComparisonSet judged =
        simulate_comparisons(universe, full_order, truth, opts.judge, derive_seed(trial_seed, 13));

    std::vector<CurveCell>& cells = per_seed[seed_index];
    for (const std::size_t k : ks) {
      const ComparisonSet subset(
          universe, std::vector<Comparison>(judged.comparisons().begin(),
                                            judged.comparisons().begin() +
                                                static_cast<std::ptrdiff_t>(k)));
      for (const ScoringMethod method : opts.methods) {
        const ScoringResult result = score(subset, method, opts.optimizer);
        cells.push_back({std::string(scoring_method_name(method)), k, seed_index,
                         evaluate(result.scores.values(), truth)});
      }
    }
  });

  std::vector<CurveCell> cells;
  for (auto& group : per_seed) {
    for (auto& cell : group) cells.push_back(std::move(cell));
  }
  return cells;
}

inline void write_curve_csv(const std::vector<CurveCell>& cells,
                            const std::filesystem::path& path) {
  // Deterministic row order: method, then K, then seed, then the mean row.
  std::map<std::string, std::map<std::size_t, std::vector<const CurveCell*>>> grouped;
  for (const CurveCell& cell : cells) grouped[cell.method][cell.k].push_back(&cell);

  std::ofstream out = detail::open_output(path);
  out << "method,K,seed,spearman,pearson,rmse_scaled,spearman_pct,pearson_pct\n";
  for (auto& [method, by_k] : grouped) {
    for (auto& [k, group] : by_k) {
      std::sort(group.begin(), group.end(), [](const CurveCell* a, const CurveCell* b) {
        return a->seed_index < b->seed_index;
      });
      double sum_s = 0.0, sum_p = 0.0, sum_r = 0.0;
      for (const CurveCell* cell : group) {
        out << method << ',' << k << ',' << cell->seed_index << ','
            << fmt_double(cell->metrics.spearman) << ',' << fmt_double(cell->metrics.pearson)
            << ',' << fmt_double(cell->metrics.rmse_scaled) << ','
            << fmt_double(100.0 * cell->metrics.spearman) << ','
            << fmt_double(100.0 * cell->metrics.pearson) << '\n';
        sum_s += cell->metrics.spearman;
        sum_p += cell->metrics.pearson;
        sum_r += cell->metrics.rmse_scaled;
      }
      const auto count = static_cast<double>(group.size());
      out << method << ',' << k << ",mean," << fmt_double(sum_s / count) << ','
          << fmt_double(sum_p / count) << ',' << fmt_double(sum_r / count) << ','
          << fmt_double(100.0 * sum_s / count) << ',' << fmt_double(100.0 * sum_p / count)
          << '\n';
    }
  }
}

inline int cmd_curve(const CurveOptions& opts, const GlobalOptions& global) {
  global.check();
  const std::vector<CurveCell> cells = run_curve(opts, global);
  const std::filesystem::path csv_path = global.out_dir / "curve.csv";
  write_curve_csv(cells, csv_path);

  std::vector<std::uint64_t> seeds;
  for (std::size_t t = 0; t < opts.num_seeds; ++t) seeds.push_back(derive_seed(global.seed, t));

  nlohmann::ordered_json config;
  config["n"] = opts.n;
  config["judge"] = judge_description(opts.judge);
  config["k_grid"] = opts.k_grid;
  config["num_seeds"] = opts.num_seeds;
  {
    std::vector<std::string> names;
    for (ScoringMethod m : opts.methods) names.emplace_back(scoring_method_name(m));
    config["methods"] = names;
  }
  config["lambda"] = opts.optimizer.l2_lambda;
  write_manifest(global, "curve", std::move(config), std::move(seeds), {csv_path.string()});
  std::cout << "curve written to " << csv_path.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// gamma-sweep
// ---------------------------------------------------------------------------

struct GammaSweepOptions {
  std::optional<std::filesystem::path> items_path;  // else simulate
  std::size_t simulate_n = 200;
  std::vector<double> gammas = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
  std::size_t bins = 20;
  Link link = Link::Sigmoid;
};

inline std::vector<double> gamma_sweep_scores(const GammaSweepOptions& opts,
                                              const GlobalOptions& global) {
  if (opts.items_path) {
    const ItemSet items = load_items(*opts.items_path);
    std::vector<double> scores;
    for (const Item& item : items) {
      if (item.gold_score) scores.push_back(*item.gold_score);
    }
    if (scores.size() < 2) {
      throw Error(ErrorKind::Validation, "gamma sweep needs at least 2 gold scores");
    }
    return scores;
  }
  return sample_true_score_values(opts.simulate_n, StandardNormal{}, derive_seed(global.seed, 1));
}

inline int cmd_gamma_sweep(const GammaSweepOptions& opts, const GlobalOptions& global) {
  global.check();
  const std::vector<double> scores = gamma_sweep_scores(opts, global);
  const double sigma_s = score_stddev(scores);

  const std::filesystem::path csv_path = global.out_dir / "gamma_sweep.csv";
  std::ofstream out = detail::open_output(csv_path);
  out << "gamma,bin,lo,hi,count,fraction\n";
  for (const double gamma : opts.gammas) {
    TargetConfig cfg{gamma, opts.link, sigma_s};
    std::vector<double> targets;
    targets.reserve(scores.size() * (scores.size() - 1));
    for (std::size_t i = 0; i < scores.size(); ++i) {
      for (std::size_t j = 0; j < scores.size(); ++j) {
        if (i != j) targets.push_back(soft_target(scores[i], scores[j], cfg));
      }
    }
    const Histogram hist = target_histogram(targets, opts.bins);
    const auto total = static_cast<double>(hist.total());
    for (std::size_t b = 0; b < hist.bins(); ++b) {
      out << fmt_double(gamma) << ',' << b << ',' << fmt_double(hist.bin_lo(b)) << ','
          << fmt_double(hist.bin_hi(b)) << ',' << hist.counts[b] << ','
          << fmt_double(static_cast<double>(hist.counts[b]) / total) << '\n';
    }
  }
  out.close();

  nlohmann::ordered_json config;
  config["source"] = opts.items_path ? opts.items_path->string()
                                     : "simulated standard normal n=" + std::to_string(opts.simulate_n);
  config["gammas"] = opts.gammas;
  config["bins"] = opts.bins;
  config["link"] = opts.link == Link::Sigmoid ? "sigmoid" : "probit";
  write_manifest(global, "gamma-sweep", std::move(config), {}, {csv_path.string()});
  std::cout << "gamma sweep written to " << csv_path.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// bt-tm-compare
// ---------------------------------------------------------------------------

struct BtTmOptions {
  std::optional<std::filesystem::path> items_path;
  std::optional<std::filesystem::path> comparisons_path;
  std::size_t simulate_n = 50;
  double simulate_gamma = 1.0;  // scaled-gap spread of the simulated probabilities
  OptimizerConfig optimizer{};
};

struct BtTmReport {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
  std::size_t n = 0;
};

inline BtTmReport bt_tm_compare(const ComparisonSet& comparisons, const OptimizerConfig& cfg) {
  const ScoringResult bt = poe_bt_score(comparisons, cfg);
  const ScoringResult tm = poe_tm_score(comparisons, cfg);
  const LinearFit fit = linear_calibrate(tm.scores.values(), bt.scores.values());
  BtTmReport report;
  report.slope = fit.a;
  report.intercept = fit.b;
  report.r = pearson(bt.scores.values(), tm.scores.values());
  report.n = bt.scores.size();
  return report;
}

inline int cmd_bt_tm_compare(const BtTmOptions& opts, const GlobalOptions& global) {
  global.check();
  std::optional<ComparisonSet> comparisons;
  nlohmann::ordered_json config;
  if (opts.items_path && opts.comparisons_path) {
    auto universe = std::make_shared<const ItemSet>(load_items(*opts.items_path));
    comparisons = load_comparisons(*opts.comparisons_path, universe);
    config["items"] = opts.items_path->string();
    config["comparisons"] = opts.comparisons_path->string();
  } else if (!opts.items_path && !opts.comparisons_path) {
    const std::uint64_t trial_seed = derive_seed(global.seed, 0);
    const std::vector<double> truth =
        sample_true_score_values(opts.simulate_n, StandardNormal{}, derive_seed(trial_seed, 1));
    const auto universe = std::make_shared<const ItemSet>(synthetic_items(opts.simulate_n));
    comparisons = simulate_comparisons(universe, full_ordered_pairs(opts.simulate_n), truth,
                                       SoftCalibrated{opts.simulate_gamma, 0.0},
                                       derive_seed(trial_seed, 2));
    config["simulate_n"] = opts.simulate_n;
    config["simulate_gamma"] = opts.simulate_gamma;
  } else {
    throw Error(ErrorKind::Config, "give both --items and --comparisons, or neither");
  }

  const ValidationReport report = validate(*comparisons);
  if (!report.connected) {
    std::cerr << "warning: comparison graph is disconnected; the BT~TM regression mixes "
                 "components with unidentified relative offsets\n";
  }

  const BtTmReport result = bt_tm_compare(*comparisons, opts.optimizer);
  const std::filesystem::path json_path = global.out_dir / "bt_tm_compare.json";
  {
    nlohmann::ordered_json out_json;
    out_json["slope"] = result.slope;
    out_json["intercept"] = result.intercept;
    out_json["r"] = result.r;
    out_json["n"] = result.n;
    std::ofstream out = detail::open_output(json_path);
    out << out_json.dump(2) << '\n';
  }
  std::cout << "poe-bt vs poe-tm over " << result.n << " items: slope=" << fmt_double(result.slope)
            << " intercept=" << fmt_double(result.intercept) << " r=" << fmt_double(result.r)
            << '\n';

  config["lambda"] = opts.optimizer.l2_lambda;
  write_manifest(global, "bt-tm-compare", std::move(config), {derive_seed(global.seed, 0)},
                 {json_path.string()});
  return 0;
}

// ---------------------------------------------------------------------------
// export-targets
// ---------------------------------------------------------------------------

enum class PairingMode { RandomWithReplacement, RandomDistinct, FullOrdered, FullUnordered };

inline PairingMode parse_pairing_mode(std::string_view name) {
  if (name == "replace") return PairingMode::RandomWithReplacement;
  if (name == "random") return PairingMode::RandomDistinct;
  if (name == "full-ordered") return PairingMode::FullOrdered;
  if (name == "full-unordered") return PairingMode::FullUnordered;
  throw Error(ErrorKind::Config, "unknown pairing mode '" + std::string(name) + "'");
}

struct ExportTargetsOptions {
  std::filesystem::path items_path;
  TargetConfig target{};  // gamma defaults to 5.0
  PairingMode pairing = PairingMode::RandomWithReplacement;
  std::size_t count = 50000;
};

inline int cmd_export_targets(const ExportTargetsOptions& opts, const GlobalOptions& global) {
  global.check();
  const ItemSet items = load_items(opts.items_path);

  TrainingPairing pairing = WithReplacement{opts.count};
  switch (opts.pairing) {
    case PairingMode::RandomWithReplacement: pairing = WithReplacement{opts.count}; break;
    case PairingMode::RandomDistinct:
      pairing = SelectionStrategy{RandomK{opts.count, derive_seed(global.seed, 1)}};
      break;
    case PairingMode::FullOrdered: pairing = SelectionStrategy{FullOrdered{}}; break;
    case PairingMode::FullUnordered: pairing = SelectionStrategy{FullUnordered{}}; break;
  }

  const std::vector<TrainingPair> pairs =
      build_training_pairs(items, opts.target, pairing, derive_seed(global.seed, 2));

  const std::filesystem::path targets_path = global.out_dir / "targets.jsonl";
  {
    std::ofstream out = detail::open_output(targets_path);
    for (const TrainingPair& pair : pairs) {
      nlohmann::ordered_json record;
      record["id_i"] = pair.id_i;
      record["id_j"] = pair.id_j;
      record["text_i"] = pair.text_i;
      record["text_j"] = pair.text_j;
      record["target"] = pair.target;
      out << record.dump() << '\n';
    }
  }

  // Target distribution summary on stdout.
  std::vector<double> targets;
  targets.reserve(pairs.size());
  for (const TrainingPair& pair : pairs) targets.push_back(pair.target);
  const Histogram hist = target_histogram(targets, 10);
  std::cout << pairs.size() << " training pairs written to " << targets_path.string() << '\n';
  for (std::size_t b = 0; b < hist.bins(); ++b) {
    std::cout << "  [" << fmt_double(hist.bin_lo(b)) << ", " << fmt_double(hist.bin_hi(b))
              << (b + 1 == hist.bins() ? "]" : ")") << "  " << hist.counts[b] << '\n';
  }

  nlohmann::ordered_json config;
  config["items"] = opts.items_path.string();
  config["gamma"] = opts.target.gamma;
  config["link"] = opts.target.link == Link::Sigmoid ? "sigmoid" : "probit";
  if (opts.target.sigma_s) {
    config["sigma_s"] = *opts.target.sigma_s;
  } else {
    config["sigma_s"] = "auto";
  }
  config["pairing"] = opts.pairing == PairingMode::RandomWithReplacement ? "replace"
                      : opts.pairing == PairingMode::RandomDistinct      ? "random"
                      : opts.pairing == PairingMode::FullOrdered         ? "full-ordered"
                                                                         : "full-unordered";
  config["count"] = opts.count;
  write_manifest(global, "export-targets", std::move(config), {derive_seed(global.seed, 2)},
                 {targets_path.string()});
  return 0;
}

// ---------------------------------------------------------------------------
// judge
// ---------------------------------------------------------------------------

struct JudgeCmdOptions {
  std::filesystem::path items_path;
  JudgeEndpointConfig endpoint;
  SelectionStrategy strategy = FullOrdered{};
  std::filesystem::path cache_path;  // defaults to <out-dir>/judge_cache.jsonl
};

/// Pair-list export: one record per line with the item ids of each
/// selected ordered pair.
inline void save_pairs(const std::vector<IndexPair>& pairs, const ItemSet& universe,
                       const std::filesystem::path& path) {
  std::ofstream out = detail::open_output(path);
  for (const IndexPair& pair : pairs) {
    nlohmann::ordered_json record;
    record["i"] = universe[pair.i].id;
    record["j"] = universe[pair.j].id;
    out << record.dump() << '\n';
  }
}

namespace detail_judge {

struct CacheRecord {
  double p = 0.5;
  int retries = 0;
  bool flagged = false;
};

inline std::string cache_key(const std::string& model, std::uint64_t prompt_hash,
                             const std::string& id_i, const std::string& id_j) {
  char hash_hex[20];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(prompt_hash));
  return model + "\x1f" + hash_hex + "\x1f" + id_i + "\x1f" + id_j;
}

/// Tolerant load: unparsable lines (e.g. a torn final line from an
/// interrupted run) are skipped; later records win on identical keys.
inline std::unordered_map<std::string, CacheRecord> load_cache(
    const std::filesystem::path& path) {
  std::unordered_map<std::string, CacheRecord> cache;
  std::ifstream in(path);
  if (!in) return cache;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::is_blank(line)) continue;
    const nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("key") ||
        !record.contains("p")) {
      continue;
    }
    CacheRecord entry;
    entry.p = record["p"].get<double>();
    entry.retries = record.value("retries", 0);
    entry.flagged = record.value("flagged", false);
    cache[record["key"].get<std::string>()] = entry;
  }
  return cache;
}

}  // namespace detail_judge

/// Judge every selected pair through the endpoint, reusing cached results
/// (zero network calls for cached pairs), appending each fresh response to
/// the cache immediately so partial progress survives interruption.
inline int cmd_judge(const JudgeCmdOptions& opts, const GlobalOptions& global,
                     std::optional<JudgeClient::Transport> transport = std::nullopt) {
  global.check();
  const ItemSet items = load_items(opts.items_path);
  const std::vector<IndexPair> pairs = select_pairs(items.size(), opts.strategy);

  const JudgeClient client =
      transport ? JudgeClient(opts.endpoint, *transport) : JudgeClient(opts.endpoint);

  const std::filesystem::path cache_path =
      opts.cache_path.empty() ? global.out_dir / "judge_cache.jsonl" : opts.cache_path;
  auto cache = detail_judge::load_cache(cache_path);

  struct Task {
    std::size_t pair_index;
    std::string key;
  };
  std::vector<Task> tasks;
  std::vector<std::string> keys(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const Item& item_i = items[pairs[k].i];
    const Item& item_j = items[pairs[k].j];
    const std::string prompt =
        render_prompt(opts.endpoint.prompt_template, item_i.text, item_j.text);
    keys[k] = detail_judge::cache_key(opts.endpoint.model_name, fnv1a64(prompt), item_i.id,
                                      item_j.id);
    if (!cache.contains(keys[k])) tasks.push_back({k, keys[k]});
  }
  std::cout << pairs.size() << " pairs selected; " << (pairs.size() - tasks.size())
            << " served from cache, " << tasks.size() << " to judge\n";
  const std::filesystem::path pairs_path = global.out_dir / "pairs.jsonl";
  save_pairs(pairs, items, pairs_path);

  if (cache_path.has_parent_path()) std::filesystem::create_directories(cache_path.parent_path());
  std::ofstream cache_out(cache_path, std::ios::app);
  if (!cache_out) {
    throw Error(ErrorKind::Io, "cannot append to cache '" + cache_path.string() + "'");
  }

  std::mutex io_mutex;
  std::vector<std::pair<std::string, std::string>> failures;  // (pair label, message)
  parallel_for(tasks.size(), global.jobs, [&](std::size_t t) {
    const Task& task = tasks[t];
    const Item& item_i = items[pairs[task.pair_index].i];
    const Item& item_j = items[pairs[task.pair_index].j];
    try {
      const JudgeOutcome outcome = client.compare(item_i.text, item_j.text);
      nlohmann::ordered_json record;
      record["key"] = task.key;
      record["model"] = opts.endpoint.model_name;
      record["id_i"] = item_i.id;
      record["id_j"] = item_j.id;
      record["p"] = outcome.p;
      record["retries"] = outcome.retries;
      record["flagged"] = outcome.flagged;
      record["matched_1"] = outcome.matched_variant_1;
      record["matched_2"] = outcome.matched_variant_2;
      std::scoped_lock lock(io_mutex);
      cache_out << record.dump() << '\n' << std::flush;
      cache[task.key] = {outcome.p, outcome.retries, outcome.flagged};
    } catch (const Error& err) {
      std::scoped_lock lock(io_mutex);
      failures.emplace_back(item_i.id + "|" + item_j.id,
                            std::string(error_kind_name(err.kind())) + ": " + err.what());
    }
  });

  const std::filesystem::path output_path = global.out_dir / "comparisons.jsonl";
  std::size_t written = 0;
  {
    std::ofstream out = detail::open_output(output_path);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto it = cache.find(keys[k]);
      if (it == cache.end()) continue;
      nlohmann::ordered_json record;
      record["i"] = items[pairs[k].i].id;
      record["j"] = items[pairs[k].j].id;
      record["p"] = it->second.p;
      out << record.dump() << '\n';
      ++written;
    }
  }

  const std::filesystem::path failures_path = global.out_dir / "judge_failures.jsonl";
  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    std::ofstream out = detail::open_output(failures_path);
    for (const auto& [pair_label, message] : failures) {
      nlohmann::ordered_json record;
      record["pair"] = pair_label;
      record["error"] = message;
      out << record.dump() << '\n';
    }
    std::cerr << "warning: " << failures.size() << " pair(s) failed; see "
              << failures_path.string() << '\n';
  }

  nlohmann::ordered_json config;
  config["items"] = opts.items_path.string();
  config["base_url"] = opts.endpoint.base_url;
  config["model"] = opts.endpoint.model_name;
  config["prompt_hash"] = fnv1a64(opts.endpoint.prompt_template);
  config["label_tokens"] = opts.endpoint.label_tokens;
  config["api_key_env"] = opts.endpoint.api_key_env;  // the name only, never the value
  config["cache"] = cache_path.string();
  config["pairs"] = pairs.size();
  std::vector<std::string> outputs{output_path.string(), pairs_path.string()};
  if (!failures.empty()) outputs.push_back(failures_path.string());
  write_manifest(global, "judge", std::move(config), {}, std::move(outputs));

  std::cout << written << " comparisons written to " << output_path.string() << '\n';
  return failures.empty() ? 0 : 1;
}

}  // namespace comprank::harness
