// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// fail. argv[1] is the comprank CLI binary (spawned for the cross-process
// determinism checks); argv[0] re-runs itself for the pair-list check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "comprank/comprank.hpp"
#include "stub_judge.hpp"

using namespace comprank;

namespace {

int failures = 0;

void report(int criterion, bool passed, const std::string& label, const std::string& detail) {
  std::printf("[%s] criterion %d: %s: %s\n", passed ? "PASS" : "FAIL", criterion, label.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!passed) ++failures;
}

std::string fmt(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

std::shared_ptr<const ItemSet> universe_of(std::size_t n) { return
    std::make_shared<const ItemSet>(synthetic_items(n)); }

ComparisonSet exact_bt_comparisons(const std::vector<double>& truth) {
  std::vector<Comparison> comparisons;
  const std::size_t n = truth.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) comparisons.emplace_back(i, j, sigmoid(truth[i] - truth[j]));
    }
  }
  return ComparisonSet(universe_of(n), std::move(comparisons));
}

// Criterion 1 and criterion 5 share this data.
const std::uint64_t kRecoverySeed = 1;
std::vector<double> recovery_truth() { return sample_true_score_values(20, StandardNormal{}, kRecoverySeed); }

void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> truth = recovery_truth();
  const ComparisonSet set = exact_bt_comparisons(truth);
  OptimizerConfig cfg;
  cfg.l2_lambda = 0.0;
  const ScoringResult result = poe_bt_score(set, cfg);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const double rho = spearman(result.scores.values(), truth);
  const double r = pearson(result.scores.values(), truth);
  const double truth_mean = mean_of(truth);
  double max_err = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    max_err = std::max(max_err, std::fabs(result.scores[k] - (truth[k] - truth_mean)));
  }
  const bool passed = rho >= 0.999 && r >= 0.999 && max_err <= 1e-3 && elapsed < 1.0;
  report(1, passed, "exact recovery (N=20, full, noise-free, lambda=0)",
         "spearman=" + fmt(rho) + " pearson=" + fmt(r) + " max_abs_err=" + fmt(max_err) +
             " time=" + fmt(elapsed) + "s");
}

void criterion_2() {
  Xoshiro256pp rng(202);
  double worst_rel = 0.0;
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 2 + rng.below(9);
    std::vector<Comparison> comparisons;
    const std::size_t count = 1 + rng.below(4 * n);
    for (std::size_t k = 0; k < count; ++k) {
      const auto i = static_cast<std::size_t>(rng.below(n));
      auto j = static_cast<std::size_t>(rng.below(n - 1));
      if (j >= i) ++j;
      comparisons.emplace_back(i, j, rng.uniform(1e-6, 1.0 - 1e-6));
    }
    const ComparisonSet set(universe_of(n), std::move(comparisons));
    const double lambda = round % 3 == 0 ? 0.0 : 0.01;
    std::vector<double> s(n);
    for (double& v : s) v = rng.uniform(-2.0, 2.0);

    const bool probit = round % 2 == 1;
    const ObjectiveEval eval =
        probit ? poe_tm_loglik_grad(set, s, lambda) : poe_bt_loglik_grad(set, s, lambda);
    auto value_at = [&](const std::vector<double>& point) {
      return probit ? poe_tm_loglik_grad(set, point, lambda).value
                    : poe_bt_loglik_grad(set, point, lambda).value;
    };
    const double h = 1e-5;
    double scale = 1.0;
    for (double g : eval.grad) scale = std::max(scale, std::fabs(g));
    double worst_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> hi = s, lo = s;
      hi[i] += h;
      lo[i] -= h;
      const double fd = (value_at(hi) - value_at(lo)) / (2.0 * h);
      worst_abs = std::max(worst_abs, std::fabs(fd - eval.grad[i]));
    }
    worst_rel = std::max(worst_rel, worst_abs / scale);
  }
  report(2, worst_rel < 1e-6, "analytic gradients vs central differences (BT and TM)",
         "worst relative error=" + fmt(worst_rel) + " over 100 instances");
}

void criterion_3() {
  Xoshiro256pp rng(303);
  bool bit_identical = true;
  double worst_ratio_gap = 0.0;
  for (int round = 0; round < 50; ++round) {
    const std::size_t n = 2 + rng.below(14);
    std::vector<Comparison> comparisons;
    const std::size_t count = 1 + rng.below(5 * n);
    for (std::size_t k = 0; k < count; ++k) {
      const auto i = static_cast<std::size_t>(rng.below(n));
      auto j = static_cast<std::size_t>(rng.below(n - 1));
      if (j >= i) ++j;
      comparisons.emplace_back(i, j, rng.uniform() < 0.5 ? 0.0 : 1.0);
    }
    const ComparisonSet set(universe_of(n), std::move(comparisons));
    const ScoringResult hard = bt_hard_score(set);
    const ScoringResult poe = poe_bt_score(set);
    if (hard.scores.values() != poe.scores.values()) bit_identical = false;
    const auto ratio = win_ratio(set).scores.values();
    const auto prob = avg_prob(set).scores.values();
    for (std::size_t k = 0; k < ratio.size(); ++k) {
      worst_ratio_gap = std::max(worst_ratio_gap, std::fabs(ratio[k] - prob[k]));
    }
  }
  report(3, bit_identical && worst_ratio_gap < 1e-12,
         "method equivalences on binary sets",
         std::string("bt==poe-bt bitwise: ") + (bit_identical ? "yes" : "NO") +
             ", max |win_ratio - avg_prob|=" + fmt(worst_ratio_gap));
}

void criterion_4() {
  // Stated operating point: soft judge gamma=5 with logit noise 0.5
  // versus hard judge flip 0.1, PoE-BT, N=50, K=4N, 20 seeds, nested
  // prefixes. Committed base seed below; the independent pre-build oracle
  // measured ratio ~0.70 and soft-hard gap ~-0.15 at this operating point,
  // so the stated thresholds are not attainable; the criterion runs
  // faithfully and reports the measured values either way.
  const std::size_t n = 50;
  const std::size_t num_seeds = 20;
  const std::size_t k_partial = 4 * n;
  const std::uint64_t base_seed = 1404;
  const auto universe = universe_of(n);

  double soft_full = 0.0, soft_4n = 0.0, hard_4n = 0.0;
  for (std::size_t t = 0; t < num_seeds; ++t) {
    const std::uint64_t trial_seed = derive_seed(base_seed, t);
    const std::vector<double> truth =
        sample_true_score_values(n, StandardNormal{}, derive_seed(trial_seed, 1));
    const std::vector<IndexPair> order = shuffled_full_order(n, derive_seed(trial_seed, 11));

    const ComparisonSet soft_all = simulate_comparisons(
        universe, order, truth, SoftCalibrated{5.0, 0.5}, derive_seed(trial_seed, 13));
    const ComparisonSet hard_all = simulate_comparisons(
        universe, order, truth, HardDecision{0.1}, derive_seed(trial_seed, 17));

    auto spearman_on_prefix = [&](const ComparisonSet& all, std::size_t k) {
      const ComparisonSet subset(
          universe,
          std::vector<Comparison>(all.comparisons().begin(),
                                  all.comparisons().begin() + static_cast<std::ptrdiff_t>(k)));
      return spearman(poe_bt_score(subset).scores.values(), truth);
    };
    soft_full += spearman_on_prefix(soft_all, order.size());
    soft_4n += spearman_on_prefix(soft_all, k_partial);
    hard_4n += spearman_on_prefix(hard_all, k_partial);
  }
  soft_full /= static_cast<double>(num_seeds);
  soft_4n /= static_cast<double>(num_seeds);
  hard_4n /= static_cast<double>(num_seeds);

  const bool efficiency = soft_4n >= 0.95 * soft_full;
  const bool soft_beats_hard = hard_4n <= soft_4n - 0.02;
  report(4, efficiency && soft_beats_hard,
         "soft-vs-hard efficiency at the stated noise point",
         "soft_full=" + fmt(soft_full) + " soft_4N=" + fmt(soft_4n) + " (ratio=" +
             fmt(soft_4n / soft_full) + ", need >=0.95), hard_4N=" + fmt(hard_4n) +
             " (need <= soft_4N - 0.02)");
}

void criterion_5() {
  const std::vector<double> truth = recovery_truth();
  const ComparisonSet set = exact_bt_comparisons(truth);
  OptimizerConfig cfg;
  cfg.l2_lambda = 0.0;
  const harness::BtTmReport result = harness::bt_tm_compare(set, cfg);
  const bool passed = result.slope >= 1.6 && result.slope <= 1.8 && result.r >= 0.99;
  report(5, passed, "BT~TM linear scaling on criterion-1 data",
         "slope=" + fmt(result.slope) + " (need [1.6, 1.8]), r=" + fmt(result.r) +
             " (need >=0.99)");
}

void criterion_6() {
  const std::vector<double> scores = sample_true_score_values(200, StandardNormal{}, 606);
  const double sigma_s = score_stddev(scores);

  auto targets_for = [&](double gamma) {
    const TargetConfig cfg{gamma, Link::Sigmoid, sigma_s};
    std::vector<double> targets;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      for (std::size_t j = 0; j < scores.size(); ++j) {
        if (i != j) targets.push_back(soft_target(scores[i], scores[j], cfg));
      }
    }
    return targets;
  };

  bool hard_ok = true;
  for (double t : targets_for(0.0)) {
    if (t != 0.0 && t != 0.5 && t != 1.0) hard_ok = false;
  }

  double max_dev_g10 = 0.0;
  for (double t : targets_for(10.0)) max_dev_g10 = std::max(max_dev_g10, std::fabs(t - 0.5));

  bool monotone = true;
  double previous_fraction = -1.0;
  std::string fractions;
  for (double gamma : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    const auto targets = targets_for(gamma);
    std::size_t inside = 0;
    for (double t : targets) {
      if (t > 0.05 && t < 0.95) ++inside;
    }
    const double fraction = static_cast<double>(inside) / static_cast<double>(targets.size());
    if (fraction < previous_fraction) monotone = false;
    previous_fraction = fraction;
    fractions += (fractions.empty() ? "" : ",") + fmt(fraction);
  }

  const bool passed = hard_ok && max_dev_g10 <= 0.2 && monotone;
  report(6, passed, "gamma-sweep target shapes",
         std::string("gamma0 in {0,0.5,1}: ") + (hard_ok ? "yes" : "NO") +
             ", gamma10 max|p-0.5|=" + fmt(max_dev_g10) +
             " (need <=0.2), mid-fractions=[" + fractions + "] monotone: " +
             (monotone ? "yes" : "NO"));
}

// Brute-force metric references (independent of the library path).
double ref_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    syy += y[k] * y[k];
    sxy += x[k] * y[k];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

std::vector<double> ref_ranks(const std::vector<double>& v) {
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t below = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++below;
      if (v[j] == v[i]) ++equal;
    }
    ranks[i] = static_cast<double>(below) + 0.5 * static_cast<double>(equal + 1);
  }
  return ranks;
}

double ref_scaled_rmse(const std::vector<double>& pred, const std::vector<double>& gold) {
  const auto n = static_cast<double>(pred.size());
  double sp = 0, sg = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    sp += pred[k];
    sg += gold[k];
  }
  const double mp = sp / n, mg = sg / n;
  double num = 0, den = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    num += (pred[k] - mp) * (gold[k] - mg);
    den += (pred[k] - mp) * (pred[k] - mp);
  }
  const double a = num / den, b = mg - a * mp;
  double ss = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double resid = a * pred[k] + b - gold[k];
    ss += resid * resid;
  }
  return std::sqrt(ss / n);
}

void criterion_7() {
  Xoshiro256pp rng(707);
  double worst = 0.0;
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<double> pred(n), gold(n);
    bool constant = true;
    for (std::size_t k = 0; k < n; ++k) {
      pred[k] = round % 4 == 0 ? std::floor(rng.uniform(-3.0, 3.0)) : rng.normal();
      gold[k] = 5.0 * rng.normal() + 2.0;
      if (pred[k] != pred[0]) constant = false;
    }
    if (constant) pred[0] += 1.0;
    worst = std::max(worst, std::fabs(pearson(pred, gold) - ref_pearson(pred, gold)));
    worst = std::max(worst, std::fabs(spearman(pred, gold) -
                                      ref_pearson(ref_ranks(pred), ref_ranks(gold))));
    worst = std::max(worst,
                     std::fabs(rmse_after_scaling(pred, gold).rmse - ref_scaled_rmse(pred, gold)));
  }
  report(7, worst < 1e-10, "metric oracles (spearman with ties, pearson, scaled rmse)",
         "worst abs deviation=" + fmt(worst) + " over 100 random vectors");
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void criterion_8(const std::string& cli_path, const std::string& self_path) {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "comprank_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);

  bool csv_identical = false;
  {
    const std::string flags =
        " --seed 7 curve --n 12 --judge soft --judge-gamma 5 --judge-noise 0.3"
        " --seeds 2 --k-grid 1N 2N full --methods poe-bt avg-prob";
    const std::string run_a = "\"" + cli_path + "\" --out-dir \"" + (base / "a").string() + "\"" +
                              flags + " > /dev/null 2>&1";
    const std::string run_b = "\"" + cli_path + "\" --out-dir \"" + (base / "b").string() + "\"" +
                              flags + " > /dev/null 2>&1";
    const int rc_a = std::system(run_a.c_str());
    const int rc_b = std::system(run_b.c_str());
    const std::string csv_a = slurp(base / "a" / "curve.csv");
    const std::string csv_b = slurp(base / "b" / "curve.csv");
    csv_identical = rc_a == 0 && rc_b == 0 && !csv_a.empty() && csv_a == csv_b;
  }

  bool pairs_identical = false;
  {
    const std::string run_a = "\"" + self_path + "\" --emit-pairs 40 100 9 > \"" +
                              (base / "pairs_a.txt").string() + "\" 2>/dev/null";
    const std::string run_b = "\"" + self_path + "\" --emit-pairs 40 100 9 > \"" +
                              (base / "pairs_b.txt").string() + "\" 2>/dev/null";
    const int rc_a = std::system(run_a.c_str());
    const int rc_b = std::system(run_b.c_str());
    const std::string pairs_a = slurp(base / "pairs_a.txt");
    pairs_identical =
        rc_a == 0 && rc_b == 0 && !pairs_a.empty() && pairs_a == slurp(base / "pairs_b.txt");
  }

  report(8, csv_identical && pairs_identical, "byte-identical reruns",
         std::string("cmd_curve CSV identical: ") + (csv_identical ? "yes" : "NO") +
             ", cross-process pair lists identical: " + (pairs_identical ? "yes" : "NO"));
}

void criterion_9() {
  bool softmax_ok = false;
  bool antisym_ok = true;
  bool resume_ok = false;
  std::string detail;

  try {
    StubJudgeServer server([](const nlohmann::json&) {
      return openai_response({{"1", 4.2}, {"2", 3.1}});
    });
    JudgeEndpointConfig cfg;
    cfg.base_url = server.base_url();
    cfg.model_name = "stub";
    cfg.prompt_template = response_time_prompt_template();
    cfg.max_retries = 0;
    cfg.initial_backoff_ms = 0;
    const JudgeClient client(cfg);
    const JudgeOutcome outcome = client.compare("one", "two");
    softmax_ok = std::fabs(outcome.p - 0.7502601055951177) < 1e-9;
    detail = "stub softmax p=" + fmt(outcome.p) + " (want 0.75026)";

    Xoshiro256pp rng(9);
    for (int round = 0; round < 1000; ++round) {
      const double a = rng.uniform(-25.0, 0.0);
      const double b = rng.uniform(-25.0, 0.0);
      if (probability_from_logprobs(a, b) + probability_from_logprobs(b, a) != 1.0) {
        antisym_ok = false;
      }
    }

    // Interrupted-and-resumed judging must not duplicate pairs.
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "comprank_acceptance_judge";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::vector<Item> items;
    for (int k = 0; k < 8; ++k) {
      items.push_back({"it" + std::to_string(k), "text " + std::to_string(k), {}});
    }
    save_items(ItemSet(items), dir / "items.jsonl");

    harness::JudgeCmdOptions opts;
    opts.items_path = dir / "items.jsonl";
    opts.endpoint = cfg;
    opts.strategy = RandomK{20, 3};
    opts.cache_path = dir / "cache.jsonl";
    harness::GlobalOptions global;
    global.out_dir = dir;

    server.fail_budget.store(8);
    std::ostringstream sink;
    auto* cout_buffer = std::cout.rdbuf(sink.rdbuf());
    auto* cerr_buffer = std::cerr.rdbuf(sink.rdbuf());
    const int first_rc = harness::cmd_judge(opts, global);
    const int second_rc = harness::cmd_judge(opts, global);
    std::cout.rdbuf(cout_buffer);
    std::cerr.rdbuf(cerr_buffer);

    std::set<std::string> seen;
    std::size_t rows = 0;
    std::ifstream in(dir / "comparisons.jsonl");
    std::string line;
    bool duplicates = false;
    while (std::getline(in, line)) {
      ++rows;
      const auto record = nlohmann::json::parse(line);
      if (!seen.insert(record["i"].get<std::string>() + "|" + record["j"].get<std::string>())
               .second) {
        duplicates = true;
      }
    }
    resume_ok = first_rc == 1 && second_rc == 0 && rows == 20 && !duplicates;
    detail += ", resume rows=" + std::to_string(rows) + "/20 duplicates=" +
              (duplicates ? "yes" : "no");
  } catch (const std::exception& err) {
    detail += std::string(" exception: ") + err.what();
  }

  report(9, softmax_ok && antisym_ok && resume_ok, "judge client against a local stub",
         detail + std::string(", antisymmetry exact: ") + (antisym_ok ? "yes" : "NO"));
}

}  // namespace

int main(int argc, char** argv) {
  // Child mode used by criterion 8: print a seeded pair selection.
  if (argc >= 2 && std::string(argv[1]) == "--emit-pairs") {
    if (argc != 5) return 2;
    const auto n = static_cast<std::size_t>(std::atoll(argv[2]));
    const auto k = static_cast<std::size_t>(std::atoll(argv[3]));
    const auto seed = static_cast<std::uint64_t>(std::atoll(argv[4]));
    for (const IndexPair& pair : select_pairs(n, RandomK{k, seed})) {
      std::printf("%u %u\n", pair.i, pair.j);
    }
    return 0;
  }

  const std::string cli_path = argc > 1 ? argv[1] : "";
  if (cli_path.empty()) {
    std::fprintf(stderr, "usage: %s <path-to-comprank-cli>\n", argv[0]);
    return 2;
  }

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8(cli_path, argv[0]);
  criterion_9();

  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
