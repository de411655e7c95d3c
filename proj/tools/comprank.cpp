// Command-line front end: score comparison files, run simulated efficiency
// curves, sweep gamma, compare BT/TM experts, export soft training pairs,
// and drive an LLM judge endpoint.

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "comprank/comprank.hpp"

namespace {

using namespace comprank;
using namespace comprank::harness;

OptimizerConfig make_optimizer(std::size_t max_iters, double grad_tol, double lambda,
                               const std::string& init, std::uint64_t init_seed) {
  OptimizerConfig cfg;
  cfg.max_iters = max_iters;
  cfg.grad_tol = grad_tol;
  cfg.l2_lambda = lambda;
  if (init == "seeded") {
    cfg.init = Seeded{init_seed};
  } else if (init != "zeros") {
    throw Error(ErrorKind::Config, "unknown init scheme '" + init + "'");
  }
  cfg.check();
  return cfg;
}

JudgeModel make_judge(const std::string& kind, double gamma, double noise, double flip,
                      double bias) {
  if (kind == "soft") return SoftCalibrated{gamma, noise};
  if (kind == "hard") return HardDecision{flip};
  if (kind == "miscal") return Miscalibrated{gamma, noise, bias};
  throw Error(ErrorKind::Config, "unknown judge kind '" + kind + "'");
}

std::vector<ScoringMethod> parse_methods(const std::vector<std::string>& names) {
  if (names.empty()) {
    throw Error(ErrorKind::Config, "no scoring methods given");
  }
  std::vector<ScoringMethod> methods;
  methods.reserve(names.size());
  for (const std::string& name : names) methods.push_back(parse_scoring_method(name));
  return methods;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pairwise comparative assessment toolkit"};
  app.require_subcommand(1);

  GlobalOptions global;
  for (int i = 0; i < argc; ++i) global.argv.emplace_back(argv[i]);
  app.add_option("--seed", global.seed, "base RNG seed")->capture_default_str();
  app.add_option("--jobs", global.jobs, "max concurrent workers")->capture_default_str();
  app.add_option("--out-dir", global.out_dir, "output directory")->capture_default_str();
  app.add_option("--format", global.format, "output format")->capture_default_str();

  // Shared optimizer flags (per subcommand instance).
  struct OptFlags {
    std::size_t max_iters = 2000;
    double grad_tol = 1e-8;
    double lambda = 0.01;
    std::string init = "zeros";
    std::uint64_t init_seed = 0;
  };
  auto add_optimizer_flags = [](CLI::App* cmd, OptFlags& flags) {
    cmd->add_option("--max-iters", flags.max_iters, "optimizer iteration cap")
        ->capture_default_str();
    cmd->add_option("--grad-tol", flags.grad_tol, "gradient infinity-norm tolerance")
        ->capture_default_str();
    cmd->add_option("--lambda", flags.lambda, "L2 penalty weight")->capture_default_str();
    cmd->add_option("--init", flags.init, "score init: zeros | seeded")->capture_default_str();
    cmd->add_option("--init-seed", flags.init_seed, "seed for seeded init")
        ->capture_default_str();
  };

  // --- score ---------------------------------------------------------------
  ScoreOptions score_opts;
  std::string score_method = "poe-bt";
  OptFlags score_flags;
  CLI::App* score_cmd = app.add_subcommand("score", "score a comparisons file");
  score_cmd->add_option("--items", score_opts.items_path, "items file (jsonl)")->required();
  score_cmd->add_option("--comparisons", score_opts.comparisons_path, "comparisons file (jsonl)")
      ->required();
  score_cmd->add_option("--method", score_method,
                        "win-ratio | avg-prob | bt | poe-bt | poe-tm")
      ->capture_default_str();
  add_optimizer_flags(score_cmd, score_flags);

  // --- curve ---------------------------------------------------------------
  CurveOptions curve_opts;
  std::string curve_judge = "soft";
  double curve_gamma = 5.0, curve_noise = 0.0, curve_flip = 0.1, curve_bias = 0.0;
  std::vector<std::string> curve_methods = {"poe-bt"};
  OptFlags curve_flags;
  CLI::App* curve_cmd =
      app.add_subcommand("curve", "simulated metric-vs-K efficiency curves");
  curve_cmd->add_option("--n", curve_opts.n, "number of items")->capture_default_str();
  curve_cmd->add_option("--judge", curve_judge, "soft | hard | miscal")->capture_default_str();
  curve_cmd->add_option("--judge-gamma", curve_gamma, "soft judge gamma")->capture_default_str();
  curve_cmd->add_option("--judge-noise", curve_noise, "soft judge logit noise sd")
      ->capture_default_str();
  curve_cmd->add_option("--flip-prob", curve_flip, "hard judge flip probability")
      ->capture_default_str();
  curve_cmd->add_option("--judge-bias", curve_bias, "miscalibrated judge logit bias")
      ->capture_default_str();
  std::string curve_dist = "normal";
  double curve_lo = 0.0, curve_hi = 1.0;
  curve_cmd->add_option("--dist", curve_dist, "true score distribution: normal | uniform")
      ->capture_default_str();
  curve_cmd->add_option("--dist-lo", curve_lo, "uniform lower bound")->capture_default_str();
  curve_cmd->add_option("--dist-hi", curve_hi, "uniform upper bound")->capture_default_str();
  curve_cmd->add_option("--k-grid", curve_opts.k_grid, "K tokens: e.g. 1N 2N 4N full")
      ->capture_default_str();
  curve_cmd->add_option("--seeds", curve_opts.num_seeds, "number of seeds to average")
      ->capture_default_str();
  curve_cmd->add_option("--methods", curve_methods, "scoring methods")->capture_default_str();
  add_optimizer_flags(curve_cmd, curve_flags);

  // --- gamma-sweep -----------------------------------------------------------
  GammaSweepOptions sweep_opts;
  std::string sweep_items;
  std::string sweep_link = "sigmoid";
  CLI::App* sweep_cmd =
      app.add_subcommand("gamma-sweep", "soft-target histograms across gamma values");
  sweep_cmd->add_option("--items", sweep_items, "items file with gold scores");
  sweep_cmd->add_option("--simulate-n", sweep_opts.simulate_n,
                        "simulate this many standard-normal scores instead")
      ->capture_default_str();
  sweep_cmd->add_option("--gammas", sweep_opts.gammas, "gamma grid")->capture_default_str();
  sweep_cmd->add_option("--bins", sweep_opts.bins, "histogram bins")->capture_default_str();
  sweep_cmd->add_option("--link", sweep_link, "sigmoid | probit")->capture_default_str();

  // --- bt-tm-compare ---------------------------------------------------------
  BtTmOptions bttm_opts;
  std::string bttm_items, bttm_comparisons;
  OptFlags bttm_flags;
  CLI::App* bttm_cmd = app.add_subcommand(
      "bt-tm-compare", "regress PoE-BT scores on PoE-TM scores (slope report)");
  bttm_cmd->add_option("--items", bttm_items, "items file");
  bttm_cmd->add_option("--comparisons", bttm_comparisons, "comparisons file");
  bttm_cmd->add_option("--simulate-n", bttm_opts.simulate_n, "simulated item count")
      ->capture_default_str();
  bttm_cmd->add_option("--simulate-gamma", bttm_opts.simulate_gamma,
                       "gamma of the simulated soft probabilities")
      ->capture_default_str();
  add_optimizer_flags(bttm_cmd, bttm_flags);

  // --- export-targets --------------------------------------------------------
  ExportTargetsOptions export_opts;
  std::string export_link = "sigmoid";
  std::string export_pairing = "replace";
  double export_sigma = 0.0;
  CLI::App* export_cmd =
      app.add_subcommand("export-targets", "export soft training pairs for finetuning");
  export_cmd->add_option("--items", export_opts.items_path, "items file with gold scores")
      ->required();
  export_cmd->add_option("--gamma", export_opts.target.gamma, "spread hyperparameter")
      ->capture_default_str();
  export_cmd->add_option("--link", export_link, "sigmoid | probit")->capture_default_str();
  export_cmd->add_option("--sigma-s", export_sigma,
                         "score stddev override (0 = compute from the gold scores)")
      ->capture_default_str();
  export_cmd
      ->add_option("--pairing", export_pairing,
                   "replace | random | full-ordered | full-unordered")
      ->capture_default_str();
  export_cmd->add_option("--count", export_opts.count, "number of sampled pairs")
      ->capture_default_str();

  // --- judge -------------------------------------------------------------
  JudgeCmdOptions judge_opts;
  std::string judge_task = "response-time";
  std::string judge_template;
  std::string judge_strategy = "full";
  std::size_t judge_k = 0;
  std::vector<std::string> judge_labels = {"1", "2"};
  CLI::App* judge_cmd =
      app.add_subcommand("judge", "collect comparisons from an LLM judge endpoint");
  judge_cmd->add_option("--items", judge_opts.items_path, "items file")->required();
  judge_cmd->add_option("--base-url", judge_opts.endpoint.base_url,
                        "OpenAI-compatible endpoint, e.g. http://127.0.0.1:8000")
      ->required();
  judge_cmd->add_option("--model", judge_opts.endpoint.model_name, "model name")->required();
  judge_cmd->add_option("--task", judge_task, "response-time | difficulty")
      ->capture_default_str();
  judge_cmd->add_option("--prompt-template", judge_template,
                        "custom template with {text1} and {text2}");
  judge_cmd->add_option("--label-tokens", judge_labels, "the two label tokens")
      ->expected(2)
      ->capture_default_str();
  judge_cmd->add_option("--strategy", judge_strategy, "full | random | rr")
      ->capture_default_str();
  judge_cmd->add_option("--k", judge_k, "pair budget for random | rr");
  judge_cmd->add_option("--cache", judge_opts.cache_path, "response cache file");
  judge_cmd->add_option("--timeout", judge_opts.endpoint.timeout_sec, "request timeout (s)")
      ->capture_default_str();
  judge_cmd->add_option("--max-retries", judge_opts.endpoint.max_retries, "transport retries")
      ->capture_default_str();
  judge_cmd->add_option("--api-key-env", judge_opts.endpoint.api_key_env,
                        "environment variable holding the API key")
      ->capture_default_str();

  // Global flags are accepted both before and after the subcommand.
  for (CLI::App* sub : {score_cmd, curve_cmd, sweep_cmd, bttm_cmd, export_cmd, judge_cmd}) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (score_cmd->parsed()) {
      score_opts.method = parse_scoring_method(score_method);
      score_opts.optimizer =
          make_optimizer(score_flags.max_iters, score_flags.grad_tol, score_flags.lambda,
                         score_flags.init, score_flags.init_seed);
      return cmd_score(score_opts, global);
    }
    if (curve_cmd->parsed()) {
      curve_opts.judge = make_judge(curve_judge, curve_gamma, curve_noise, curve_flip, curve_bias);
      if (curve_dist == "uniform") {
        curve_opts.dist = Uniform{curve_lo, curve_hi};
      } else if (curve_dist != "normal") {
        throw Error(ErrorKind::Config, "unknown distribution '" + curve_dist + "'");
      }
      curve_opts.methods = parse_methods(curve_methods);
      curve_opts.optimizer =
          make_optimizer(curve_flags.max_iters, curve_flags.grad_tol, curve_flags.lambda,
                         curve_flags.init, curve_flags.init_seed);
      return cmd_curve(curve_opts, global);
    }
    if (sweep_cmd->parsed()) {
      if (!sweep_items.empty()) sweep_opts.items_path = sweep_items;
      if (sweep_link == "probit") {
        sweep_opts.link = Link::Probit;
      } else if (sweep_link != "sigmoid") {
        throw Error(ErrorKind::Config, "unknown link '" + sweep_link + "'");
      }
      return cmd_gamma_sweep(sweep_opts, global);
    }
    if (bttm_cmd->parsed()) {
      if (!bttm_items.empty()) bttm_opts.items_path = bttm_items;
      if (!bttm_comparisons.empty()) bttm_opts.comparisons_path = bttm_comparisons;
      bttm_opts.optimizer =
          make_optimizer(bttm_flags.max_iters, bttm_flags.grad_tol, bttm_flags.lambda,
                         bttm_flags.init, bttm_flags.init_seed);
      return cmd_bt_tm_compare(bttm_opts, global);
    }
    if (export_cmd->parsed()) {
      if (export_link == "probit") {
        export_opts.target.link = Link::Probit;
      } else if (export_link != "sigmoid") {
        throw Error(ErrorKind::Config, "unknown link '" + export_link + "'");
      }
      if (export_sigma > 0.0) export_opts.target.sigma_s = export_sigma;
      export_opts.pairing = parse_pairing_mode(export_pairing);
      return cmd_export_targets(export_opts, global);
    }
    if (judge_cmd->parsed()) {
      judge_opts.endpoint.prompt_template =
          !judge_template.empty()        ? judge_template
          : judge_task == "difficulty"   ? difficulty_prompt_template()
          : judge_task == "response-time" ? response_time_prompt_template()
                                          : throw Error(ErrorKind::Config,
                                                        "unknown task '" + judge_task + "'");
      judge_opts.endpoint.label_tokens = {judge_labels[0], judge_labels[1]};
      if (judge_strategy == "full") {
        judge_opts.strategy = FullOrdered{};
      } else if (judge_strategy == "random") {
        judge_opts.strategy = RandomK{judge_k, global.seed};
      } else if (judge_strategy == "rr") {
        judge_opts.strategy = RoundRobinPlusRandom{judge_k, global.seed};
      } else {
        throw Error(ErrorKind::Config, "unknown strategy '" + judge_strategy + "'");
      }
      return cmd_judge(judge_opts, global);
    }
  } catch (const Error& err) {
    std::cerr << "error (" << error_kind_name(err.kind()) << "): " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
