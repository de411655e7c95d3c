#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "comprank/error.hpp"
#include "comprank/numeric.hpp"

namespace comprank {

/// OpenAI-compatible chat-completions judge. The prompt template must
/// contain {text1} and {text2} exactly once each; temperature is fixed at 0
/// and one output token is requested with per-token logprobs.
struct JudgeEndpointConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8080
  std::string model_name;
  std::string prompt_template;
  std::array<std::string, 2> label_tokens{"1", "2"};
  double timeout_sec = 30.0;
  int max_retries = 3;
  int top_logprobs = 5;
  int initial_backoff_ms = 250;  // doubles per retry
  std::string api_key_env = "COMPRANK_API_KEY";
};

namespace detail {

inline std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

}  // namespace detail

inline void validate_prompt_template(const std::string& tmpl) {
  for (const char* placeholder : {"{text1}", "{text2}"}) {
    const std::size_t count = detail::count_occurrences(tmpl, placeholder);
    if (count != 1) {
      throw Error(ErrorKind::Config, "prompt template must contain " + std::string(placeholder) +
                                         " exactly once (found " + std::to_string(count) + ")");
    }
  }
}

inline void validate_endpoint_config(const JudgeEndpointConfig& cfg) {
  validate_prompt_template(cfg.prompt_template);
  if (cfg.label_tokens[0] == cfg.label_tokens[1]) {
    throw Error(ErrorKind::Config, "label tokens must be distinct");
  }
  if (cfg.base_url.empty()) {
    throw Error(ErrorKind::Config, "judge endpoint needs a base URL");
  }
}

/// Deterministic substitution; the first presented text binds to {text1}.
inline std::string render_prompt(const std::string& tmpl, const std::string& text_i,
                                 const std::string& text_j) {
  validate_prompt_template(tmpl);
  std::string out = tmpl;
  out.replace(out.find("{text1}"), 7, text_i);
  out.replace(out.find("{text2}"), 7, text_j);
  return out;
}

/// Softmax over the two label logprobs, computed against the larger one so
/// the pair of calls (a, b) and (b, a) sums to exactly 1.
inline double probability_from_logprobs(double lp_1, double lp_2) {
  if (std::isnan(lp_1) || std::isnan(lp_2) ||
      lp_1 == std::numeric_limits<double>::infinity() ||
      lp_2 == std::numeric_limits<double>::infinity()) {
    throw Error(ErrorKind::Input, "logprobs must be finite or -inf");
  }
  if (lp_1 == -std::numeric_limits<double>::infinity() &&
      lp_2 == -std::numeric_limits<double>::infinity()) {
    throw Error(ErrorKind::MissingLabel, "both label tokens have zero probability");
  }
  if (lp_1 < lp_2) {
    return 1.0 - probability_from_logprobs(lp_2, lp_1);
  }
  return 1.0 / (1.0 + std::exp(lp_2 - lp_1));
}

/// One judged pair plus transport/extraction metadata.
struct JudgeOutcome {
  double p = 0.5;
  int retries = 0;
  bool flagged = false;  // one label token was missing from the top-k list
  std::string matched_variant_1;
  std::string matched_variant_2;
};

class JudgeClient {
 public:
  /// Transport: request body in, response body out; throws
  /// Error(Transport) on failure. The default talks HTTP via the base URL.
  using Transport = std::function<std::string(const std::string& request_body)>;

  explicit JudgeClient(JudgeEndpointConfig cfg) : cfg_(std::move(cfg)) {
    validate_endpoint_config(cfg_);
    transport_ = make_http_transport();
  }

  JudgeClient(JudgeEndpointConfig cfg, Transport transport)
      : cfg_(std::move(cfg)), transport_(std::move(transport)) {
    validate_endpoint_config(cfg_);
  }

  const JudgeEndpointConfig& config() const noexcept { return cfg_; }

  std::string request_body(const std::string& text_i, const std::string& text_j) const {
    nlohmann::ordered_json body;
    body["model"] = cfg_.model_name;
    body["messages"] = nlohmann::json::array(
        {{{"role", "user"}, {"content", render_prompt(cfg_.prompt_template, text_i, text_j)}}});
    body["max_tokens"] = 1;
    body["temperature"] = 0;
    body["logprobs"] = true;
    body["top_logprobs"] = std::max(cfg_.top_logprobs, 5);
    return body.dump();
  }

  /// Judge one ordered pair. Transport failures are retried with
  /// exponential backoff up to max_retries, then surfaced.
  JudgeOutcome compare(const std::string& text_i, const std::string& text_j) const {
    const std::string body = request_body(text_i, text_j);
    int attempt = 0;
    for (;;) {
      try {
        JudgeOutcome outcome = parse_response(transport_(body));
        outcome.retries = attempt;
        return outcome;
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::Transport || attempt >= cfg_.max_retries) throw;
        const int backoff = cfg_.initial_backoff_ms << attempt;
        if (backoff > 0) std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        ++attempt;
      }
    }
  }

  /// Extract the two label-token logprobs from the first generated
  /// position and convert them to a probability. A label token may match
  /// either verbatim or with a leading space (tokenizer variant); the
  /// matched variant is recorded. If exactly one label is absent from the
  /// returned list it is assigned (lowest listed logprob - 10) and the
  /// outcome is flagged; only both-absent is an error.
  JudgeOutcome parse_response(const std::string& response_body) const {
    const nlohmann::json response = nlohmann::json::parse(response_body, nullptr, false);
    if (response.is_discarded()) {
      throw Error(ErrorKind::Transport, "endpoint returned unparsable JSON");
    }
    const nlohmann::json* position = nullptr;
    if (response.contains("choices") && response["choices"].is_array() &&
        !response["choices"].empty()) {
      const auto& choice = response["choices"][0];
      if (choice.contains("logprobs") && choice["logprobs"].contains("content") &&
          choice["logprobs"]["content"].is_array() && !choice["logprobs"]["content"].empty()) {
        position = &choice["logprobs"]["content"][0];
      }
    }
    if (position == nullptr) {
      throw Error(ErrorKind::Transport, "response carries no token logprobs");
    }

    std::vector<std::pair<std::string, double>> candidates;
    if (position->contains("token") && position->contains("logprob")) {
      candidates.emplace_back((*position)["token"].get<std::string>(),
                              (*position)["logprob"].get<double>());
    }
    if (position->contains("top_logprobs")) {
      for (const auto& entry : (*position)["top_logprobs"]) {
        candidates.emplace_back(entry["token"].get<std::string>(),
                                entry["logprob"].get<double>());
      }
    }
    if (candidates.empty()) {
      throw Error(ErrorKind::Transport, "response carries no token logprobs");
    }

    double lowest_listed = candidates.front().second;
    for (const auto& [token, lp] : candidates) lowest_listed = std::min(lowest_listed, lp);

    JudgeOutcome outcome;
    const auto lp_1 = best_match(candidates, cfg_.label_tokens[0], outcome.matched_variant_1);
    const auto lp_2 = best_match(candidates, cfg_.label_tokens[1], outcome.matched_variant_2);
    if (!lp_1 && !lp_2) {
      throw Error(ErrorKind::MissingLabel, "neither label token ('" + cfg_.label_tokens[0] +
                                               "', '" + cfg_.label_tokens[1] +
                                               "') appears in the returned logprobs");
    }
    outcome.flagged = !lp_1 || !lp_2;
    const double fallback = lowest_listed - 10.0;
    outcome.p = probability_from_logprobs(lp_1.value_or(fallback), lp_2.value_or(fallback));
    return outcome;
  }

 private:
  static std::optional<double> best_match(
      const std::vector<std::pair<std::string, double>>& candidates, const std::string& label,
      std::string& matched_variant) {
    std::optional<double> best;
    for (const auto& [token, lp] : candidates) {
      if (token == label || token == " " + label) {
        if (!best || lp > *best) {
          best = lp;
          matched_variant = token;
        }
      }
    }
    return best;
  }

  Transport make_http_transport() const {
    JudgeEndpointConfig cfg = cfg_;
    return [cfg](const std::string& body) -> std::string {
      httplib::Client client(cfg.base_url);
      const auto timeout = std::chrono::milliseconds(
          static_cast<long long>(cfg.timeout_sec * 1000.0));
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      httplib::Headers headers;
      if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
      }
      auto result = client.Post("/v1/chat/completions", headers, body, "application/json");
      if (!result) {
        throw Error(ErrorKind::Transport,
                    "request failed: " + httplib::to_string(result.error()));
      }
      if (result->status != 200) {
        throw Error(ErrorKind::Transport, "endpoint returned HTTP " + std::to_string(result->status));
      }
      return result->body;
    };
  }

  JudgeEndpointConfig cfg_;
  Transport transport_;
};

/// Prompt templates for the two tasks studied: candidate response time and
/// question difficulty.
inline std::string response_time_prompt_template() {
  return "Question 1: {text1}\n\nQuestion 2: {text2}\n\n"
         "Which reading comprehension question can expect a longer candidate "
         "response time, 1 or 2? Return only 1 or 2.";
}

inline std::string difficulty_prompt_template() {
  return "Question 1: {text1}\n\nQuestion 2: {text2}\n\n"
         "Which reading comprehension question is more difficult, 1 or 2? "
         "Return only 1 or 2.";
}

}  // namespace comprank
