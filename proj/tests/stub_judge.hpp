#pragma once

// Local OpenAI-style chat-completions stub used by the judge-client and
// harness tests. Binds an ephemeral loopback port; the responder decides
// each reply, and a failure budget lets tests exercise retry and resume
// paths.

#include <atomic>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"

struct StubJudgeServer {
  using Responder = std::function<nlohmann::json(const nlohmann::json& request)>;

  explicit StubJudgeServer(Responder responder) : responder_(std::move(responder)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& request, httplib::Response& response) {
                   requests.fetch_add(1);
                   if (fail_budget.load() > 0) {
                     fail_budget.fetch_sub(1);
                     response.status = 500;
                     response.set_content("{\"error\":\"injected failure\"}", "application/json");
                     return;
                   }
                   const nlohmann::json body = nlohmann::json::parse(request.body);
                   last_body = body;
                   response.set_content(responder_(body).dump(), "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubJudgeServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> requests{0};
  std::atomic<int> fail_budget{0};
  nlohmann::json last_body;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  Responder responder_;
};

/// Response with one generated token and the given top-k list.
inline nlohmann::json openai_response(
    const std::vector<std::pair<std::string, double>>& top_logprobs) {
  nlohmann::json top = nlohmann::json::array();
  for (const auto& [token, lp] : top_logprobs) {
    top.push_back({{"token", token}, {"logprob", lp}});
  }
  return {{"id", "stub"},
          {"object", "chat.completion"},
          {"choices",
           nlohmann::json::array(
               {{{"index", 0},
                 {"message", {{"role", "assistant"}, {"content", top_logprobs.front().first}}},
                 {"logprobs",
                  {{"content", nlohmann::json::array({{{"token", top_logprobs.front().first},
                                                       {"logprob", top_logprobs.front().second},
                                                       {"top_logprobs", top}}})}}},
                 {"finish_reason", "stop"}}})}};
}
