#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "kgpr/augment.hpp"
#include "kgpr/error.hpp"

namespace kgpr {

inline constexpr std::string_view kDefaultLlmPrompt =
    "You are given a fact from a knowledge graph written as \"head | relation | tail\", "
    "with one entity replaced by [MASK]. Write one natural-language question whose answer "
    "is the masked entity. Mention the entity that is not masked. Reply with the question "
    "only, on a single line.";

inline constexpr std::string_view kLlmApiKeyEnv = "KGPR_LLM_API_KEY";

struct LlmConfig {
  std::string base_url;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string system_prompt{kDefaultLlmPrompt};
  std::size_t max_in_flight = 4;
  int timeout_seconds = 60;
  bool fallback_to_template = false;

  void validate() const {
    if (base_url.empty()) throw Error(ErrorKind::Config, "llm base_url is required");
    if (model.empty()) throw Error(ErrorKind::Config, "llm model is required");
    if (max_in_flight < 1) throw Error(ErrorKind::Config, "llm max_in_flight must be >= 1");
  }
};

/// OpenAI-style chat-completions request for one masked triplet.
inline std::string llm_request_body(const LlmConfig& cfg, const MaskedTriplet& m) {
  nlohmann::ordered_json body;
  body["model"] = cfg.model;
  body["messages"] = nlohmann::ordered_json::array({
      {{"role", "system"}, {"content", cfg.system_prompt}},
      {{"role", "user"}, {"content", m.render()}},
  });
  return body.dump();
}

/// First line of choices[0].message.content, trimmed. Empty string if the
/// reply has no usable text.
inline std::string llm_reply_text(std::string_view response_body) {
  const auto j = nlohmann::json::parse(response_body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return {};
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) return {};
  const auto& first = (*choices)[0];
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    return {};
  }
  const auto content = first["message"]["content"].get<std::string>();
  const auto ws = " \t\r\n";
  const auto begin = content.find_first_not_of(ws);
  if (begin == std::string::npos) return {};
  auto line = content.substr(begin, content.find('\n', begin) - begin);
  line.erase(line.find_last_not_of(ws) + 1);
  return line;
}

/// Question writer backed by an OpenAI-compatible chat-completions endpoint.
/// The credential is read from KGPR_LLM_API_KEY when generate() runs.
class LlmQuestionGenerator final : public QuestionGenerator {
 public:
  explicit LlmQuestionGenerator(LlmConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  GeneratorKind kind() const noexcept override { return GeneratorKind::ExternalLlm; }

  std::vector<SyntheticQuestion> generate(std::span<const MaskedTriplet> masked) override {
    const char* key = std::getenv(std::string(kLlmApiKeyEnv).c_str());
    if (key == nullptr || *key == '\0') {
      throw Error(ErrorKind::Generator,
                  "environment variable " + std::string(kLlmApiKeyEnv) + " is not set");
    }
    const std::string api_key = key;

    std::vector<SyntheticQuestion> out(masked.size());
    std::vector<std::optional<std::string>> failures(masked.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
      httplib::Client client(cfg_.base_url);
      client.set_connection_timeout(cfg_.timeout_seconds, 0);
      client.set_read_timeout(cfg_.timeout_seconds, 0);
      client.set_write_timeout(cfg_.timeout_seconds, 0);
      const httplib::Headers headers{{"Authorization", "Bearer " + api_key}};
      for (std::size_t i = next++; i < masked.size(); i = next++) {
        const auto& m = masked[i];
        out[i] = {{}, m.source.id, m.masked_slot, GeneratorKind::ExternalLlm};
        auto res = client.Post(cfg_.path, headers, llm_request_body(cfg_, m), "application/json");
        if (!res) {
          failures[i] = "transport failure (" + httplib::to_string(res.error()) + ")";
          continue;
        }
        if (res->status < 200 || res->status >= 300) {
          failures[i] = "HTTP status " + std::to_string(res->status);
          continue;
        }
        out[i].text = llm_reply_text(res->body);
        if (out[i].text.empty()) failures[i] = "empty reply";
      }
    };

    const std::size_t workers = std::min(cfg_.max_in_flight, std::max<std::size_t>(masked.size(), 1));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (std::size_t i = 0; i < masked.size(); ++i) {
      if (!failures[i]) continue;
      if (!cfg_.fallback_to_template) {
        throw Error(ErrorKind::Generator, "question generation failed for triplet " +
                                              std::to_string(masked[i].source.id) + ": " +
                                              *failures[i]);
      }
      out[i] = {TemplateQuestionGenerator::question_text(masked[i]), masked[i].source.id,
                masked[i].masked_slot, GeneratorKind::Template};
    }
    return out;
  }

 private:
  LlmConfig cfg_;
};

}  // namespace kgpr
