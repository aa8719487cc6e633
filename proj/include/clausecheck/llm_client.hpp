// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "clausecheck/prompting.hpp"

namespace clausecheck {

enum class LlmProviderKind { kRemoteChat, kMock };

struct LlmProviderConfig {
  LlmProviderKind provider_kind = LlmProviderKind::kMock;
  std::string endpoint;
  std::string model_id;
  std::string api_key_env;
  double timeout_s = 60.0;
  int max_retries = 2;
  std::size_t max_in_flight = 4;
  std::string mock_script;  // path, mock provider only
};

/// Throws Error(kContractViolation) for timeout_s <= 0 or negative retries.
void check_config(const LlmProviderConfig& config);

struct CompletionRequest {
  std::string_view prompt;
  PromptKind kind = PromptKind::kQa;
  double temperature = 0.0;
  int sample_index = 0;
  int attempt = 1;
};

/// One stateless completion per call; no conversation history is ever sent.
/// Retryable failures throw TransportError; anything else is fatal for the run.
class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::size_t max_in_flight() const { return 1; }
  virtual const std::string& model_id() const = 0;
};

struct SampleOutput {
  int sample_index = 0;
  std::string text;
  int attempts = 1;
};

struct SampleFailure {
  int sample_index = 0;
  int attempts = 0;
  std::string error;
};

struct CompletionBatch {
  PromptKind kind = PromptKind::kQa;
  std::size_t requested = 0;
  double temperature = 0.0;
  std::vector<SampleOutput> outputs;    // ordered by sample index
  std::vector<SampleFailure> failures;  // ordered by sample index
};

/// Draws n completions as n independent requests, sample indices
/// first_index..first_index+n-1. Each request gets 1 + max_retries attempts;
/// a request that still fails is recorded as a failure. Requests run
/// concurrently up to provider.max_in_flight(). Throws
/// Error(kProviderUnavailable) when every request fails.
CompletionBatch sample(const RenderedPrompt& prompt, int n, double temperature,
                       LlmProvider& provider, int max_retries, int first_index = 0);

/// Scripted provider for offline runs. The script is a JSON object:
///
///   {
///     "by_hash":  {"<fnv1a64 hex of prompt>": [outputs...]},
///     "rules":    [{"kind": "QA|SELECTION|STANDARD", "contains": "text" | ["a", "b"],
///                   "outputs": [outputs...], "cycle": false, "shuffle": false}],
///     "sequence": [outputs...]
///   }
///
/// A request is answered from the first source that matches: by_hash, then the
/// first rule whose kind and every `contains` string match the prompt, then
/// `sequence`. Each source keeps its own cursor. An output is a string, or
/// {"error": "..."} to simulate a transport failure. An exhausted non-cycling
/// source also fails as a transport error. `shuffle` permutes a rule's outputs
/// with a generator seeded by the provider seed.
class MockLlmProvider final : public LlmProvider {
 public:
  MockLlmProvider(nlohmann::json script, std::uint64_t seed = 0, std::string model_id = "mock");
  static std::unique_ptr<MockLlmProvider> from_file(const std::string& path, std::uint64_t seed = 0);

  std::string complete(const CompletionRequest& request) override;
  const std::string& model_id() const override { return model_id_; }
  std::size_t calls() const;

 private:
  struct Rule {
    std::optional<PromptKind> kind;
    std::vector<std::string> contains;
    std::vector<nlohmann::json> outputs;
    bool cycle = false;
    std::size_t cursor = 0;
  };
  static std::string take(std::vector<nlohmann::json>& outputs, std::size_t& cursor, bool cycle,
                          const std::string& source);

  std::string model_id_;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<nlohmann::json>> by_hash_;
  std::map<std::string, std::size_t> hash_cursor_;
  std::vector<Rule> rules_;
  std::vector<nlohmann::json> sequence_;
  std::size_t sequence_cursor_ = 0;
  std::size_t calls_ = 0;
};

/// Chat endpoint client:
///   POST {model, messages: [{role: "user", content}], temperature}
///     -> {choices: [{message: {content}}]}
/// Transport errors, 429 and 5xx are retryable. Other statuses throw
/// Error(kProviderUnavailable). The credential is sent as a bearer token and
/// never logged.
class RemoteChatProvider final : public LlmProvider {
 public:
  explicit RemoteChatProvider(LlmProviderConfig config);

  std::string complete(const CompletionRequest& request) override;
  std::size_t max_in_flight() const override { return config_.max_in_flight; }
  const std::string& model_id() const override { return config_.model_id; }

 private:
  LlmProviderConfig config_;
};

std::unique_ptr<LlmProvider> make_llm_provider(const LlmProviderConfig& config,
                                               std::uint64_t seed = 0);

}  // namespace clausecheck
