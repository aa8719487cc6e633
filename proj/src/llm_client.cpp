// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/llm_client.hpp"

#include <algorithm>
#include <atomic>
#include <random>
#include <thread>

#include "clausecheck/error.hpp"
#include "clausecheck/http_transport.hpp"
#include "clausecheck/text.hpp"

namespace clausecheck {

void check_config(const LlmProviderConfig& config) {
  if (!(config.timeout_s > 0.0)) throw Error(ErrorCode::kContractViolation, "llm timeout_s must be > 0");
  if (config.max_retries < 0) throw Error(ErrorCode::kContractViolation, "llm max_retries must be >= 0");
  if (config.max_in_flight < 1) throw Error(ErrorCode::kContractViolation, "llm max_in_flight must be >= 1");
}

namespace {

struct Slot {
  bool ok = false;
  std::string text;
  int attempts = 0;
  std::string error;
};

Slot draw_one(const RenderedPrompt& prompt, double temperature, LlmProvider& provider,
              int max_retries, int sample_index) {
  Slot slot;
  const int allowed = 1 + std::max(0, max_retries);
  for (int attempt = 1; attempt <= allowed; ++attempt) {
    slot.attempts = attempt;
    try {
      slot.text = provider.complete({prompt.text, prompt.kind, temperature, sample_index, attempt});
      slot.ok = true;
      return slot;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTransport) throw;
      slot.error = e.what();
    }
  }
  return slot;
}

}  // namespace

CompletionBatch sample(const RenderedPrompt& prompt, int n, double temperature,
                       LlmProvider& provider, int max_retries, int first_index) {
  if (n < 1) throw Error(ErrorCode::kContractViolation, "sample count must be >= 1");
  std::vector<Slot> slots(static_cast<std::size_t>(n));
  const std::size_t workers =
      std::min<std::size_t>(std::max<std::size_t>(1, provider.max_in_flight()), slots.size());

  if (workers == 1) {
    for (int i = 0; i < n; ++i) {
      slots[static_cast<std::size_t>(i)] =
          draw_one(prompt, temperature, provider, max_retries, first_index + i);
    }
  } else {
    std::atomic<int> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) {
          try {
            slots[static_cast<std::size_t>(i)] =
                draw_one(prompt, temperature, provider, max_retries, first_index + i);
          } catch (...) {
            std::lock_guard lock(fatal_mu);
            if (!fatal) fatal = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (fatal) std::rethrow_exception(fatal);
  }

  CompletionBatch batch;
  batch.kind = prompt.kind;
  batch.requested = slots.size();
  batch.temperature = temperature;
  for (int i = 0; i < n; ++i) {
    auto& s = slots[static_cast<std::size_t>(i)];
    if (s.ok) {
      batch.outputs.push_back({first_index + i, std::move(s.text), s.attempts});
    } else {
      batch.failures.push_back({first_index + i, s.attempts, std::move(s.error)});
    }
  }
  if (batch.outputs.empty()) {
    throw Error(ErrorCode::kProviderUnavailable,
                "all " + std::to_string(n) + " " + std::string(to_string(prompt.kind)) +
                    " requests failed; last error: " + batch.failures.back().error);
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Mock

namespace {

std::optional<PromptKind> prompt_kind_from_string(std::string_view s) {
  const std::string u = text::to_lower_ascii(s);
  if (u == "qa") return PromptKind::kQa;
  if (u == "selection") return PromptKind::kSelection;
  if (u == "standard") return PromptKind::kStandard;
  return std::nullopt;
}

std::vector<nlohmann::json> output_list(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorCode::kSchema, "mock script: " + where + " must be an array");
  std::vector<nlohmann::json> out;
  for (const auto& o : j) {
    if (!o.is_string() && !(o.is_object() && o.contains("error"))) {
      throw Error(ErrorCode::kSchema,
                  "mock script: " + where + " entries must be strings or {\"error\": ...}");
    }
    out.push_back(o);
  }
  return out;
}

}  // namespace

MockLlmProvider::MockLlmProvider(nlohmann::json script, std::uint64_t seed, std::string model_id)
    : model_id_(std::move(model_id)) {
  if (!script.is_object()) throw Error(ErrorCode::kSchema, "mock script must be a JSON object");
  if (script.contains("model")) model_id_ = script.at("model").get<std::string>();
  if (script.contains("by_hash")) {
    for (const auto& [hash, outs] : script.at("by_hash").items()) {
      by_hash_[text::to_lower_ascii(hash)] = output_list(outs, "by_hash." + hash);
    }
  }
  if (script.contains("rules")) {
    std::size_t n = 0;
    for (const auto& r : script.at("rules")) {
      const std::string where = "rules[" + std::to_string(n++) + "]";
      Rule rule;
      if (r.contains("kind")) {
        rule.kind = prompt_kind_from_string(r.at("kind").get<std::string>());
        if (!rule.kind) throw Error(ErrorCode::kSchema, "mock script: bad kind in " + where);
      }
      if (r.contains("contains")) {
        const auto& c = r.at("contains");
        if (c.is_string()) rule.contains.push_back(c.get<std::string>());
        else rule.contains = c.get<std::vector<std::string>>();
      }
      rule.outputs = output_list(r.at("outputs"), where + ".outputs");
      rule.cycle = r.value("cycle", false);
      if (r.value("shuffle", false)) {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
        std::shuffle(rule.outputs.begin(), rule.outputs.end(), rng);
      }
      rules_.push_back(std::move(rule));
    }
  }
  if (script.contains("sequence")) sequence_ = output_list(script.at("sequence"), "sequence");
}

std::unique_ptr<MockLlmProvider> MockLlmProvider::from_file(const std::string& path,
                                                            std::uint64_t seed) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, "mock script " + path + ": " + e.what());
  }
  return std::make_unique<MockLlmProvider>(std::move(j), seed);
}

std::size_t MockLlmProvider::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string MockLlmProvider::take(std::vector<nlohmann::json>& outputs, std::size_t& cursor,
                                  bool cycle, const std::string& source) {
  if (outputs.empty() || (!cycle && cursor >= outputs.size())) {
    throw TransportError("mock script exhausted: " + source, 1);
  }
  const auto& o = outputs[cursor % outputs.size()];
  ++cursor;
  if (o.is_object()) throw TransportError(o.at("error").get<std::string>(), 1);
  return o.get<std::string>();
}

std::string MockLlmProvider::complete(const CompletionRequest& request) {
  std::lock_guard lock(mu_);
  ++calls_;
  const std::string prompt(request.prompt);
  const std::string hash = text::hex64(text::fnv1a64(prompt));
  if (auto it = by_hash_.find(hash); it != by_hash_.end()) {
    return take(it->second, hash_cursor_[hash], false, "by_hash." + hash);
  }
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    auto& r = rules_[i];
    if (r.kind && *r.kind != request.kind) continue;
    const bool all = std::all_of(r.contains.begin(), r.contains.end(), [&](const std::string& c) {
      return prompt.find(c) != std::string::npos;
    });
    if (!all) continue;
    return take(r.outputs, r.cursor, r.cycle, "rules[" + std::to_string(i) + "]");
  }
  return take(sequence_, sequence_cursor_, false, "sequence");
}

// ---------------------------------------------------------------------------
// Remote

RemoteChatProvider::RemoteChatProvider(LlmProviderConfig config) : config_(std::move(config)) {
  check_config(config_);
  if (config_.endpoint.empty()) {
    throw Error(ErrorCode::kContractViolation, "remote chat provider needs an endpoint");
  }
}

std::string RemoteChatProvider::complete(const CompletionRequest& request) {
  const nlohmann::json body = {
      {"model", config_.model_id},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(request.prompt)}}})},
      {"temperature", request.temperature}};
  std::vector<std::pair<std::string, std::string>> headers;
  const std::string key = http::credential_from_env(config_.api_key_env);
  if (!key.empty()) headers.emplace_back("Authorization", "Bearer " + key);

  const auto resp = http::post_json(config_.endpoint, body.dump(), headers, config_.timeout_s);
  if (resp.status == 429 || resp.status >= 500) {
    throw TransportError("chat endpoint returned HTTP " + std::to_string(resp.status),
                         request.attempt);
  }
  if (resp.status < 200 || resp.status >= 300) {
    throw Error(ErrorCode::kProviderUnavailable,
                "chat endpoint returned HTTP " + std::to_string(resp.status));
  }
  try {
    const auto j = nlohmann::json::parse(resp.body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed chat response: ") + e.what(), request.attempt);
  }
}

std::unique_ptr<LlmProvider> make_llm_provider(const LlmProviderConfig& config, std::uint64_t seed) {
  check_config(config);
  if (config.provider_kind == LlmProviderKind::kMock) {
    if (config.mock_script.empty()) {
      throw Error(ErrorCode::kContractViolation, "mock provider needs llm.mock_script");
    }
    return MockLlmProvider::from_file(config.mock_script, seed);
  }
  return std::make_unique<RemoteChatProvider>(config);
}

}  // namespace clausecheck
