// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/config.hpp"

#include <charconv>
#include <filesystem>
#include <functional>
#include <map>

#include "clausecheck/error.hpp"
#include "clausecheck/text.hpp"

namespace clausecheck {

namespace {

[[noreturn]] void bad(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::kSchema, "config line " + std::to_string(line) + ": " + msg);
}

template <typename T>
T number(std::size_t line, const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) bad(line, key + " expects a number, got '" + v + "'");
  return out;
}

bool boolean(std::size_t line, const std::string& key, const std::string& v) {
  const std::string l = text::to_lower_ascii(v);
  if (l == "true" || l == "yes" || l == "1" || l == "on") return true;
  if (l == "false" || l == "no" || l == "0" || l == "off") return false;
  bad(line, key + " expects true or false, got '" + v + "'");
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (std::filesystem::path(base) / p).lexically_normal().string();
}

}  // namespace

AppConfig parse_config(std::string_view doc, const std::string& base_dir) {
  AppConfig c;
  using Setter = std::function<void(std::size_t, const std::string&, const std::string&)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"embedding.provider",
       [&](std::size_t n, const std::string& k, const std::string& v) {
         const std::string l = text::to_lower_ascii(v);
         if (l == "deterministic" || l == "deterministic_local" || l == "local") {
           c.embedding.provider_kind = EmbeddingProviderKind::kDeterministicLocal;
         } else if (l == "remote") {
           c.embedding.provider_kind = EmbeddingProviderKind::kRemote;
         } else {
           bad(n, k + " must be deterministic or remote");
         }
       }},
      {"embedding.model", [&](auto, auto&, const std::string& v) { c.embedding.model_name = v; }},
      {"embedding.dim",
       [&](std::size_t n, auto& k, auto& v) { c.embedding.dim = number<std::size_t>(n, k, v); }},
      {"embedding.endpoint", [&](auto, auto&, const std::string& v) { c.embedding.endpoint = v; }},
      {"embedding.api_key_env", [&](auto, auto&, const std::string& v) { c.embedding.api_key_env = v; }},
      {"embedding.batch_size",
       [&](std::size_t n, auto& k, auto& v) { c.embedding.batch_size = number<std::size_t>(n, k, v); }},
      {"embedding.max_in_flight",
       [&](std::size_t n, auto& k, auto& v) { c.embedding.max_in_flight = number<std::size_t>(n, k, v); }},
      {"llm.provider",
       [&](std::size_t n, const std::string& k, const std::string& v) {
         const std::string l = text::to_lower_ascii(v);
         if (l == "mock") c.llm.provider_kind = LlmProviderKind::kMock;
         else if (l == "remote" || l == "remote_chat") c.llm.provider_kind = LlmProviderKind::kRemoteChat;
         else bad(n, k + " must be mock or remote");
       }},
      {"llm.mock_script",
       [&](auto, auto&, const std::string& v) { c.llm.mock_script = resolve(base_dir, v); }},
      {"llm.model", [&](auto, auto&, const std::string& v) { c.llm.model_id = v; }},
      {"llm.endpoint", [&](auto, auto&, const std::string& v) { c.llm.endpoint = v; }},
      {"llm.api_key_env", [&](auto, auto&, const std::string& v) { c.llm.api_key_env = v; }},
      {"llm.timeout_s",
       [&](std::size_t n, auto& k, auto& v) { c.llm.timeout_s = number<double>(n, k, v); }},
      {"llm.max_retries",
       [&](std::size_t n, auto& k, auto& v) {
         c.llm.max_retries = number<int>(n, k, v);
         c.pipeline.max_retries = c.llm.max_retries;
       }},
      {"llm.max_in_flight",
       [&](std::size_t n, auto& k, auto& v) { c.llm.max_in_flight = number<std::size_t>(n, k, v); }},
      {"sampling.n_qa",
       [&](std::size_t n, auto& k, auto& v) { c.pipeline.sampling.n_qa_samples = number<int>(n, k, v); }},
      {"sampling.n_vote",
       [&](std::size_t n, auto& k, auto& v) { c.pipeline.sampling.n_vote_samples = number<int>(n, k, v); }},
      {"sampling.temperature",
       [&](std::size_t n, auto& k, auto& v) { c.pipeline.sampling.temperature = number<double>(n, k, v); }},
      {"retrieval.k_clauses",
       [&](std::size_t n, auto& k, auto& v) { c.pipeline.retrieval.k_clauses = number<int>(n, k, v); }},
      {"retrieval.k_pairs",
       [&](std::size_t n, auto& k, auto& v) { c.pipeline.retrieval.k_pairs = number<int>(n, k, v); }},
      {"retrieval.metric",
       [&](std::size_t n, const std::string& k, const std::string& v) {
         auto m = metric_from_string(v);
         if (!m) bad(n, k + " must be euclidean or cosine");
         c.pipeline.retrieval.metric = *m;
       }},
      {"pipeline.strict_two_stage",
       [&](std::size_t n, auto& k, auto& v) { c.pipeline.strict_two_stage = boolean(n, k, v); }},
      {"pipeline.resample_unparseable",
       [&](std::size_t n, auto& k, auto& v) { c.pipeline.resample_unparseable = boolean(n, k, v); }},
      {"templates.dir", [&](auto, auto&, const std::string& v) { c.templates_dir = resolve(base_dir, v); }},
  };

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= doc.size()) {
    std::size_t end = doc.find('\n', start);
    if (end == std::string_view::npos) end = doc.size();
    const std::string_view line = text::trim(doc.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) bad(line_no, "expected key = value");
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string value(text::trim(line.substr(eq + 1)));
    auto it = setters.find(key);
    if (it == setters.end()) bad(line_no, "unknown key '" + key + "'");
    it->second(line_no, key, value);
  }
  check_config(c.llm);
  if (const auto v = validate(c.pipeline.sampling); !v.empty()) {
    throw Error(ErrorCode::kSchema, "config: " + v.violations.front().name);
  }
  if (const auto v = validate(c.pipeline.retrieval); !v.empty()) {
    throw Error(ErrorCode::kSchema, "config: " + v.violations.front().name);
  }
  return c;
}

AppConfig load_config(const std::string& path) {
  const auto base = std::filesystem::absolute(path).parent_path().string();
  return parse_config(text::read_file(path), base);
}

}  // namespace clausecheck
