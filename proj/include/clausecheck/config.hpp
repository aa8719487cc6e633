// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "clausecheck/embedding.hpp"
#include "clausecheck/llm_client.hpp"
#include "clausecheck/pipeline.hpp"

namespace clausecheck {

struct AppConfig {
  EmbeddingProviderConfig embedding;
  LlmProviderConfig llm;
  PipelineConfig pipeline;
  std::string templates_dir;  // empty: built-in templates
};

/// Parses a flat `key = value` document. Blank lines and lines starting with
/// '#' are ignored. Relative paths are resolved against `base_dir`.
///
///   embedding.provider       deterministic | remote
///   embedding.model, embedding.dim, embedding.endpoint, embedding.api_key_env
///   embedding.batch_size, embedding.max_in_flight
///   llm.provider             mock | remote
///   llm.mock_script, llm.model, llm.endpoint, llm.api_key_env
///   llm.timeout_s, llm.max_retries, llm.max_in_flight
///   sampling.n_qa, sampling.n_vote, sampling.temperature
///   retrieval.k_clauses, retrieval.k_pairs, retrieval.metric
///   pipeline.strict_two_stage, pipeline.resample_unparseable
///   templates.dir
///
/// Unknown keys and malformed values throw Error(kSchema).
AppConfig parse_config(std::string_view text, const std::string& base_dir = {});
AppConfig load_config(const std::string& path);

}  // namespace clausecheck
