// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clausecheck/types.hpp"

namespace clausecheck {

SimilarityScore cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);
SimilarityScore euclidean_distance(const EmbeddingVector& a, const EmbeddingVector& b);
EmbeddingVector normalize(const EmbeddingVector& v);

double squared_l2(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);

/// Larger-is-better score for two unit vectors at Euclidean distance d. Equal
/// to their cosine, so descending order matches ascending distance.
constexpr double similarity_from_distance(double d) { return 1.0 - d * d / 2.0; }

enum class EmbeddingProviderKind { kRemote, kDeterministicLocal };

struct EmbeddingProviderConfig {
  EmbeddingProviderKind provider_kind = EmbeddingProviderKind::kDeterministicLocal;
  std::string endpoint;
  std::string model_name = "feature-hash-v1";
  std::size_t dim = kDefaultEmbeddingDim;
  std::string api_key_env;
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
  int max_retries = 2;
  double timeout_s = 60.0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::size_t dim() const = 0;
  virtual const std::string& model_name() const = 0;

  /// One vector per input, in input order, each of length dim(). Throws
  /// Error(kContractViolation) for an empty text.
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) = 0;

  EmbeddingVector embed(std::string_view text);
};

/// Feature-hashing embedder. Each whitespace token is lowercased, stripped of
/// surrounding punctuation, dropped if it is an English stopword, then hashed
/// with FNV-1a (salted by the model name) into one of `dim` buckets with a
/// +/-1 sign. The result is L2-normalized. Pure function of (text, model name).
class DeterministicEmbedder final : public Embedder {
 public:
  explicit DeterministicEmbedder(std::size_t dim = kDefaultEmbeddingDim,
                                 std::string model_name = "feature-hash-v1");

  std::size_t dim() const override { return dim_; }
  const std::string& model_name() const override { return model_name_; }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

  EmbeddingVector embed_one(std::string_view text) const;

 private:
  std::size_t dim_;
  std::string model_name_;
};

/// Client for a JSON embedding endpoint:
///   POST {model, input: [texts]} -> {data: [{index, embedding: [floats]}]}
/// Requests carry at most batch_size texts; at most max_in_flight requests run
/// concurrently across all callers. Returned vectors are not normalized here.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(EmbeddingProviderConfig config);
  ~RemoteEmbedder() override;

  std::size_t dim() const override { return config_.dim; }
  const std::string& model_name() const override { return config_.model_name; }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

 private:
  std::vector<EmbeddingVector> request_batch(std::span<const std::string> texts);

  struct Gate;
  EmbeddingProviderConfig config_;
  std::unique_ptr<Gate> gate_;
};

std::unique_ptr<Embedder> make_embedder(const EmbeddingProviderConfig& config);

/// Convenience wrapper: builds the configured provider and embeds one text.
EmbeddingVector embed_text(std::string_view text, const EmbeddingProviderConfig& config);

}  // namespace clausecheck
