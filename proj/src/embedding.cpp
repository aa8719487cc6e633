// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/embedding.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <condition_variable>
#include <future>
#include <mutex>

#include "clausecheck/error.hpp"
#include "clausecheck/http_transport.hpp"
#include "clausecheck/text.hpp"

namespace clausecheck {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_l2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

namespace {

void require_same_dim(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "dimension mismatch: " + std::to_string(a.dim()) +
                                                   " vs " + std::to_string(b.dim()));
  }
}

}  // namespace

SimilarityScore cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  require_same_dim(a, b);
  const double na = std::sqrt(dot(a.values, a.values));
  const double nb = std::sqrt(dot(b.values, b.values));
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  const double c = dot(a.values, b.values) / (na * nb);
  return {std::clamp(c, -1.0, 1.0), Metric::kCosine};
}

SimilarityScore euclidean_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  require_same_dim(a, b);
  return {std::sqrt(squared_l2(a.values, b.values)), Metric::kEuclidean};
}

EmbeddingVector normalize(const EmbeddingVector& v) {
  const double n = std::sqrt(dot(v.values, v.values));
  if (n == 0.0 || !std::isfinite(n)) {
    throw Error(ErrorCode::kZeroVector, "cannot normalize a zero or non-finite vector");
  }
  EmbeddingVector out;
  out.values.reserve(v.dim());
  for (double x : v.values) out.values.push_back(x / n);
  return out;
}

EmbeddingVector Embedder::embed(std::string_view text) {
  const std::string t(text);
  auto out = embed_batch(std::span<const std::string>(&t, 1));
  return std::move(out.front());
}

// ---------------------------------------------------------------------------
// Deterministic feature hashing

namespace {

constexpr std::array<std::string_view, 40> kStopwords = {
    "a",    "an",   "and",   "are",  "as",    "at",   "be",   "been", "by",    "for",
    "from", "had",  "has",   "have", "in",    "into", "is",   "it",   "its",   "of",
    "on",   "or",   "shall", "such", "that",  "the",  "their", "then", "there", "these",
    "this", "those", "to",   "was",  "were",  "which", "will", "with", "would", "upon"};

bool is_stopword(std::string_view t) {
  return std::find(kStopwords.begin(), kStopwords.end(), t) != kStopwords.end();
}

std::string normalize_token(std::string_view raw) {
  std::size_t b = 0;
  std::size_t e = raw.size();
  auto punct = [](char c) {
    return static_cast<unsigned char>(c) < 0x80 && std::ispunct(static_cast<unsigned char>(c));
  };
  while (b < e && punct(raw[b])) ++b;
  while (e > b && punct(raw[e - 1])) --e;
  return text::to_lower_ascii(raw.substr(b, e - b));
}

}  // namespace

DeterministicEmbedder::DeterministicEmbedder(std::size_t dim, std::string model_name)
    : dim_(dim), model_name_(std::move(model_name)) {
  if (dim_ == 0) throw Error(ErrorCode::kContractViolation, "embedding dim must be positive");
}

EmbeddingVector DeterministicEmbedder::embed_one(std::string_view input) const {
  const std::string_view trimmed = text::trim(input);
  if (trimmed.empty()) throw Error(ErrorCode::kContractViolation, "cannot embed empty text");

  const std::uint64_t salt = text::fnv1a64(model_name_);
  EmbeddingVector v;
  v.values.assign(dim_, 0.0);
  auto hit = [&](std::string_view feature) {
    const std::uint64_t h = text::fnv1a64(feature, salt);
    const std::size_t bucket = static_cast<std::size_t>((h >> 1) % dim_);
    v.values[bucket] += (h & 1U) ? 1.0 : -1.0;
  };

  bool any = false;
  for (std::string_view raw : text::split_whitespace(trimmed)) {
    const std::string tok = normalize_token(raw);
    if (tok.empty() || is_stopword(tok)) continue;
    hit(tok);
    any = true;
  }
  // Text made only of stopwords or punctuation still gets a stable direction,
  // and so does text whose token hits cancel exactly.
  if (!any || std::all_of(v.values.begin(), v.values.end(), [](double x) { return x == 0.0; })) {
    std::fill(v.values.begin(), v.values.end(), 0.0);
    hit(trimmed);
  }
  return normalize(v);
}

std::vector<EmbeddingVector> DeterministicEmbedder::embed_batch(
    std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

// ---------------------------------------------------------------------------
// Remote provider

struct RemoteEmbedder::Gate {
  explicit Gate(std::size_t n) : available(n) {}
  std::mutex mu;
  std::condition_variable cv;
  std::size_t available;

  void acquire() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return available > 0; });
    --available;
  }
  void release() {
    {
      std::lock_guard lock(mu);
      ++available;
    }
    cv.notify_one();
  }
};

RemoteEmbedder::RemoteEmbedder(EmbeddingProviderConfig config)
    : config_(std::move(config)),
      gate_(std::make_unique<Gate>(std::max<std::size_t>(1, config_.max_in_flight))) {
  if (config_.endpoint.empty()) {
    throw Error(ErrorCode::kContractViolation, "remote embedder needs an endpoint");
  }
  if (config_.batch_size == 0) config_.batch_size = 64;
}

RemoteEmbedder::~RemoteEmbedder() = default;

std::vector<EmbeddingVector> RemoteEmbedder::request_batch(std::span<const std::string> texts) {
  nlohmann::json req = {{"model", config_.model_name},
                        {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const std::string body = req.dump();
  std::vector<std::pair<std::string, std::string>> headers;
  const std::string key = http::credential_from_env(config_.api_key_env);
  if (!key.empty()) headers.emplace_back("Authorization", "Bearer " + key);

  const int attempts_allowed = 1 + std::max(0, config_.max_retries);
  std::string last_error;
  int attempt = 0;
  while (attempt < attempts_allowed) {
    ++attempt;
    http::Response res;
    gate_->acquire();
    try {
      res = http::post_json(config_.endpoint, body, headers, config_.timeout_s);
    } catch (const Error& e) {
      gate_->release();
      last_error = e.what();
      continue;
    }
    gate_->release();

    if (res.status == 429 || res.status >= 500) {
      last_error = "HTTP " + std::to_string(res.status);
      continue;
    }
    if (res.status < 200 || res.status >= 300) {
      throw TransportError("embedding endpoint returned HTTP " + std::to_string(res.status),
                           attempt);
    }

    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(res.body);
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("malformed embedding response: ") + e.what(), attempt);
    }
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<bool> filled(texts.size(), false);
    for (const auto& item : parsed.at("data")) {
      const auto index = item.at("index").get<std::size_t>();
      if (index >= texts.size()) {
        throw Error(ErrorCode::kSchema, "embedding response index out of range");
      }
      out[index].values = item.at("embedding").get<std::vector<double>>();
      if (out[index].dim() != config_.dim) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "provider returned dim " + std::to_string(out[index].dim()) + ", expected " +
                        std::to_string(config_.dim));
      }
      filled[index] = true;
    }
    if (std::find(filled.begin(), filled.end(), false) != filled.end()) {
      throw Error(ErrorCode::kSchema, "embedding response is missing inputs");
    }
    return out;
  }
  throw TransportError("embedding request failed after " + std::to_string(attempt) +
                           " attempts: " + last_error,
                       attempt);
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(std::span<const std::string> texts) {
  for (const auto& t : texts) {
    if (text::trim(t).empty()) throw Error(ErrorCode::kContractViolation, "cannot embed empty text");
  }
  std::vector<std::future<std::vector<EmbeddingVector>>> pending;
  for (std::size_t start = 0; start < texts.size(); start += config_.batch_size) {
    const auto chunk = texts.subspan(start, std::min(config_.batch_size, texts.size() - start));
    pending.push_back(std::async(std::launch::async, [this, chunk] { return request_batch(chunk); }));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (auto& f : pending) {
    for (auto& v : f.get()) out.push_back(std::move(v));
  }
  return out;
}

std::unique_ptr<Embedder> make_embedder(const EmbeddingProviderConfig& config) {
  if (config.provider_kind == EmbeddingProviderKind::kRemote) {
    return std::make_unique<RemoteEmbedder>(config);
  }
  return std::make_unique<DeterministicEmbedder>(config.dim, config.model_name);
}

EmbeddingVector embed_text(std::string_view text, const EmbeddingProviderConfig& config) {
  return make_embedder(config)->embed(text);
}

}  // namespace clausecheck
