#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>

#include "../http_stub.hpp"
#include "../oracles.hpp"
#include "clausecheck/embedding.hpp"
#include "clausecheck/error.hpp"

using namespace clausecheck;
using nlohmann::json;

TEST_CASE("cosine and euclidean hand-computed values") {
  const EmbeddingVector x{{1.0, 0.0}}, y{{0.0, 1.0}}, d{{1.0, 1.0}};
  CHECK(cosine_similarity(x, y).value == 0.0);
  CHECK(std::abs(cosine_similarity(d, x).value - 0.70710678) < 1e-8);
  CHECK(std::abs(euclidean_distance(x, y).value - std::sqrt(2.0)) < 1e-9);
  CHECK(euclidean_distance(d, d).value == 0.0);
  CHECK(cosine_similarity(d, x).metric == Metric::kCosine);
  CHECK(euclidean_distance(d, x).metric == Metric::kEuclidean);

  std::mt19937_64 rng(5);
  const EmbeddingVector v{oracle::random_unit(rng, 37)};
  CHECK(std::abs(cosine_similarity(v, v).value - 1.0) < 1e-9);
}

TEST_CASE("similarity errors") {
  const EmbeddingVector a{{1.0, 0.0}}, b{{1.0, 0.0, 0.0}}, z{{0.0, 0.0}};
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kNotFound;
  };
  CHECK(code_of([&] { cosine_similarity(a, b); }) == ErrorCode::kDimensionMismatch);
  CHECK(code_of([&] { euclidean_distance(a, b); }) == ErrorCode::kDimensionMismatch);
  CHECK(code_of([&] { cosine_similarity(a, z); }) == ErrorCode::kZeroVector);
  CHECK(code_of([&] { normalize(z); }) == ErrorCode::kZeroVector);
}

TEST_CASE("normalize preserves direction and gives unit norm") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 10.0);
  for (int t = 0; t < 200; ++t) {
    EmbeddingVector v;
    for (int i = 0; i < 17; ++i) v.values.push_back(g(rng));
    const auto u = normalize(v);
    double n = 0.0;
    for (double x : u.values) n += x * x;
    CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-6);
    CHECK(cosine_similarity(u, v).value == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("property: unit-vector identity d^2 = 2 - 2cos, symmetry, scale invariance") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 1000; ++t) {
    const EmbeddingVector a{oracle::random_unit(rng, 64)}, b{oracle::random_unit(rng, 64)};
    const double c = cosine_similarity(a, b).value;
    const double d = euclidean_distance(a, b).value;
    CHECK(std::abs(d * d - (2.0 - 2.0 * c)) < 1e-9);
    CHECK(cosine_similarity(b, a).value == doctest::Approx(c).epsilon(1e-15));
    CHECK(euclidean_distance(b, a).value == d);
    EmbeddingVector scaled = a;
    for (auto& x : scaled.values) x *= 3.7;
    CHECK(std::abs(cosine_similarity(scaled, b).value - c) < 1e-12);
    CHECK(std::abs(similarity_from_distance(d) - c) < 1e-9);
  }
}

TEST_CASE("deterministic embedder is pure in (text, model name)") {
  DeterministicEmbedder e(1536), e2(1536), other(1536, "feature-hash-v2");
  const auto a = e.embed("x");
  CHECK(a == e.embed("x"));
  CHECK(a == e2.embed("x"));
  CHECK(a.dim() == 1536);
  CHECK(validate(a, 1536, true).empty());
  CHECK_FALSE(a == other.embed("x"));
  // Case, surrounding punctuation and token order do not matter.
  CHECK(e.embed("Financial Close, Commencement.") == e.embed("commencement financial close"));
  CHECK_THROWS_AS(e.embed("   "), Error);
  // Stopword-only text still maps to a unit vector.
  CHECK(validate(e.embed("the of and"), 1536, true).empty());

  EmbeddingProviderConfig cfg;
  cfg.dim = 256;
  CHECK(embed_text("payment terms", cfg) == DeterministicEmbedder(256).embed("payment terms"));
}

TEST_CASE("property: 90% token overlap is closer than disjoint tokens") {
  DeterministicEmbedder e(1536);
  std::mt19937_64 rng(31);
  for (int t = 0; t < 100; ++t) {
    // Synthetic vocabulary, disjoint per role so the third text shares nothing.
    auto token = [&](const char* prefix) { return std::string(prefix) + std::to_string(rng() % 1000000); };
    std::vector<std::string> base;
    for (int i = 0; i < 20; ++i) base.push_back(token("w"));
    std::vector<std::string> near = base;
    near[0] = token("n");
    near[1] = token("n");
    std::vector<std::string> far;
    for (int i = 0; i < 20; ++i) far.push_back(token("f"));
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& w : v) s += w + " ";
      return s;
    };
    const auto va = e.embed(join(base)), vn = e.embed(join(near)), vf = e.embed(join(far));
    CHECK(cosine_similarity(va, vn).value > cosine_similarity(va, vf).value);
  }
}

TEST_CASE("remote embedder: batching, bearer credential and ordering") {
  std::atomic<int> requests{0};
  std::atomic<bool> saw_key{false};
  testing::HttpStub stub("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    ++requests;
    if (req.get_header_value("Authorization") == "Bearer sk-test-123") saw_key = true;
    const auto body = json::parse(req.body);
    json data = json::array();
    const auto& input = body.at("input");
    CHECK(input.size() <= 3);
    // Answer in reverse to exercise index handling.
    for (std::size_t i = input.size(); i-- > 0;) {
      const auto len = static_cast<double>(input[i].get<std::string>().size());
      data.push_back({{"index", i}, {"embedding", {len, 1.0, 0.0, 0.0}}});
    }
    res.set_content(json{{"data", data}}.dump(), "application/json");
  });
  ::setenv("CLAUSECHECK_TEST_EMBED_KEY", "sk-test-123", 1);
  EmbeddingProviderConfig cfg;
  cfg.provider_kind = EmbeddingProviderKind::kRemote;
  cfg.endpoint = stub.url("/v1/embeddings");
  cfg.dim = 4;
  cfg.batch_size = 3;
  cfg.api_key_env = "CLAUSECHECK_TEST_EMBED_KEY";
  cfg.timeout_s = 5;
  auto emb = make_embedder(cfg);
  const std::vector<std::string> texts = {"a", "bb", "ccc", "dddd", "eeeee", "ffffff", "g"};
  const auto out = emb->embed_batch(texts);
  REQUIRE(out.size() == texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    CHECK(out[i].values[0] == static_cast<double>(texts[i].size()));
  }
  CHECK(requests == 3);
  CHECK(saw_key);
  ::unsetenv("CLAUSECHECK_TEST_EMBED_KEY");
}

TEST_CASE("remote embedder: retries 5xx, then reports attempts") {
  std::atomic<int> calls{0};
  testing::HttpStub stub("/e", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 503;
  });
  EmbeddingProviderConfig cfg;
  cfg.provider_kind = EmbeddingProviderKind::kRemote;
  cfg.endpoint = stub.url("/e");
  cfg.dim = 4;
  cfg.max_retries = 2;
  cfg.timeout_s = 5;
  RemoteEmbedder emb(cfg);
  try {
    emb.embed("text");
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(e.attempts() == 3);
    CHECK(e.code() == ErrorCode::kTransport);
  }
  CHECK(calls == 3);
}

TEST_CASE("remote embedder: wrong dimension is rejected") {
  testing::HttpStub stub("/e", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"data":[{"index":0,"embedding":[1,2]}]})", "application/json");
  });
  EmbeddingProviderConfig cfg;
  cfg.provider_kind = EmbeddingProviderKind::kRemote;
  cfg.endpoint = stub.url("/e");
  cfg.dim = 1536;
  cfg.timeout_s = 5;
  RemoteEmbedder emb(cfg);
  try {
    emb.embed("text");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
}

TEST_CASE("remote embedder: accepts a 1536-dimension response") {
  testing::HttpStub stub("/e", [&](const httplib::Request&, httplib::Response& res) {
    json emb = json::array();
    for (int i = 0; i < 1536; ++i) emb.push_back(i == 7 ? 1.0 : 0.0);
    res.set_content(json{{"data", {{{"index", 0}, {"embedding", emb}}}}}.dump(), "application/json");
  });
  EmbeddingProviderConfig cfg;
  cfg.provider_kind = EmbeddingProviderKind::kRemote;
  cfg.endpoint = stub.url("/e");
  cfg.timeout_s = 5;
  const auto v = embed_text("x", cfg);
  CHECK(v.dim() == 1536);
  CHECK(validate(v, 1536).empty());
}

TEST_CASE("remote embedder: unreachable endpoint is a retryable transport error") {
  EmbeddingProviderConfig cfg;
  cfg.provider_kind = EmbeddingProviderKind::kRemote;
  cfg.endpoint = "http://127.0.0.1:1/e";
  cfg.dim = 4;
  cfg.max_retries = 1;
  cfg.timeout_s = 1;
  RemoteEmbedder emb(cfg);
  try {
    emb.embed("x");
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(e.attempts() == 2);
  }
}
