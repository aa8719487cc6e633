// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "clausecheck/http_transport.hpp"

#include <cmath>
#include <cstdlib>

#include "clausecheck/error.hpp"

namespace clausecheck::http {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kContractViolation, "endpoint is not an absolute URL: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

Response post_json(const std::string& url, const std::string& body,
                   const std::vector<std::pair<std::string, std::string>>& headers,
                   double timeout_s) {
  const SplitUrl parts = split_url(url);
  httplib::Client client(parts.origin);
  const auto seconds = static_cast<time_t>(std::floor(timeout_s));
  const auto micros = static_cast<time_t>((timeout_s - std::floor(timeout_s)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  httplib::Headers hdrs;
  for (const auto& [k, v] : headers) hdrs.emplace(k, v);
  auto res = client.Post(parts.path, hdrs, body, "application/json");
  if (!res) {
    throw Error(ErrorCode::kTransport,
                "request to " + parts.origin + " failed: " + httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

std::string credential_from_env(const std::string& env_name) {
  if (env_name.empty()) return {};
  const char* v = std::getenv(env_name.c_str());
  return v ? std::string(v) : std::string();
}

}  // namespace clausecheck::http
