// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace clausecheck::http {

struct Response {
  int status = 0;
  std::string body;
};

/// POSTs a JSON body to an http:// or https:// URL. Transport failures
/// (connection refused, timeout, TLS errors) throw Error(kTransport); HTTP
/// error statuses are returned to the caller.
Response post_json(const std::string& url, const std::string& body,
                   const std::vector<std::pair<std::string, std::string>>& headers,
                   double timeout_s);

/// Reads a credential from the named environment variable. Empty name or an
/// unset variable yields an empty string.
std::string credential_from_env(const std::string& env_name);

}  // namespace clausecheck::http
