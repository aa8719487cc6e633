// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clausecheck {

enum class ErrorCode {
  kContractViolation,
  kDimensionMismatch,
  kZeroVector,
  kTransport,
  kEmptyProjectBase,
  kProviderUnavailable,
  kNoSuggestions,
  kIo,
  kSchema,
  kCorruptData,
  kTemplate,
  kNotFound,
};

std::string_view to_string(ErrorCode code);

/// Base exception for everything thrown by the library. The code is stable and
/// is what reports and exit statuses key off.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// A remote call failed after exhausting its retry budget.
class TransportError : public Error {
 public:
  TransportError(const std::string& message, int attempts)
      : Error(ErrorCode::kTransport, message), attempts_(attempts) {}

  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

}  // namespace clausecheck
