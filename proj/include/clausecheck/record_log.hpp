// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "clausecheck/types.hpp"

namespace clausecheck {

enum class LogOp : std::uint8_t { kPut = 1, kTombstone = 2 };

struct LogEntry {
  LogOp op = LogOp::kPut;
  RecordId id = 0;
  nlohmann::json payload;        // empty for tombstones
  std::vector<double> embedding; // empty for tombstones
};

/// Append-only file of framed records:
///
///   u32 magic | u32 payload length | u32 CRC-32 of payload | CBOR payload
///
/// The log is the source of truth for a collection. Replay stops at the first
/// torn or corrupt frame and truncates the file there, so a crash mid-append
/// loses at most the record being written.
class RecordLog {
 public:
  struct Replay {
    std::vector<LogEntry> entries;
    std::uint64_t valid_bytes = 0;
    std::uint64_t discarded_bytes = 0;
  };

  /// Reads every intact frame. A missing file replays as empty.
  static Replay replay(const std::string& path, bool truncate_torn_tail = true);

  explicit RecordLog(std::string path, bool sync_on_append = true);
  ~RecordLog();
  RecordLog(const RecordLog&) = delete;
  RecordLog& operator=(const RecordLog&) = delete;

  /// Appends all entries, then flushes (and fsyncs when enabled) once.
  void append(std::span<const LogEntry> entries);
  std::uint64_t size_bytes() const noexcept { return size_; }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
  std::FILE* file_ = nullptr;
  std::uint64_t size_ = 0;
  bool sync_;
};

}  // namespace clausecheck
