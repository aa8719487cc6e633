// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/record_log.hpp"

#include <unistd.h>
#include <zlib.h>

#include <cstring>
#include <filesystem>

#include "clausecheck/error.hpp"
#include "clausecheck/text.hpp"

namespace clausecheck {

namespace {

constexpr std::uint32_t kFrameMagic = 0x474c4343;  // "CCLG" little-endian
constexpr std::size_t kHeaderBytes = 12;
constexpr std::uint32_t kMaxPayload = 1U << 28;

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
  return static_cast<std::uint32_t>(::crc32(0L, data, static_cast<uInt>(n)));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<std::uint8_t> encode_payload(const LogEntry& e) {
  nlohmann::json j = {{"op", static_cast<int>(e.op)}, {"id", e.id}};
  if (e.op == LogOp::kPut) {
    j["payload"] = e.payload;
    j["embedding"] = e.embedding;
  }
  return nlohmann::json::to_cbor(j);
}

LogEntry decode_payload(const std::uint8_t* data, std::size_t n) {
  const auto j = nlohmann::json::from_cbor(data, data + n);
  LogEntry e;
  e.op = static_cast<LogOp>(j.at("op").get<int>());
  e.id = j.at("id").get<RecordId>();
  if (e.op == LogOp::kPut) {
    e.payload = j.at("payload");
    e.embedding = j.at("embedding").get<std::vector<double>>();
  } else if (e.op != LogOp::kTombstone) {
    throw Error(ErrorCode::kCorruptData, "unknown log op");
  }
  return e;
}

}  // namespace

RecordLog::Replay RecordLog::replay(const std::string& path, bool truncate_torn_tail) {
  Replay out;
  if (!std::filesystem::exists(path)) return out;
  const std::string raw = text::read_file(path);
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(raw.data());
  std::size_t pos = 0;
  while (pos + kHeaderBytes <= raw.size()) {
    const std::uint32_t magic = get_u32(bytes + pos);
    const std::uint32_t len = get_u32(bytes + pos + 4);
    const std::uint32_t crc = get_u32(bytes + pos + 8);
    if (magic != kFrameMagic || len > kMaxPayload || pos + kHeaderBytes + len > raw.size()) break;
    const std::uint8_t* payload = bytes + pos + kHeaderBytes;
    if (crc32_of(payload, len) != crc) break;
    try {
      out.entries.push_back(decode_payload(payload, len));
    } catch (const std::exception&) {
      break;
    }
    pos += kHeaderBytes + len;
  }
  out.valid_bytes = pos;
  out.discarded_bytes = raw.size() - pos;
  if (out.discarded_bytes > 0 && truncate_torn_tail) {
    std::filesystem::resize_file(path, pos);
  }
  return out;
}

RecordLog::RecordLog(std::string path, bool sync_on_append) : path_(std::move(path)), sync_(sync_on_append) {
  file_ = std::fopen(path_.c_str(), "ab");
  if (!file_) throw Error(ErrorCode::kIo, "cannot open log " + path_ + ": " + std::strerror(errno));
  size_ = std::filesystem::file_size(path_);
}

RecordLog::~RecordLog() {
  if (file_) std::fclose(file_);
}

void RecordLog::append(std::span<const LogEntry> entries) {
  std::string buf;
  for (const auto& e : entries) {
    const auto payload = encode_payload(e);
    put_u32(buf, kFrameMagic);
    put_u32(buf, static_cast<std::uint32_t>(payload.size()));
    put_u32(buf, crc32_of(payload.data(), payload.size()));
    buf.append(reinterpret_cast<const char*>(payload.data()), payload.size());
  }
  if (buf.empty()) return;
  if (std::fwrite(buf.data(), 1, buf.size(), file_) != buf.size() || std::fflush(file_) != 0) {
    throw Error(ErrorCode::kIo, "write to " + path_ + " failed");
  }
  if (sync_) ::fsync(::fileno(file_));
  size_ += buf.size();
}

}  // namespace clausecheck
