// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "clausecheck/embedding.hpp"
#include "clausecheck/hnsw.hpp"
#include "clausecheck/record_log.hpp"
#include "clausecheck/types.hpp"

namespace clausecheck {

/// Shared mutex that lets a waiting writer in ahead of newly arriving
/// readers, so a steady stream of searches cannot starve inserts.
class WriterPreferringMutex {
 public:
  void lock() {
    std::lock_guard gate(gate_);
    rw_.lock();
  }
  void unlock() { rw_.unlock(); }
  void lock_shared() {
    std::lock_guard gate(gate_);
    rw_.lock_shared();
  }
  void unlock_shared() { rw_.unlock_shared(); }

 private:
  std::mutex gate_;
  std::shared_mutex rw_;
};

enum class SchemaKind { kProjectClauses, kExpertPairs };

std::string_view to_string(SchemaKind k);
std::optional<SchemaKind> schema_kind_from_string(std::string_view s);

inline constexpr std::string_view kProjectCollection = "project_clauses";
inline constexpr std::string_view kExpertCollection = "expert_pairs";

/// Filtered candidate sets at or below this size are scanned exactly instead
/// of walking the graph.
inline constexpr std::size_t kFilteredScanLimit = 1000;

using Payload = std::variant<ClauseChunk, ExpertPair>;
using IdFilter = std::unordered_set<RecordId>;

struct Record {
  RecordId id = 0;
  Payload payload;
  EmbeddingVector embedding;  // unit norm

  const ClauseChunk& clause() const { return std::get<ClauseChunk>(payload); }
  const ExpertPair& pair() const { return std::get<ExpertPair>(payload); }
};

struct RetrievalHit {
  RecordId id = 0;
  double similarity = 0.0;  // larger is better, see ScoredClause
  double distance = 0.0;    // Euclidean
  std::shared_ptr<const Record> record;
};

struct AnnSearchResult {
  std::vector<RetrievalHit> hits;
  bool fell_back_to_exact = false;  // no index was available
  bool filtered_scan = false;       // small filter set was scanned exactly
};

/// One named vector collection backed by an append-only log.
///
/// Many concurrent readers or one writer; searches never observe a partially
/// inserted record.
class Collection {
 public:
  struct Pending {
    Payload payload;
    EmbeddingVector embedding;
    std::optional<RecordId> id;
  };

  /// An empty `log_path` gives an in-memory collection.
  Collection(std::string name, SchemaKind kind, std::size_t dim, HnswParams params,
             std::string log_path = {}, bool auto_index = true, bool sync_writes = true);
  ~Collection();

  const std::string& name() const noexcept { return name_; }
  SchemaKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const;
  bool contains(RecordId id) const;
  std::shared_ptr<const Record> get(RecordId id) const;
  /// Live records in insertion (= id) order.
  std::vector<std::shared_ptr<const Record>> records() const;
  std::size_t log_discarded_bytes() const noexcept { return log_discarded_bytes_; }

  /// Normalizes, persists, then indexes. Returns assigned ids in input order.
  /// Throws if an explicit id is already taken, the payload kind does not
  /// match the collection, or a vector has the wrong dimension.
  std::vector<RecordId> insert(std::vector<Pending> batch);
  RecordId insert_one(Payload payload, const EmbeddingVector& embedding,
                      std::optional<RecordId> id = {});
  /// Writes a tombstone. Returns false if the id is not live.
  bool erase(RecordId id);

  std::vector<RetrievalHit> search_exact(const EmbeddingVector& query, std::size_t k,
                                         Metric metric = Metric::kEuclidean,
                                         const IdFilter* filter = nullptr) const;
  AnnSearchResult search_ann(const EmbeddingVector& query, std::size_t k,
                             Metric metric = Metric::kEuclidean,
                             const IdFilter* filter = nullptr,
                             std::optional<std::size_t> ef_search = {}) const;

  /// Expert collections only: ids whose checkpoint equals `checkpoint_text`
  /// after NFC normalization and trimming.
  IdFilter filter_by_checkpoint(std::string_view checkpoint_text) const;

  void build_index(const HnswParams& params);
  void build_index() { build_index(params_); }
  void drop_index();
  bool has_index() const;
  const HnswParams& params() const noexcept { return params_; }
  /// Invokes `fn` with the graph under a read lock (tests and diagnostics).
  template <typename Fn>
  void inspect_index(Fn&& fn) const {
    std::shared_lock lock(mu_);
    fn(index_.get());
  }

  /// Writes the index cache next to the log if it changed since last saved.
  void save_index() const;
  std::string index_path() const;

 private:
  RecordId next_id_locked() const;
  std::vector<std::size_t> live_slots_locked(const IdFilter* filter) const;
  void apply_put_locked(RecordId id, Payload payload, EmbeddingVector unit);
  void index_node_locked(std::size_t slot);
  bool try_load_index_locked();
  std::vector<RetrievalHit> rank_locked(const EmbeddingVector& unit_query, std::size_t k,
                                        Metric metric,
                                        const std::vector<std::size_t>& slots) const;

  std::string name_;
  SchemaKind kind_;
  std::size_t dim_;
  HnswParams params_;
  std::string log_path_;
  bool auto_index_;
  std::unique_ptr<RecordLog> log_;
  std::size_t log_discarded_bytes_ = 0;

  mutable WriterPreferringMutex mu_;
  std::vector<std::shared_ptr<const Record>> slots_;  // insertion order, never shrinks
  std::vector<bool> alive_;
  std::unordered_map<RecordId, std::size_t> slot_of_;
  std::unordered_map<std::string, std::vector<RecordId>> by_checkpoint_;
  std::size_t live_ = 0;

  std::unique_ptr<HnswIndex> index_;
  std::vector<std::size_t> node_slot_;  // HNSW node -> slot
  mutable bool index_dirty_ = false;
};

struct KbOptions {
  std::size_t dim = kDefaultEmbeddingDim;
  Metric metric = Metric::kEuclidean;
  HnswParams hnsw;
  std::string embedder_model;  // pinned on first ingest when empty
  bool embed_heading = true;
  bool auto_index = true;
  bool sync_writes = true;
};

struct SkippedRow {
  std::size_t line = 0;
  std::string reason;
};

struct IngestionReport {
  std::string collection;
  std::size_t rows_read = 0;
  std::size_t ingested = 0;
  std::vector<RecordId> ids;
  std::vector<SkippedRow> skipped;
  std::vector<std::string> missing_columns;

  bool schema_mismatch() const noexcept { return !missing_columns.empty(); }
};

void to_json(nlohmann::json& j, const IngestionReport& r);

/// A directory holding one log (and one index cache) per collection plus a
/// manifest:
///
///   <dir>/manifest
///   <dir>/project_clauses.log, <dir>/project_clauses.index
///   <dir>/expert_pairs.log,    <dir>/expert_pairs.index
///   <dir>/<other>.log ...
class KnowledgeBase {
 public:
  static std::unique_ptr<KnowledgeBase> create(const std::string& dir, const KbOptions& options);
  static std::unique_ptr<KnowledgeBase> open(const std::string& dir);
  static std::unique_ptr<KnowledgeBase> open_or_create(const std::string& dir,
                                                       const KbOptions& options);
  static std::unique_ptr<KnowledgeBase> in_memory(const KbOptions& options);
  static bool exists(const std::string& dir);

  ~KnowledgeBase();
  KnowledgeBase(const KnowledgeBase&) = delete;
  KnowledgeBase& operator=(const KnowledgeBase&) = delete;

  const KbOptions& options() const noexcept { return options_; }
  const std::string& directory() const noexcept { return dir_; }

  bool has_collection(std::string_view name) const;
  Collection& collection(std::string_view name);
  const Collection& collection(std::string_view name) const;
  Collection& add_collection(const std::string& name, SchemaKind kind);
  std::vector<std::string> collection_names() const;

  Collection& project_clauses() { return collection(kProjectCollection); }
  const Collection& project_clauses() const { return collection(kProjectCollection); }
  Collection& expert_pairs() { return collection(kExpertCollection); }
  const Collection& expert_pairs() const { return collection(kExpertCollection); }

  /// Ingests CSV rows into a collection. Project clause files need columns
  /// Clause_type and Clauses; expert pair files need Checkpoints, Clauses and
  /// Reviews. An optional ID column supplies explicit ids. Bad rows are skipped
  /// and listed; every good row is embedded before anything is written.
  IngestionReport ingest(std::string_view collection_name, std::string_view csv_text,
                         Embedder& embedder, std::string_view source_doc = {});

  /// Embeds, persists and indexes one pair; nothing is written if embedding
  /// fails.
  RecordId add_expert_pair(const ExpertPair& pair, Embedder& embedder,
                           std::string_view collection_name = kExpertCollection);

  void build_indexes(const HnswParams& params);
  /// Persists index caches and the manifest.
  void flush();

  /// Throws unless the embedder matches the manifest's dimension and model.
  void check_embedder(const Embedder& embedder);

 private:
  KnowledgeBase(std::string dir, KbOptions options);
  void write_manifest() const;
  std::string log_path(const std::string& name) const;

  std::string dir_;
  KbOptions options_;
  std::map<std::string, std::unique_ptr<Collection>, std::less<>> collections_;
};

}  // namespace clausecheck
