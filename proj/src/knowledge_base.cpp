// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/knowledge_base.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>

#include "clausecheck/chunker.hpp"
#include "clausecheck/csv.hpp"
#include "clausecheck/error.hpp"
#include "clausecheck/text.hpp"

namespace fs = std::filesystem;

namespace clausecheck {

std::string_view to_string(SchemaKind k) {
  return k == SchemaKind::kExpertPairs ? "EXPERT_PAIRS" : "PROJECT_CLAUSES";
}

std::optional<SchemaKind> schema_kind_from_string(std::string_view s) {
  const std::string lower = text::to_lower_ascii(s);
  if (lower == "project_clauses" || lower == "clauses" || lower == "project") {
    return SchemaKind::kProjectClauses;
  }
  if (lower == "expert_pairs" || lower == "pairs" || lower == "expert") {
    return SchemaKind::kExpertPairs;
  }
  return std::nullopt;
}

namespace {

constexpr char kIndexMagic[8] = {'C', 'C', 'I', 'D', 'X', '0', '0', '1'};

nlohmann::json payload_to_json(const Payload& p) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, p);
}

Payload payload_from_json(SchemaKind kind, const nlohmann::json& j) {
  if (kind == SchemaKind::kProjectClauses) return j.get<ClauseChunk>();
  return j.get<ExpertPair>();
}

bool payload_matches(SchemaKind kind, const Payload& p) {
  return (kind == SchemaKind::kProjectClauses) == std::holds_alternative<ClauseChunk>(p);
}

void set_payload_id(Payload& p, RecordId id) {
  std::visit([id](auto& v) { v.id = id; }, p);
}

nlohmann::json hnsw_to_json(const HnswParams& p) {
  return {{"max_degree", p.max_degree},
          {"ef_search", p.ef_search},
          {"ef_construction", p.ef_construction},
          {"level_multiplier", p.level_multiplier},
          {"seed", p.seed}};
}

HnswParams hnsw_from_json(const nlohmann::json& j) {
  HnswParams p;
  j.at("max_degree").get_to(p.max_degree);
  j.at("ef_search").get_to(p.ef_search);
  j.at("ef_construction").get_to(p.ef_construction);
  j.at("level_multiplier").get_to(p.level_multiplier);
  j.at("seed").get_to(p.seed);
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Collection

Collection::Collection(std::string name, SchemaKind kind, std::size_t dim, HnswParams params,
                       std::string log_path, bool auto_index, bool sync_writes)
    : name_(std::move(name)),
      kind_(kind),
      dim_(dim),
      params_(params),
      log_path_(std::move(log_path)),
      auto_index_(auto_index) {
  check_params(params_);
  std::unique_lock lock(mu_);
  if (!log_path_.empty()) {
    auto replay = RecordLog::replay(log_path_);
    log_discarded_bytes_ = replay.discarded_bytes;
    for (auto& e : replay.entries) {
      if (e.op == LogOp::kPut) {
        if (slot_of_.count(e.id)) continue;
        EmbeddingVector v{std::move(e.embedding)};
        if (v.dim() != dim_) {
          throw Error(ErrorCode::kCorruptData, "record " + std::to_string(e.id) + " in " +
                                                   log_path_ + " has dim " +
                                                   std::to_string(v.dim()));
        }
        apply_put_locked(e.id, payload_from_json(kind_, e.payload), std::move(v));
      } else {
        auto it = slot_of_.find(e.id);
        if (it == slot_of_.end() || !alive_[it->second]) continue;
        alive_[it->second] = false;
        --live_;
        if (kind_ == SchemaKind::kExpertPairs) {
          auto& ids = by_checkpoint_[text::checkpoint_key(slots_[it->second]->pair().checkpoint_text)];
          ids.erase(std::remove(ids.begin(), ids.end(), e.id), ids.end());
        }
      }
    }
    log_ = std::make_unique<RecordLog>(log_path_, sync_writes);
  }
  if (auto_index_ && !try_load_index_locked()) {
    index_ = std::make_unique<HnswIndex>(dim_, params_);
    node_slot_.clear();
    for (std::size_t s = 0; s < slots_.size(); ++s) {
      if (alive_[s]) index_node_locked(s);
    }
  }
}

Collection::~Collection() {
  try {
    save_index();
  } catch (...) {
    // The index is a cache; a failed save only costs a rebuild on next open.
  }
}

std::size_t Collection::size() const {
  std::shared_lock lock(mu_);
  return live_;
}

bool Collection::contains(RecordId id) const {
  std::shared_lock lock(mu_);
  auto it = slot_of_.find(id);
  return it != slot_of_.end() && alive_[it->second];
}

std::shared_ptr<const Record> Collection::get(RecordId id) const {
  std::shared_lock lock(mu_);
  auto it = slot_of_.find(id);
  if (it == slot_of_.end() || !alive_[it->second]) return nullptr;
  return slots_[it->second];
}

std::vector<std::shared_ptr<const Record>> Collection::records() const {
  std::shared_lock lock(mu_);
  std::vector<std::shared_ptr<const Record>> out;
  out.reserve(live_);
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    if (alive_[s]) out.push_back(slots_[s]);
  }
  return out;
}

RecordId Collection::next_id_locked() const {
  RecordId max_id = 0;
  for (const auto& [id, slot] : slot_of_) max_id = std::max(max_id, id);
  return max_id + 1;
}

void Collection::apply_put_locked(RecordId id, Payload payload, EmbeddingVector unit) {
  set_payload_id(payload, id);
  auto rec = std::make_shared<Record>();
  rec->id = id;
  rec->payload = std::move(payload);
  rec->embedding = std::move(unit);
  const std::size_t slot = slots_.size();
  if (kind_ == SchemaKind::kExpertPairs) {
    by_checkpoint_[text::checkpoint_key(rec->pair().checkpoint_text)].push_back(id);
  }
  slots_.push_back(std::move(rec));
  alive_.push_back(true);
  slot_of_[id] = slot;
  ++live_;
}

void Collection::index_node_locked(std::size_t slot) {
  const auto& rec = *slots_[slot];
  index_->add(rec.embedding.values, static_cast<std::uint64_t>(rec.id));
  node_slot_.push_back(slot);
  index_dirty_ = true;
}

std::vector<RecordId> Collection::insert(std::vector<Pending> batch) {
  std::unique_lock lock(mu_);
  RecordId next = next_id_locked();
  std::unordered_set<RecordId> taken;
  std::vector<RecordId> ids;
  std::vector<EmbeddingVector> units;
  ids.reserve(batch.size());
  units.reserve(batch.size());

  // Validate everything before the first byte hits the log.
  for (auto& p : batch) {
    if (!payload_matches(kind_, p.payload)) {
      throw Error(ErrorCode::kContractViolation, "payload kind does not match collection " + name_);
    }
    if (p.embedding.dim() != dim_) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "collection " + name_ + " expects dim " + std::to_string(dim_) + ", got " +
                      std::to_string(p.embedding.dim()));
    }
    RecordId id;
    if (p.id) {
      id = *p.id;
      if (slot_of_.count(id) || taken.count(id)) {
        throw Error(ErrorCode::kContractViolation, "duplicate id " + std::to_string(id));
      }
    } else {
      while (slot_of_.count(next) || taken.count(next)) ++next;
      id = next++;
    }
    taken.insert(id);
    ids.push_back(id);
    units.push_back(normalize(p.embedding));
  }

  if (log_) {
    std::vector<LogEntry> entries;
    entries.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      set_payload_id(batch[i].payload, ids[i]);
      entries.push_back({LogOp::kPut, ids[i], payload_to_json(batch[i].payload), units[i].values});
    }
    log_->append(entries);
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    apply_put_locked(ids[i], std::move(batch[i].payload), std::move(units[i]));
    if (index_) index_node_locked(slots_.size() - 1);
  }
  return ids;
}

RecordId Collection::insert_one(Payload payload, const EmbeddingVector& embedding,
                                std::optional<RecordId> id) {
  std::vector<Pending> batch;
  batch.push_back({std::move(payload), embedding, id});
  return insert(std::move(batch)).front();
}

bool Collection::erase(RecordId id) {
  std::unique_lock lock(mu_);
  auto it = slot_of_.find(id);
  if (it == slot_of_.end() || !alive_[it->second]) return false;
  if (log_) {
    const LogEntry tomb{LogOp::kTombstone, id, {}, {}};
    log_->append(std::span<const LogEntry>(&tomb, 1));
  }
  alive_[it->second] = false;
  --live_;
  if (kind_ == SchemaKind::kExpertPairs) {
    auto& ids = by_checkpoint_[text::checkpoint_key(slots_[it->second]->pair().checkpoint_text)];
    ids.erase(std::remove(ids.begin(), ids.end(), id), ids.end());
  }
  index_dirty_ = true;
  return true;
}

std::vector<RetrievalHit> Collection::rank_locked(const EmbeddingVector& unit_query, std::size_t k,
                                                  Metric metric,
                                                  const std::vector<std::size_t>& slots) const {
  struct Scored {
    double key;  // ascending is better
    RecordId id;
    double distance;
    double cosine;
    std::size_t slot;
  };
  std::vector<Scored> scored;
  scored.reserve(slots.size());
  for (std::size_t s : slots) {
    const auto& rec = *slots_[s];
    const double distance = std::sqrt(squared_l2(unit_query.values, rec.embedding.values));
    const double cosine = dot(unit_query.values, rec.embedding.values);
    const double key = metric == Metric::kCosine ? -cosine : distance;
    scored.push_back({key, rec.id, distance, cosine, s});
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), [](const Scored& a, const Scored& b) {
                      return a.key < b.key || (a.key == b.key && a.id < b.id);
                    });
  std::vector<RetrievalHit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const auto& sc = scored[i];
    const double sim =
        metric == Metric::kCosine ? sc.cosine : similarity_from_distance(sc.distance);
    hits.push_back({sc.id, sim, sc.distance, slots_[sc.slot]});
  }
  return hits;
}

std::vector<RetrievalHit> Collection::search_exact(const EmbeddingVector& query, std::size_t k,
                                                   Metric metric, const IdFilter* filter) const {
  if (query.dim() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "query dim " + std::to_string(query.dim()) +
                                                   " for collection dim " + std::to_string(dim_));
  }
  const EmbeddingVector unit = normalize(query);
  std::shared_lock lock(mu_);
  return rank_locked(unit, k, metric, live_slots_locked(filter));
}

std::vector<std::size_t> Collection::live_slots_locked(const IdFilter* filter) const {
  std::vector<std::size_t> slots;
  slots.reserve(live_);
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    if (alive_[s] && (!filter || filter->count(slots_[s]->id))) slots.push_back(s);
  }
  return slots;
}

AnnSearchResult Collection::search_ann(const EmbeddingVector& query, std::size_t k,
                                       Metric metric, const IdFilter* filter,
                                       std::optional<std::size_t> ef_search) const {
  if (query.dim() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "query dim " + std::to_string(query.dim()) +
                                                   " for collection dim " + std::to_string(dim_));
  }
  const EmbeddingVector unit = normalize(query);
  AnnSearchResult out;
  std::shared_lock lock(mu_);
  out.fell_back_to_exact = !index_;
  out.filtered_scan = index_ && filter && filter->size() <= kFilteredScanLimit;
  if (out.fell_back_to_exact || out.filtered_scan) {
    out.hits = rank_locked(unit, k, metric, live_slots_locked(filter));
    return out;
  }
  HnswIndex::Accept accept;
  const bool has_dead = live_ != node_slot_.size();
  if (filter || has_dead) {
    accept = [this, filter](std::uint32_t node) {
      const std::size_t slot = node_slot_[node];
      return alive_[slot] && (!filter || filter->count(slots_[slot]->id) > 0);
    };
  }
  // Rank the whole beam so equal distances fall back to the id rule, as in
  // the exact scan.
  const std::size_t ef = std::max(k, ef_search.value_or(params_.ef_search));
  const auto found = index_->search(unit.values, ef, ef, accept);
  std::vector<std::size_t> slots;
  slots.reserve(found.size());
  for (const auto& n : found) slots.push_back(node_slot_[n.node]);
  out.hits = rank_locked(unit, k, metric, slots);
  return out;
}

IdFilter Collection::filter_by_checkpoint(std::string_view checkpoint_text) const {
  if (kind_ != SchemaKind::kExpertPairs) {
    throw Error(ErrorCode::kContractViolation,
                "checkpoint filter needs an expert-pair collection, " + name_ + " is not one");
  }
  std::shared_lock lock(mu_);
  auto it = by_checkpoint_.find(text::checkpoint_key(checkpoint_text));
  if (it == by_checkpoint_.end()) return {};
  return IdFilter(it->second.begin(), it->second.end());
}

void Collection::build_index(const HnswParams& params) {
  check_params(params);
  std::unique_lock lock(mu_);
  params_ = params;
  index_ = std::make_unique<HnswIndex>(dim_, params_);
  node_slot_.clear();
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    if (alive_[s]) index_node_locked(s);
  }
  index_dirty_ = true;
}

void Collection::drop_index() {
  std::unique_lock lock(mu_);
  index_.reset();
  node_slot_.clear();
  index_dirty_ = false;
  if (!log_path_.empty()) fs::remove(index_path());
}

bool Collection::has_index() const {
  std::shared_lock lock(mu_);
  return index_ != nullptr;
}

std::string Collection::index_path() const {
  fs::path p(log_path_);
  p.replace_extension(".index");
  return p.string();
}

void Collection::save_index() const {
  std::shared_lock lock(mu_);
  if (!index_ || !index_dirty_ || log_path_.empty() || !log_) return;
  const std::string path = index_path();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
    out.write(kIndexMagic, sizeof(kIndexMagic));
    const std::uint64_t log_bytes = log_->size_bytes();
    const std::uint64_t nodes = node_slot_.size();
    out.write(reinterpret_cast<const char*>(&log_bytes), sizeof(log_bytes));
    out.write(reinterpret_cast<const char*>(&nodes), sizeof(nodes));
    for (std::size_t slot : node_slot_) {
      const RecordId id = slots_[slot]->id;
      out.write(reinterpret_cast<const char*>(&id), sizeof(id));
    }
    index_->save(out);
    if (!out) throw Error(ErrorCode::kIo, "failed writing " + tmp);
  }
  fs::rename(tmp, path);
  index_dirty_ = false;
}

bool Collection::try_load_index_locked() {
  if (log_path_.empty() || !log_) return false;
  const std::string path = index_path();
  if (!fs::exists(path)) return false;
  try {
    std::ifstream in(path, std::ios::binary);
    char magic[sizeof(kIndexMagic)];
    in.read(magic, sizeof(magic));
    if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kIndexMagic))) return false;
    std::uint64_t log_bytes = 0;
    std::uint64_t nodes = 0;
    in.read(reinterpret_cast<char*>(&log_bytes), sizeof(log_bytes));
    in.read(reinterpret_cast<char*>(&nodes), sizeof(nodes));
    if (!in || log_bytes != log_->size_bytes() || nodes > slots_.size()) return false;
    std::vector<std::size_t> node_slot;
    std::vector<bool> indexed(slots_.size(), false);
    node_slot.reserve(nodes);
    for (std::uint64_t i = 0; i < nodes; ++i) {
      RecordId id = 0;
      in.read(reinterpret_cast<char*>(&id), sizeof(id));
      auto it = slot_of_.find(id);
      if (!in || it == slot_of_.end() || indexed[it->second]) return false;
      indexed[it->second] = true;
      node_slot.push_back(it->second);
    }
    for (std::size_t s = 0; s < slots_.size(); ++s) {
      if (alive_[s] && !indexed[s]) return false;
    }
    auto index = std::make_unique<HnswIndex>(HnswIndex::load(in));
    if (index->size() != nodes || index->dim() != dim_ || !(index->params() == params_)) {
      return false;
    }
    index_ = std::move(index);
    node_slot_ = std::move(node_slot);
    index_dirty_ = false;
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// KnowledgeBase

void to_json(nlohmann::json& j, const IngestionReport& r) {
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : r.skipped) skipped.push_back({{"line", s.line}, {"reason", s.reason}});
  j = {{"collection", r.collection},     {"rows_read", r.rows_read},
       {"ingested", r.ingested},         {"ids", r.ids},
       {"skipped", skipped},             {"missing_columns", r.missing_columns}};
}

KnowledgeBase::KnowledgeBase(std::string dir, KbOptions options)
    : dir_(std::move(dir)), options_(std::move(options)) {}

KnowledgeBase::~KnowledgeBase() {
  try {
    flush();
  } catch (...) {
  }
}

bool KnowledgeBase::exists(const std::string& dir) {
  return fs::exists(fs::path(dir) / "manifest");
}

std::string KnowledgeBase::log_path(const std::string& name) const {
  if (dir_.empty()) return {};
  return (fs::path(dir_) / (name + ".log")).string();
}

std::unique_ptr<KnowledgeBase> KnowledgeBase::create(const std::string& dir,
                                                     const KbOptions& options) {
  if (exists(dir)) throw Error(ErrorCode::kContractViolation, "knowledge base already exists: " + dir);
  check_params(options.hnsw);
  fs::create_directories(dir);
  std::unique_ptr<KnowledgeBase> kb(new KnowledgeBase(dir, options));
  kb->add_collection(std::string(kProjectCollection), SchemaKind::kProjectClauses);
  kb->add_collection(std::string(kExpertCollection), SchemaKind::kExpertPairs);
  kb->write_manifest();
  return kb;
}

std::unique_ptr<KnowledgeBase> KnowledgeBase::in_memory(const KbOptions& options) {
  check_params(options.hnsw);
  std::unique_ptr<KnowledgeBase> kb(new KnowledgeBase({}, options));
  kb->add_collection(std::string(kProjectCollection), SchemaKind::kProjectClauses);
  kb->add_collection(std::string(kExpertCollection), SchemaKind::kExpertPairs);
  return kb;
}

std::unique_ptr<KnowledgeBase> KnowledgeBase::open(const std::string& dir) {
  const fs::path manifest = fs::path(dir) / "manifest";
  if (!fs::exists(manifest)) throw Error(ErrorCode::kNotFound, "no knowledge base at " + dir);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text::read_file(manifest.string()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptData, std::string("unreadable manifest: ") + e.what());
  }
  KbOptions o;
  j.at("dim").get_to(o.dim);
  j.at("metric").get_to(o.metric);
  o.hnsw = hnsw_from_json(j.at("hnsw"));
  j.at("embedder_model").get_to(o.embedder_model);
  j.at("embed_heading").get_to(o.embed_heading);
  std::unique_ptr<KnowledgeBase> kb(new KnowledgeBase(dir, o));
  for (const auto& c : j.at("collections")) {
    const auto name = c.at("name").get<std::string>();
    const auto kind = c.at("kind").get<std::string>();
    const auto parsed = kind == "EXPERT_PAIRS" ? SchemaKind::kExpertPairs : SchemaKind::kProjectClauses;
    kb->collections_.emplace(name, std::make_unique<Collection>(name, parsed, o.dim, o.hnsw,
                                                                kb->log_path(name), o.auto_index,
                                                                o.sync_writes));
  }
  return kb;
}

std::unique_ptr<KnowledgeBase> KnowledgeBase::open_or_create(const std::string& dir,
                                                             const KbOptions& options) {
  return exists(dir) ? open(dir) : create(dir, options);
}

bool KnowledgeBase::has_collection(std::string_view name) const {
  return collections_.find(name) != collections_.end();
}

Collection& KnowledgeBase::collection(std::string_view name) {
  auto it = collections_.find(name);
  if (it == collections_.end()) {
    throw Error(ErrorCode::kNotFound, "no collection named " + std::string(name));
  }
  return *it->second;
}

const Collection& KnowledgeBase::collection(std::string_view name) const {
  return const_cast<KnowledgeBase*>(this)->collection(name);
}

Collection& KnowledgeBase::add_collection(const std::string& name, SchemaKind kind) {
  if (has_collection(name)) throw Error(ErrorCode::kContractViolation, "collection exists: " + name);
  if (name.empty() || name.find_first_of("/\\.") != std::string::npos) {
    throw Error(ErrorCode::kContractViolation, "invalid collection name: " + name);
  }
  auto& slot = collections_[name];
  slot = std::make_unique<Collection>(name, kind, options_.dim, options_.hnsw, log_path(name),
                                      options_.auto_index, options_.sync_writes);
  write_manifest();
  return *slot;
}

std::vector<std::string> KnowledgeBase::collection_names() const {
  std::vector<std::string> out;
  for (const auto& [name, c] : collections_) out.push_back(name);
  return out;
}

void KnowledgeBase::write_manifest() const {
  if (dir_.empty()) return;
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& [name, c] : collections_) {
    cols.push_back({{"name", name}, {"kind", std::string(to_string(c->kind()))}});
  }
  nlohmann::json j = {{"format", 1},
                      {"dim", options_.dim},
                      {"metric", options_.metric},
                      {"hnsw", hnsw_to_json(options_.hnsw)},
                      {"embedder_model", options_.embedder_model},
                      {"embed_heading", options_.embed_heading},
                      {"collections", cols}};
  const fs::path path = fs::path(dir_) / "manifest";
  const std::string tmp = path.string() + ".tmp";
  text::write_file(tmp, j.dump(2) + "\n");
  fs::rename(tmp, path);
}

void KnowledgeBase::check_embedder(const Embedder& embedder) {
  if (embedder.dim() != options_.dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "embedder dim " + std::to_string(embedder.dim()) + " but knowledge base dim " +
                    std::to_string(options_.dim));
  }
  if (options_.embedder_model.empty()) {
    options_.embedder_model = embedder.model_name();
    write_manifest();
  } else if (options_.embedder_model != embedder.model_name()) {
    throw Error(ErrorCode::kContractViolation,
                "knowledge base was embedded with '" + options_.embedder_model + "', not '" +
                    embedder.model_name() + "'");
  }
}

IngestionReport KnowledgeBase::ingest(std::string_view collection_name, std::string_view csv_text,
                                      Embedder& embedder, std::string_view source_doc) {
  Collection& target = collection(collection_name);
  check_embedder(embedder);

  IngestionReport report;
  report.collection = target.name();
  const csv::Table table = csv::parse_table(csv_text);
  report.rows_read = table.rows.size();

  const bool project = target.kind() == SchemaKind::kProjectClauses;
  const std::vector<std::string> required =
      project ? std::vector<std::string>{"Clause_type", "Clauses"}
              : std::vector<std::string>{"Checkpoints", "Clauses", "Reviews"};
  std::vector<std::size_t> cols;
  for (const auto& name : required) {
    if (auto c = table.column(name)) {
      cols.push_back(*c);
    } else {
      report.missing_columns.push_back(name);
    }
  }
  if (report.schema_mismatch()) {
    std::string reason = "missing column";
    for (const auto& m : report.missing_columns) reason += " '" + m + "'";
    for (const auto& row : table.rows) report.skipped.push_back({row.line, reason});
    return report;
  }
  const auto id_col = table.column("ID");

  std::vector<Collection::Pending> pending;
  std::vector<std::string> texts;
  std::unordered_set<RecordId> batch_ids;
  for (const auto& row : table.rows) {
    auto field = [&](std::size_t col) -> const std::string* {
      return col < row.fields.size() ? &row.fields[col] : nullptr;
    };
    std::string problem;
    for (std::size_t i = 0; i < cols.size() && problem.empty(); ++i) {
      const std::string* f = field(cols[i]);
      if (!f) problem = "row missing column '" + required[i] + "'";
      else if (text::trim(*f).empty()) problem = "empty '" + required[i] + "'";
    }
    std::optional<RecordId> explicit_id;
    if (problem.empty() && id_col) {
      const std::string* f = field(*id_col);
      const std::string raw = f ? std::string(text::trim(*f)) : std::string();
      if (!raw.empty()) {
        try {
          std::size_t used = 0;
          explicit_id = std::stoll(raw, &used);
          if (used != raw.size()) problem = "invalid ID '" + raw + "'";
        } catch (const std::exception&) {
          problem = "invalid ID '" + raw + "'";
        }
        if (problem.empty() && (target.contains(*explicit_id) || batch_ids.count(*explicit_id))) {
          problem = "duplicate id " + raw;
        }
      }
    }
    if (!problem.empty()) {
      report.skipped.push_back({row.line, problem});
      continue;
    }
    if (explicit_id) batch_ids.insert(*explicit_id);

    if (project) {
      ClauseChunk c;
      c.clause_type = std::string(text::trim(*field(cols[0])));
      c.text = std::string(text::trim(*field(cols[1])));
      c.source_doc = std::string(source_doc);
      texts.push_back(clause_embedding_text(c, options_.embed_heading));
      pending.push_back({std::move(c), {}, explicit_id});
    } else {
      ExpertPair p;
      p.checkpoint_text = std::string(text::trim(*field(cols[0])));
      p.clause_text = std::string(text::trim(*field(cols[1])));
      p.review_text = std::string(text::trim(*field(cols[2])));
      texts.push_back(p.clause_text);
      pending.push_back({std::move(p), {}, explicit_id});
    }
  }
  if (pending.empty()) return report;

  auto vectors = embedder.embed_batch(texts);
  for (std::size_t i = 0; i < pending.size(); ++i) pending[i].embedding = std::move(vectors[i]);
  report.ids = target.insert(std::move(pending));
  report.ingested = report.ids.size();
  return report;
}

RecordId KnowledgeBase::add_expert_pair(const ExpertPair& pair, Embedder& embedder,
                                        std::string_view collection_name) {
  const auto problems = validate(pair);
  if (!problems.empty()) {
    throw Error(ErrorCode::kContractViolation, "invalid expert pair: " + problems.violations.front().name);
  }
  Collection& target = collection(collection_name);
  if (target.kind() != SchemaKind::kExpertPairs) {
    throw Error(ErrorCode::kContractViolation, target.name() + " is not an expert-pair collection");
  }
  check_embedder(embedder);
  const EmbeddingVector v = embedder.embed(pair.clause_text);
  ExpertPair copy = pair;
  copy.checkpoint_text = std::string(text::trim(copy.checkpoint_text));
  return target.insert_one(std::move(copy), v);
}

void KnowledgeBase::build_indexes(const HnswParams& params) {
  check_params(params);
  options_.hnsw = params;
  for (auto& [name, c] : collections_) c->build_index(params);
  flush();
}

void KnowledgeBase::flush() {
  for (auto& [name, c] : collections_) c->save_index();
  write_manifest();
}

}  // namespace clausecheck
