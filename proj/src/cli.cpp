// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <set>

#include "clausecheck/chunker.hpp"
#include "clausecheck/config.hpp"
#include "clausecheck/csv.hpp"
#include "clausecheck/error.hpp"
#include "clausecheck/knowledge_base.hpp"
#include "clausecheck/pipeline.hpp"
#include "clausecheck/report.hpp"
#include "clausecheck/text.hpp"

namespace clausecheck {

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kProviderUnavailable:
    case ErrorCode::kTransport: return kExitProviderDown;
    case ErrorCode::kIo:
    case ErrorCode::kSchema:
    case ErrorCode::kNotFound:
    case ErrorCode::kContractViolation:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kTemplate: return kExitBadInput;
    default: return kExitFailure;
  }
}

std::string read_input(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::kIo, "cannot read " + path);
  }
  return text::read_file(path);
}

AppConfig config_or_default(const std::string& path) {
  return path.empty() ? AppConfig{} : load_config(path);
}

std::unique_ptr<KnowledgeBase> open_existing(const std::string& dir) {
  if (!KnowledgeBase::exists(dir)) throw Error(ErrorCode::kNotFound, "no knowledge base at " + dir);
  return KnowledgeBase::open(dir);
}

// Embedder for an existing base: the configured provider, or a local one
// matching the manifest when no config is given.
std::unique_ptr<Embedder> embedder_for(const KnowledgeBase& kb, const std::string& config_path,
                                       const AppConfig& config) {
  EmbeddingProviderConfig ec = config.embedding;
  if (config_path.empty()) {
    ec.dim = kb.options().dim;
    if (!kb.options().embedder_model.empty()) ec.model_name = kb.options().embedder_model;
  }
  return make_embedder(ec);
}

// Recall of ANN top-k against exact top-k over up to `limit` evenly spaced
// stored records used as queries.
std::pair<double, std::size_t> sampled_recall(const Collection& c, std::size_t k, std::size_t limit) {
  const auto records = c.records();
  if (records.empty()) return {1.0, 0};
  const std::size_t n = std::min(limit, records.size());
  std::size_t found = 0;
  std::size_t wanted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = records[i * records.size() / n]->embedding;
    const auto exact = c.search_exact(q, k);
    const auto ann = c.search_ann(q, k).hits;
    std::set<RecordId> truth;
    for (const auto& h : exact) truth.insert(h.id);
    for (const auto& h : ann) found += truth.count(h.id);
    wanted += truth.size();
  }
  return {wanted == 0 ? 1.0 : static_cast<double>(found) / static_cast<double>(wanted), n};
}

struct IngestArgs {
  std::string kb;
  std::string kind;
  std::string input;
  std::string collection;
  std::string config;
  std::string source_doc;
  std::optional<std::uint64_t> seed;
  bool json = false;
};

int cmd_kb_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  const auto kind = schema_kind_from_string(a.kind);
  if (!kind) throw Error(ErrorCode::kSchema, "--kind must be clauses or pairs");
  const std::string csv_text = read_input(a.input);
  const AppConfig config = config_or_default(a.config);

  std::unique_ptr<KnowledgeBase> kb;
  std::unique_ptr<Embedder> embedder;
  if (KnowledgeBase::exists(a.kb)) {
    kb = KnowledgeBase::open(a.kb);
    embedder = embedder_for(*kb, a.config, config);
  } else {
    embedder = make_embedder(config.embedding);
    KbOptions o;
    o.dim = embedder->dim();
    o.metric = config.pipeline.retrieval.metric;
    o.embedder_model = embedder->model_name();
    if (a.seed) o.hnsw.seed = *a.seed;
    kb = KnowledgeBase::create(a.kb, o);
  }
  std::string name = a.collection;
  if (name.empty()) {
    name = std::string(*kind == SchemaKind::kProjectClauses ? kProjectCollection : kExpertCollection);
  }
  if (!kb->has_collection(name)) kb->add_collection(name, *kind);
  if (kb->collection(name).kind() != *kind) {
    throw Error(ErrorCode::kSchema, "collection " + name + " holds " +
                                        std::string(to_string(kb->collection(name).kind())));
  }

  const std::string source =
      a.source_doc.empty() ? std::filesystem::path(a.input).filename().string() : a.source_doc;
  const IngestionReport report = kb->ingest(name, csv_text, *embedder, source);
  kb->flush();

  if (a.json) {
    out << nlohmann::json(report).dump(2) << "\n";
  } else {
    out << report.ingested << " ingested into " << report.collection << " (" << report.rows_read
        << " rows read, " << report.skipped.size() << " skipped)\n";
    for (const auto& s : report.skipped) err << "  line " << s.line << ": " << s.reason << "\n";
  }
  if (report.schema_mismatch()) return kExitBadInput;
  if (report.rows_read > 0 && report.ingested == 0) return kExitFailure;
  return kExitOk;
}

int cmd_kb_add(const std::string& dir, const std::string& checkpoint, const std::string& clause_file,
               const std::string& review_file, const std::string& config_path, std::ostream& out) {
  ExpertPair pair;
  pair.checkpoint_text = checkpoint;
  pair.clause_text = std::string(text::trim(read_input(clause_file)));
  pair.review_text = std::string(text::trim(read_input(review_file)));
  auto kb = open_existing(dir);
  const AppConfig config = config_or_default(config_path);
  auto embedder = embedder_for(*kb, config_path, config);
  const RecordId id = kb->add_expert_pair(pair, *embedder);
  kb->flush();
  out << "added expert pair " << id << "\n";
  return kExitOk;
}

struct IndexArgs {
  std::string kb;
  std::optional<std::size_t> m;
  std::optional<std::size_t> ef_construction;
  std::optional<std::size_t> ef_search;
  std::optional<std::uint64_t> seed;
};

int cmd_index_build(const IndexArgs& a, std::ostream& out) {
  auto kb = open_existing(a.kb);
  HnswParams p = kb->options().hnsw;
  if (a.m) {
    const HnswParams fresh = hnsw_params_for_degree(*a.m);
    p.max_degree = fresh.max_degree;
    p.level_multiplier = fresh.level_multiplier;
  }
  if (a.ef_construction) p.ef_construction = *a.ef_construction;
  if (a.ef_search) p.ef_search = *a.ef_search;
  if (a.seed) p.seed = *a.seed;
  kb->build_indexes(p);
  out << "index built: M=" << p.max_degree << " ef_construction=" << p.ef_construction
      << " ef_search=" << p.ef_search << " seed=" << p.seed << "\n";
  for (const auto& name : kb->collection_names()) {
    const auto& c = kb->collection(name);
    const auto [recall, sampled] = sampled_recall(c, 5, 500);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", recall);
    out << name << ": " << c.size() << " records, recall@5 " << buf << " over " << sampled
        << " sampled queries\n";
  }
  return kExitOk;
}

struct IdentifyArgs {
  std::string kb;
  std::string checkpoints;
  std::string mode = "augmented";
  std::string output;
  std::string config;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
};

int cmd_identify(const IdentifyArgs& a, std::ostream& out, std::ostream& err) {
  const auto mode = run_mode_from_string(a.mode);
  if (!mode) throw Error(ErrorCode::kSchema, "--mode must be augmented, standard or both");
  const std::string fmt = text::to_lower_ascii(a.format);
  if (fmt != "json" && fmt != "markdown" && fmt != "md") {
    throw Error(ErrorCode::kSchema, "--format must be json or markdown");
  }
  const auto checkpoints = read_checkpoints_csv(read_input(a.checkpoints));
  const AppConfig config = load_config(a.config);
  auto kb = open_existing(a.kb);
  auto embedder = make_embedder(config.embedding);
  kb->check_embedder(*embedder);
  auto llm = make_llm_provider(config.llm, a.seed.value_or(0));
  const TemplateSet templates =
      config.templates_dir.empty() ? TemplateSet::defaults() : TemplateSet::from_directory(config.templates_dir);

  Report report = run_checklist(checkpoints, *kb, *embedder, *llm, config.pipeline, *mode, templates);
  if (a.seed) report.run_metadata["seed"] = *a.seed;
  text::write_file(a.output, render_report(report, fmt == "json" ? ReportFormat::kJson
                                                                 : ReportFormat::kMarkdown));
  const auto& s = report.summary;
  out << s.results << " results (" << s.risky << " risky, " << s.non_risky << " non-risky, "
      << s.degraded << " degraded), " << s.failed << " failed; report written to " << a.output
      << "\n";
  bool provider_down = false;
  for (const auto& f : report.failures) {
    err << "  " << f.checkpoint_id << " " << to_string(f.mode) << ": " << f.code << ": "
        << f.message << "\n";
    provider_down = provider_down || f.code == to_string(ErrorCode::kProviderUnavailable);
  }
  if (provider_down) return kExitProviderDown;
  return report.failures.empty() ? kExitOk : kExitFailure;
}

int cmd_chunk(const std::string& input, const std::string& output, std::size_t max_chars,
              const std::string& source_doc, std::ostream& out, std::ostream& err) {
  ChunkerConfig cc;
  cc.max_chunk_chars = max_chars;
  const std::string source =
      source_doc.empty() ? std::filesystem::path(input).filename().string() : source_doc;
  const auto seg = segment_contract(read_input(input), cc, source);
  std::string csv_out = csv::format_row({"Clause_type", "Clauses"});
  for (const auto& c : seg.chunks) csv_out += csv::format_row({c.clause_type, c.text});
  text::write_file(output, csv_out);
  out << seg.chunks.size() << " chunks from " << seg.headings.size() << " headings written to "
      << output << "\n";
  for (std::size_t i : seg.oversized) {
    err << "  chunk " << i << " (" << seg.chunks[i].clause_type << ") exceeds " << max_chars
        << " chars as a single paragraph\n";
  }
  for (const auto& h : seg.empty_sections) err << "  heading without body: " << h << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Construction contract risk identification over a clause knowledge base",
               "clausecheck"};
  app.require_subcommand(1);

  auto* kb_cmd = app.add_subcommand("kb", "Manage a knowledge base");
  kb_cmd->require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = kb_cmd->add_subcommand("ingest", "Ingest a CSV file into a collection");
  ingest_cmd->add_option("kb", ingest.kb, "Knowledge base directory")->required();
  ingest_cmd->add_option("--kind", ingest.kind, "clauses or pairs")->required();
  ingest_cmd->add_option("--input", ingest.input, "CSV file")->required();
  ingest_cmd->add_option("--collection", ingest.collection, "Collection name");
  ingest_cmd->add_option("--config", ingest.config, "Config file (embedding settings)");
  ingest_cmd->add_option("--source-doc", ingest.source_doc, "Source document id for clauses");
  ingest_cmd->add_option("--seed", ingest.seed, "HNSW seed when creating a new base");
  ingest_cmd->add_flag("--json", ingest.json, "Print the ingestion report as JSON");

  std::string add_kb, add_checkpoint, add_clause, add_review, add_config;
  auto* add_cmd = kb_cmd->add_subcommand("add", "Append one clause-review pair");
  add_cmd->add_option("kb", add_kb, "Knowledge base directory")->required();
  add_cmd->add_option("--checkpoint", add_checkpoint, "Checkpoint text")->required();
  add_cmd->add_option("--clause-file", add_clause, "File holding the clause")->required();
  add_cmd->add_option("--review-file", add_review, "File holding the review")->required();
  add_cmd->add_option("--config", add_config, "Config file (embedding settings)");

  auto* index_cmd = app.add_subcommand("index", "Manage vector indexes");
  index_cmd->require_subcommand(1);
  IndexArgs index;
  auto* build_cmd = index_cmd->add_subcommand("build", "Rebuild indexes from the record logs");
  build_cmd->add_option("kb", index.kb, "Knowledge base directory")->required();
  build_cmd->add_option("--m", index.m, "Maximum node degree");
  build_cmd->add_option("--ef-construction", index.ef_construction, "Build beam width");
  build_cmd->add_option("--ef-search", index.ef_search, "Search beam width");
  build_cmd->add_option("--seed", index.seed, "Level generator seed");

  IdentifyArgs identify;
  auto* identify_cmd = app.add_subcommand("identify", "Run a checklist against a knowledge base");
  identify_cmd->add_option("kb", identify.kb, "Knowledge base directory")->required();
  identify_cmd->add_option("--checkpoints", identify.checkpoints, "Checkpoint CSV")->required();
  identify_cmd->add_option("--mode", identify.mode, "augmented, standard or both");
  identify_cmd->add_option("--output", identify.output, "Report path")->required();
  identify_cmd->add_option("--config", identify.config, "Config file")->required();
  identify_cmd->add_option("--format", identify.format, "json or markdown");
  identify_cmd->add_option("--seed", identify.seed, "Seed for the mock provider");

  std::string chunk_input, chunk_output, chunk_source;
  std::size_t chunk_max = ChunkerConfig{}.max_chunk_chars;
  auto* chunk_cmd = app.add_subcommand("chunk", "Split a contract text file into clause rows");
  chunk_cmd->add_option("contract", chunk_input, "Plain text contract")->required();
  chunk_cmd->add_option("--output", chunk_output, "CSV to write")->required();
  chunk_cmd->add_option("--max-chars", chunk_max, "Maximum chunk length");
  chunk_cmd->add_option("--source-doc", chunk_source, "Document id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitBadInput;
  }

  try {
    if (ingest_cmd->parsed()) return cmd_kb_ingest(ingest, out, err);
    if (add_cmd->parsed()) {
      return cmd_kb_add(add_kb, add_checkpoint, add_clause, add_review, add_config, out);
    }
    if (build_cmd->parsed()) return cmd_index_build(index, out);
    if (identify_cmd->parsed()) return cmd_identify(identify, out, err);
    if (chunk_cmd->parsed()) {
      return cmd_chunk(chunk_input, chunk_output, chunk_max, chunk_source, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitBadInput;
}

}  // namespace clausecheck
