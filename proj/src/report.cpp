// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/report.hpp"

#include <cstdio>
#include <sstream>

namespace clausecheck {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Table cells cannot hold raw newlines or pipes.
std::string cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '\n') out += "<br>";
    else if (c == '|') out += "\\|";
    else if (c != '\r') out += c;
  }
  return out;
}

std::string quoted(const std::string& s) {
  std::string out = "> ";
  for (char c : s) {
    out += c;
    if (c == '\n') out += "> ";
  }
  return out;
}

std::string yes_no(const nlohmann::json& j) { return j.get<bool>() ? "yes" : "no"; }

}  // namespace

std::string render_json(const Report& report) {
  return nlohmann::json(report).dump(2) + "\n";
}

std::string render_markdown(const nlohmann::json& report) {
  std::ostringstream md;
  md << "# Contract risk identification report\n\n";

  md << "## Run\n\n| Setting | Value |\n|---|---|\n";
  for (const auto& [key, value] : report.at("run_metadata").items()) {
    md << "| " << key << " | " << cell(value.is_string() ? value.get<std::string>() : value.dump())
       << " |\n";
  }

  const auto& s = report.at("summary");
  md << "\n## Summary\n\n"
     << "| Checkpoints | Results | Risky | Non-risky | Degraded | Failed |\n"
     << "|---|---|---|---|---|---|\n"
     << "| " << s.at("checkpoints") << " | " << s.at("results") << " | " << s.at("risky") << " | "
     << s.at("non_risky") << " | " << s.at("degraded") << " | " << s.at("failed") << " |\n";

  md << "\n## Results\n\n| Checkpoint | Mode | Verdict | Risky | Tie broken | Degraded |\n"
     << "|---|---|---|---|---|---|\n";
  for (const auto& r : report.at("results")) {
    md << "| " << cell(r.at("checkpoint").at("id").get<std::string>()) << " | "
       << r.at("mode").get<std::string>() << " | " << r.at("final_verdict").get<std::string>()
       << " | " << yes_no(r.at("is_risky")) << " | " << yes_no(r.at("tie_broken")) << " | "
       << yes_no(r.at("degraded")) << " |\n";
  }

  for (const auto& r : report.at("results")) {
    const auto& cp = r.at("checkpoint");
    md << "\n### " << cp.at("id").get<std::string>() << " (" << r.at("mode").get<std::string>()
       << "): " << r.at("final_verdict").get<std::string>() << "\n\n";
    md << "**Checkpoint**\n\n" << quoted(cp.at("text").get<std::string>()) << "\n\n";
    md << "**Explanation**\n\n" << quoted(r.at("final_explanation").get<std::string>()) << "\n\n";

    md << "**Retrieved clauses**\n\n| # | Id | Clause type | Similarity | Distance |\n"
       << "|---|---|---|---|---|\n";
    int i = 0;
    for (const auto& c : r.at("retrieved_clauses")) {
      md << "| " << ++i << " | " << c.at("clause").at("id") << " | "
         << cell(c.at("clause").at("clause_type").get<std::string>()) << " | "
         << fixed(c.at("similarity").get<double>(), 4) << " | "
         << fixed(c.at("distance").get<double>(), 4) << " |\n";
    }

    if (r.at("expert_knowledge_found").get<bool>()) {
      md << "\n**Clause-review pairs**\n\n| # | Id | Similarity | Distance |\n|---|---|---|---|\n";
      i = 0;
      for (const auto& p : r.at("retrieved_pairs")) {
        md << "| " << ++i << " | " << p.at("pair").at("id") << " | "
           << fixed(p.at("similarity").get<double>(), 4) << " | "
           << fixed(p.at("distance").get<double>(), 4) << " |\n";
      }
    } else if (r.at("mode").get<std::string>() == "AUGMENTED") {
      md << "\nNo expert knowledge matched this checkpoint; the standard prompt was used.\n";
    }

    md << "\n**Suggestions**\n\n| Choice | Sample | Verdict | Votes |\n|---|---|---|---|\n";
    i = 0;
    const auto& votes = r.at("votes");
    for (const auto& sug : r.at("suggestions").at("suggestions")) {
      const std::string key = std::to_string(++i);
      md << "| " << i << " | " << sug.at("sample_index") << " | "
         << sug.at("verdict").get<std::string>() << " | "
         << (votes.contains(key) ? votes.at(key).dump() : std::string("0")) << " |\n";
    }
    if (r.at("selection_skipped").get<bool>()) {
      md << "\nSelection stage skipped.\n";
    } else {
      md << "\nVotes cast: " << r.at("n_vote_samples") << ", discarded: "
         << r.at("votes_discarded") << ".\n";
    }
  }

  const auto& failures = report.at("failures");
  if (!failures.empty()) {
    md << "\n## Failures\n\n| Checkpoint | Mode | Code | Message |\n|---|---|---|---|\n";
    for (const auto& f : failures) {
      md << "| " << cell(f.at("checkpoint_id").get<std::string>()) << " | "
         << f.at("mode").get<std::string>() << " | " << f.at("code").get<std::string>() << " | "
         << cell(f.at("message").get<std::string>()) << " |\n";
    }
  }
  return md.str();
}

std::string render_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return render_json(report);
  return render_markdown(nlohmann::json(report));
}

}  // namespace clausecheck
