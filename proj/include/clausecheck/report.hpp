// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <json.hpp>

#include "clausecheck/pipeline.hpp"

namespace clausecheck {

enum class ReportFormat { kJson, kMarkdown };

/// Canonical form: two-space indented JSON with a trailing newline.
std::string render_json(const Report& report);

/// Human-readable rendering derived from the canonical JSON document.
std::string render_markdown(const nlohmann::json& report);

std::string render_report(const Report& report, ReportFormat format);

}  // namespace clausecheck
