// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iostream>

namespace clausecheck {

/// Exit statuses shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;       // nothing ingested, or some checkpoints failed
inline constexpr int kExitBadInput = 2;      // unreadable input, schema mismatch, bad arguments
inline constexpr int kExitProviderDown = 3;  // a model provider was unavailable

/// Entry point of the `clausecheck` tool:
///
///   kb ingest <kb> --kind clauses|pairs --input <csv> [--collection <name>] [--config <file>]
///   kb add <kb> --checkpoint <text> --clause-file <f> --review-file <f> [--config <file>]
///   index build <kb> [--m N] [--ef-construction N] [--ef-search N] [--seed N]
///   identify <kb> --checkpoints <csv> --mode augmented|standard|both --output <path>
///            --config <file> [--format json|markdown] [--seed N]
///   chunk <contract.txt> --output <csv> [--max-chars N] [--source-doc <id>]
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace clausecheck
