// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/cli.hpp"

int main(int argc, char** argv) { return clausecheck::run_cli(argc, argv); }
