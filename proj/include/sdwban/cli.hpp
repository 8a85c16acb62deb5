/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SDWBAN_CLI_HPP
#define SDWBAN_CLI_HPP

namespace sdwban {

// Entry point behind the sdwban binary; also callable from tests.
// Subcommands: run, validate, summarize, sweep.
int run_cli(int argc, const char* const* argv);

} // namespace sdwban

#endif // SDWBAN_CLI_HPP
