/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/cli.hpp"

int main(int argc, char** argv) {
    return sdwban::run_cli(argc, argv);
}
