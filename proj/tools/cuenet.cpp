// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "cuenet/cli/commands.hpp"

int main(int argc, char** argv) { return cuenet::cli::run(argc, argv); }
