// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "ghztomo/experiment.hpp"

namespace ghztomo::config {

/// Parses the experiment config: a JSON file with the four sections
/// crystal, homodyne, run and grid. Unknown keys are hard errors
/// (std::invalid_argument), as are missing required keys and type
/// mismatches. See README for the schema.
experiment::ExperimentConfig parse(const std::string& json_text);

/// Reads and parses a config file; throws std::invalid_argument when the
/// file cannot be read.
experiment::ExperimentConfig load(const std::string& path);

}  // namespace ghztomo::config
