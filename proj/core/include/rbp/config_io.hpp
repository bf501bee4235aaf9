// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator
// JSON (de)serialization for scenario, pipeline and experiment files.

#pragma once

#include "rbp/experiment.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <string>

namespace rbp {

nlohmann::json to_json(const ScenarioConfig& config);
nlohmann::json to_json(const PipelineConfig& config);
nlohmann::json to_json(const ExperimentSpec& spec);

ScenarioConfig scenario_config_from_json(const nlohmann::json& j);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
ExperimentSpec experiment_spec_from_json(const nlohmann::json& j);

PipelineConfig load_pipeline_config(const std::filesystem::path& path);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

/// Sorted-key dump used for spec hashing and for the copies written next to
/// experiment results.
std::string canonical_json(const ExperimentSpec& spec);
std::string canonical_json(const PipelineConfig& config);

}  // namespace rbp
