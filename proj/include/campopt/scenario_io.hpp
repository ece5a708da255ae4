#pragma once

#include <string>

#include "campopt/scenario.hpp"

namespace campopt {

// Scenario files are versioned JSON documents (schema_version 1); see
// scenarios/README for the field reference. Loading throws std::runtime_error
// with the offending field on malformed input; semantic checks belong to
// validate_scenario.
ScenarioSpec load_scenario(const std::string& path);
ScenarioSpec parse_scenario(const std::string& jsonText);
std::string serialize_scenario(const ScenarioSpec& scenario);
void save_scenario(const ScenarioSpec& scenario, const std::string& path);

// Stable content hash of the serialized scenario (FNV-1a over the canonical
// serialization); used to key caches and to stamp checkpoints.
std::uint64_t scenario_hash(const ScenarioSpec& scenario);

} // namespace campopt
