#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "fastswitch/channels.hpp"
#include "fastswitch/optimizer.hpp"
#include "fastswitch/params.hpp"
#include "fastswitch/testbed.hpp"

namespace fastswitch {

/// Everything a CLI run needs. Every key is optional in the JSON file; unknown keys are
/// rejected so a typo cannot silently fall back to a default.
struct RunConfig {
    PlantParams plant;
    OptimizerConfig optimizer;
    MapResolution map;
    PlacementConfig placement;
    WorstCaseConfig worst_case;
    SimulatedTestbedConfig testbed;
    int parallelism = 0;  // 0 = hardware concurrency
    std::filesystem::path output_dir = "runs";

    void validate() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parse a config document. Throws ConfigError on malformed JSON, unknown keys, wrong types
/// or values that fail validation.
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Full config with every field spelled out, in a fixed key order.
std::string run_config_to_json(const RunConfig& config);

}  // namespace fastswitch
