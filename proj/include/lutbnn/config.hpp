#pragma once
// Run configuration: one JSON document (comments allowed) bundling the network
// shape, simulator and GA settings, and output paths. See data/example_run.json.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "lutbnn/core.hpp"
#include "lutbnn/ga.hpp"
#include "lutbnn/sim.hpp"

namespace lutbnn {

struct OutputPaths {
    std::filesystem::path dir = "run";
    std::string genome = "best_genome.json";
    std::string metrics = "metrics.csv";
    std::string timing = "timing.csv";
    std::string checkpoint = "checkpoint.json";
    std::size_t checkpoint_every = 25;

    std::filesystem::path genome_path() const { return dir / genome; }
    std::filesystem::path metrics_path() const { return dir / metrics; }
    std::filesystem::path timing_path() const { return dir / timing; }
    std::filesystem::path checkpoint_path() const { return dir / checkpoint; }
};

struct SimulateCounts {
    std::size_t good = 200;
    std::size_t ugly = 200;
    std::size_t noise = 0;
};

struct RunConfig {
    NetworkShape shape{128, {32, 32}, 2};
    SimConfig sim;
    GaConfig ga;
    OutputPaths output;
    SimulateCounts simulate;

    void validate() const;
};

nlohmann::ordered_json to_json(const NetworkShape& shape);
NetworkShape shape_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const SimConfig& cfg);
/// Keys absent from `j` keep their values from `base`.
SimConfig sim_from_json(const nlohmann::json& j, SimConfig base = {});

nlohmann::ordered_json to_json(const GaConfig& cfg);
GaConfig ga_from_json(const nlohmann::json& j, GaConfig base = {});

nlohmann::ordered_json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Parses a run config file; `//` and `/* */` comments are accepted.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(std::string_view text);

}  // namespace lutbnn
