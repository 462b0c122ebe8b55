#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "clbm/lattice.hpp"
#include "clbm/lbm_sim.hpp"
#include "clbm/qre.hpp"

namespace clbm {

inline constexpr const char* tool_version = "1.0.0";

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_capacity = 3, exit_numerical = 4 };

struct RunManifest {
    std::string command;
    std::string source;  // instance id or config path
    nlohmann::json overrides = nlohmann::json::object();
    std::vector<std::string> outputs;
    long long seed = 0;
    std::string version = tool_version;

    nlohmann::json to_json() const;
    // SHA-256 of the compact JSON form.
    std::string hash() const;
};

std::string sha256_hex(const std::string& data);

// Simulation setup read from a JSON document.
struct SimulationSetup {
    GridSpec grid;
    GeometryOracle geometry = AllFluid{};
    SimConfig config;
    RunOptions options;
};

SimulationSetup parse_simulation_setup(const nlohmann::json& j);

nlohmann::json estimate_to_json(const ResourceEstimate& est, const CostModelConfig& config);

// Runs the command line; returns one of the ExitCode values.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace clbm
