#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "dvrp/agent.hpp"
#include "dvrp/ga.hpp"
#include "dvrp/reward.hpp"

namespace dvrp {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitUsage = 2,
  kExitParse = 3,
  kExitInfeasible = 4,
  kExitInvalid = 5,
};

// Settings shared by every command. All keys are optional; see README for the layout.
struct RunConfig {
  TrainConfig train;
  GaConfig ga;
  RewardWeights weights;
};

// Throws SchemaError naming the offending key on unknown keys or wrong types.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dvrp
