#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace atomladder {

using Json = nlohmann::json;

struct PlanInfo {
    std::string name;
    std::string description;
    std::string anchor; // figure or section the plan reproduces
};

// The six canned plans, in a fixed order.
const std::vector<PlanInfo>& plan_catalog();

// Every section and key a config may carry, with its default. A null default
// means the plan picks the value.
const Json& config_defaults();

// Checks a user config against config_defaults() and fills in every default.
// Unknown keys, wrong types and unknown plans are config errors.
Json resolve_config(const Json& user);

Json read_config(const std::string& path);

// Short stable hash of a resolved config, used in output names.
std::string config_hash(const Json& resolved);

struct RunOptions {
    int threads = 1;
    bool strict = false; // any warning aborts the run before artifacts are written
};

struct RunOutcome {
    std::string stem; // <plan>-<hash>
    std::vector<std::string> artifacts;
    std::vector<std::string> warnings;
    std::map<std::string, double> metrics;
    double wall_time = 0.0;
};

// Raised in strict mode when the computation produced warnings.
class StrictWarning : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Computes the plan, writes its artifacts and a provenance file into
// out_dir and returns the manifest. `resolved` must come from resolve_config.
RunOutcome run_experiment(const Json& resolved, const std::string& out_dir, const RunOptions& options = {});

} // namespace atomladder
