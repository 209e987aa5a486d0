#pragma once

#include <json.hpp>

namespace fdg::cli {

// Each command validates its configuration (unknown keys are rejected), runs
// the pipeline, writes the output files, and returns a short summary. The
// returned summary mirrors what lands in the run manifest.
nlohmann::json run_simulate(const nlohmann::json& config);
nlohmann::json run_estimate(const nlohmann::json& config);
nlohmann::json run_roc(const nlohmann::json& config);
nlohmann::json run_tune(const nlohmann::json& config);

// Process exit code for a failure: 2 config, 3 data/IO, 4 numerical.
int exit_code_for(const std::exception& e);

}  // namespace fdg::cli
