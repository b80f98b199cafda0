#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "singular_sense/channel.hpp"
#include "singular_sense/fisher.hpp"
#include "singular_sense/sensor.hpp"

namespace singular_sense {

enum ExitCode : int { kExitPass = 0, kExitVerdictFail = 1, kExitConfig = 2, kExitIo = 3 };

/// Flat run configuration; JSON keys match the field names.
struct RunConfig {
    SensorParams params;
    InputSpec inputs;
    std::string perturbation = "two_mode_symmetric";
    std::string nuisance;
    double theta0 = 0.1;
    double theta1 = 0.0;
    double sign = 1.0;
    double theta_min = 1e-4;
    double theta_max = 1.0;
    int theta_points = 60;
    double tol = 1e-9;
    double rank_tol = 1e-10;
    int r_max = 6;
    int neumann_order = 20;
    std::uint64_t seed = 7;
    std::int64_t samples = 1000000;
    std::string out_dir;
    double mean_prefactor = 1.0;
    bool exact_sld = false;
};

/// Applies the keys present in j on top of cfg; unknown keys raise ConfigError.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Throws ConfigError unless the configuration is usable.
void validate(const RunConfig& cfg);

/// Default output directory: $SINGULAR_SENSE_OUT or "singular_sense_out".
std::string default_out_dir();

nlohmann::json cmd_classify(const RunConfig& cfg);
nlohmann::json cmd_steady_state(const RunConfig& cfg);
/// check_theta > 0 adds the relative residual against the direct inverse at that theta0.
nlohmann::json cmd_expand(const RunConfig& cfg, double check_theta = 0.0);
nlohmann::json cmd_bounds(const RunConfig& cfg);

/// Entry point shared by the executable and tests; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace singular_sense
