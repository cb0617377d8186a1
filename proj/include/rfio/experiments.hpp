#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "rfio/fio.hpp"
#include "rfio/grid.hpp"
#include "rfio/phase.hpp"

namespace rfio {

/// One experiment = one command bound to a phase/grid/dyadic configuration.
/// Loading validates the spec constraints (delta > sqrt(eps), known presets).
struct ExperimentConfig {
    // phase
    std::string phase_kind = "flat";
    double epsilon = 0.0;
    std::string preset = "default";
    nlohmann::json coeffs; // optional trig-polynomial overrides

    // frequency grid
    int j_min = -1;
    int j_max = 3;
    int radial_per_octave = 8;
    int angular_count = 256;

    // spatial grid
    double L = 4.0;
    int lattice_n = 24;

    // dyadic
    double delta = 0.25;
    double alpha = 0.125;

    std::string command;
    nlohmann::json params; // command-specific knobs, defaults materialized on use
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 1;
    int threads = 0;

    nlohmann::json resolved() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::filesystem::path& path);

PhaseField build_phase(const ExperimentConfig& cfg);
PolarFrequencyGrid build_fgrid(const ExperimentConfig& cfg);
SpatialGrid build_sgrid(const ExperimentConfig& cfg);

/// Executes the config's command, writing CSV data and a JSON summary into
/// out_dir. Returns 0 on pass, 2 on criterion failure. Errors throw.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

const std::vector<std::string>& experiment_commands();

// ---------------------------------------------------------------------------
// acceptance battery
// ---------------------------------------------------------------------------

struct CriterionResult {
    int index = 0;
    std::string name;
    bool pass = false;
    std::vector<std::string> details;
    nlohmann::json summary;
};

int acceptance_criteria_count();
CriterionResult run_acceptance_criterion(int k, const std::filesystem::path& out_dir,
                                         std::uint64_t seed);

} // namespace rfio
