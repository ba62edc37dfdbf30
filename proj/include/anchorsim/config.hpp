#pragma once

#include "anchorsim/coefficients.hpp"
#include "anchorsim/dgm.hpp"
#include "anchorsim/estimators.hpp"
#include "anchorsim/population.hpp"

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

namespace anchorsim {

struct GridConfig {
    std::vector<double> village_fractions{0.25, 0.50, 0.75};
    std::vector<double> response_rates{0.50, 0.65, 0.80};
    std::vector<double> xis{1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
};

struct RunConfig {
    PopulationConfig population;
    OutcomeCoefficients outcome;
    SelectionCoefficients selection; ///< intercept and xi are set per scenario
    GridConfig grid;
    TuningConfig tuning;
    EstimatorOptions estimators;
    int n_rep = 1000;
    std::uint64_t master_seed = 20251019;
    int workers = 0; ///< 0 = hardware concurrency
    std::string output_dir = "results";
    bool population_redraw_per_replicate = false;

    void validate() const;
};

/// Thrown for unreadable, malformed or invalid configuration.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const RunConfig &cfg);
/// Missing keys take defaults; unknown keys are rejected. The random-intercept
/// variances follow the ICCs unless given explicitly.
RunConfig run_config_from_json(const nlohmann::json &j);
RunConfig load_run_config(const std::filesystem::path &path);
void save_run_config(const RunConfig &cfg, const std::filesystem::path &path);

/// Applies ANCHORSIM_SEED and ANCHORSIM_WORKERS when set.
void apply_environment_overrides(RunConfig &cfg);

/// FNV-1a of the canonical JSON of everything that affects results
/// (excludes workers and output_dir).
std::string config_hash(const RunConfig &cfg);
/// Same, restricted to the inputs of selection-intercept tuning (grid excluded;
/// cached entries are keyed by response rate and odds ratio).
std::string tuning_hash(const RunConfig &cfg);

} // namespace anchorsim
