#pragma once

#include "anchorsim/config.hpp"
#include "anchorsim/design.hpp"
#include "anchorsim/dgm.hpp"
#include "anchorsim/metrics.hpp"
#include "anchorsim/population.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace anchorsim {

/// Cartesian product ordered by fraction (desc), response rate (desc), xi (asc).
/// Ordinals index this full ordering and key the random streams.
std::vector<Scenario> build_grid(const GridConfig &grid);

/// Scenario filter of the form "fraction=0.25,rate=0.5,xi=1.5"; omitted keys match anything.
struct ScenarioFilter {
    std::optional<double> fraction;
    std::optional<double> rate;
    std::optional<double> xi;

    static ScenarioFilter parse(const std::string &text);
    bool matches(const Scenario &s) const noexcept;
};

/// Census and everything derived from it that replicates share read-only.
struct SimulationContext {
    Population population;
    AuxiliaryMatrix auxiliaries;
    OutcomeCoefficients outcome; ///< follow-up intercept already tuned
};

SimulationContext prepare_context(const RunConfig &cfg);

struct TuningKey {
    double response_rate = 0.0;
    double xi = 1.0;

    auto operator<=>(const TuningKey &) const = default;
};

struct TuningTable {
    std::string hash;
    std::map<TuningKey, GammaTuning> entries;

    std::optional<GammaTuning> find(double response_rate, double xi) const;
};

nlohmann::json to_json(const TuningTable &table);
TuningTable tuning_table_from_json(const nlohmann::json &j);

struct TuneReport {
    TuningTable table;
    std::size_t tuned = 0;  ///< entries computed in this call
    std::size_t cached = 0; ///< entries reused from `previous`
};

/// Tunes gamma0 for every (response rate, xi) pair of the grid; entries of
/// `previous` with a matching hash are reused.
TuneReport tune_all(const RunConfig &cfg, const SimulationContext &ctx, const TuningTable *previous = nullptr);

/// Outcome, attendance and sample of replicate `rep_index`, each from its own stream.
Realization realize(const SimulationContext &ctx, const Scenario &scenario, const SelectionCoefficients &selection,
                    std::uint64_t master_seed, std::size_t rep_index);

/// One realization shared by both estimators; estimation failures are recorded,
/// never thrown.
std::array<ReplicateRecord, 2> run_replicate(const SimulationContext &ctx, const Scenario &scenario,
                                             const SelectionCoefficients &selection,
                                             const EstimatorOptions &options, std::uint64_t master_seed,
                                             std::size_t rep_index);

/// All replicates of one scenario, ordered by (rep, method).
std::vector<ReplicateRecord> run_scenario(const RunConfig &cfg, const SimulationContext &ctx,
                                          const Scenario &scenario, int workers);

struct RunOptions {
    ScenarioFilter filter;
    std::function<void(const std::string &)> log;
};

struct RunResult {
    std::vector<Scenario> scenarios;
    std::vector<ReplicateRecord> records;
    std::vector<ScenarioSummary> summaries;
    std::size_t resumed_scenarios = 0;
};

/// Full pipeline into cfg.output_dir: tuning.json, manifest.json,
/// scenarios/<id>.csv per finished scenario, replicates.csv and summary.csv.
/// Scenarios already completed under the same config hash are reloaded.
RunResult run_grid(const RunConfig &cfg, const RunOptions &options = {});

int resolve_workers(int requested) noexcept;

/// Loads <dir>/tuning.json when present.
std::optional<TuningTable> load_tuning_table(const std::filesystem::path &dir);
void save_tuning_table(const TuningTable &table, const std::filesystem::path &dir);

} // namespace anchorsim
