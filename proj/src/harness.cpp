#include "anchorsim/harness.hpp"

#include "anchorsim/csv.hpp"
#include "anchorsim/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fmt/format.h>
#include <fstream>
#include <sstream>
#include <thread>

namespace anchorsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool same(double a, double b) { return std::abs(a - b) < 1e-9; }

std::vector<double> sorted(std::vector<double> v, bool descending) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return same(a, b); }), v.end());
    if (descending) {
        std::reverse(v.begin(), v.end());
    }
    return v;
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_atomically(const fs::path &path, const std::string &content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
        }
        out << content;
        if (!out) {
            throw std::runtime_error(fmt::format("write failed for '{}'", tmp.string()));
        }
    }
    fs::rename(tmp, path);
}

ReplicateRecord failed_record(const Scenario &s, std::size_t rep, Method m, double p_true, std::string reason) {
    ReplicateRecord r;
    r.scenario_id = s.scenario_id;
    r.village_fraction = s.village_fraction;
    r.response_rate = s.response_rate_target;
    r.xi = s.xi;
    r.rep_index = rep;
    r.method = m;
    r.p_true = p_true;
    r.failure_reason = std::move(reason);
    return r;
}

} // namespace

std::vector<Scenario> build_grid(const GridConfig &grid) {
    std::vector<Scenario> out;
    for (double f : sorted(grid.village_fractions, true)) {
        for (double r : sorted(grid.response_rates, true)) {
            for (double x : sorted(grid.xis, false)) {
                Scenario s;
                s.village_fraction = f;
                s.response_rate_target = r;
                s.xi = x;
                s.ordinal = out.size();
                s.scenario_id = make_scenario_id(f, r, x);
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

ScenarioFilter ScenarioFilter::parse(const std::string &text) {
    ScenarioFilter f;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(fmt::format("scenario filter item '{}' is not key=value", item));
        }
        const std::string key = item.substr(0, eq);
        double value = 0.0;
        try {
            value = std::stod(item.substr(eq + 1));
        } catch (const std::exception &) {
            throw std::invalid_argument(fmt::format("scenario filter value in '{}' is not a number", item));
        }
        if (key == "fraction") {
            f.fraction = value;
        } else if (key == "rate") {
            f.rate = value;
        } else if (key == "xi") {
            f.xi = value;
        } else {
            throw std::invalid_argument(fmt::format("unknown scenario filter key '{}'", key));
        }
    }
    return f;
}

bool ScenarioFilter::matches(const Scenario &s) const noexcept {
    return (!fraction || same(*fraction, s.village_fraction)) && (!rate || same(*rate, s.response_rate_target)) &&
           (!xi || same(*xi, s.xi));
}

SimulationContext prepare_context(const RunConfig &cfg) {
    SimulationContext ctx;
    ctx.population = build_census(cfg.population, cfg.outcome);
    ctx.auxiliaries = AuxiliaryMatrix::from_population(ctx.population);
    ctx.outcome = tune_followup_intercept(ctx.population, cfg.outcome);
    return ctx;
}

std::optional<GammaTuning> TuningTable::find(double response_rate, double xi) const {
    for (const auto &[key, value] : entries) {
        if (same(key.response_rate, response_rate) && same(key.xi, xi)) {
            return value;
        }
    }
    return std::nullopt;
}

json to_json(const TuningTable &table) {
    json entries = json::array();
    for (const auto &[key, value] : table.entries) {
        entries.push_back({{"key", fmt::format("r{:.2f}_xi{:.1f}", key.response_rate, key.xi)},
                           {"response_rate", key.response_rate},
                           {"xi", key.xi},
                           {"gamma0", value.gamma0},
                           {"achieved_rate", value.achieved_rate},
                           {"iterations", value.iterations}});
    }
    return {{"tuning_hash", table.hash}, {"entries", entries}};
}

TuningTable tuning_table_from_json(const json &j) {
    TuningTable t;
    t.hash = j.at("tuning_hash").get<std::string>();
    for (const auto &e : j.at("entries")) {
        t.entries[{e.at("response_rate").get<double>(), e.at("xi").get<double>()}] =
            GammaTuning{e.at("gamma0").get<double>(), e.at("achieved_rate").get<double>(),
                        e.at("iterations").get<int>()};
    }
    return t;
}

std::optional<TuningTable> load_tuning_table(const fs::path &dir) {
    const fs::path path = dir / "tuning.json";
    if (!fs::exists(path)) {
        return std::nullopt;
    }
    std::ifstream in(path);
    try {
        return tuning_table_from_json(json::parse(in));
    } catch (const std::exception &) {
        return std::nullopt;
    }
}

void save_tuning_table(const TuningTable &table, const fs::path &dir) {
    fs::create_directories(dir);
    write_atomically(dir / "tuning.json", to_json(table).dump(2) + "\n");
}

TuneReport tune_all(const RunConfig &cfg, const SimulationContext &ctx, const TuningTable *previous) {
    TuneReport report;
    report.table.hash = tuning_hash(cfg);
    const bool reuse = previous != nullptr && previous->hash == report.table.hash;
    if (reuse) {
        report.table.entries = previous->entries;
    }
    for (double rate : sorted(cfg.grid.response_rates, true)) {
        for (double xi : sorted(cfg.grid.xis, false)) {
            if (report.table.find(rate, xi)) {
                ++report.cached;
                continue;
            }
            SelectionCoefficients sc = cfg.selection;
            sc.xi = xi;
            report.table.entries[{rate, xi}] = tune_gamma0(ctx.population, ctx.outcome, sc, rate, cfg.tuning);
            ++report.tuned;
        }
    }
    return report;
}

Realization realize(const SimulationContext &ctx, const Scenario &scenario, const SelectionCoefficients &selection,
                    std::uint64_t master_seed, std::size_t rep_index) {
    auto stream = [&](StreamRole role) { return Rng::stream(master_seed, {scenario.ordinal, rep_index, role}); };
    const Population &pop = ctx.population;

    Realization r;
    Rng outcome_rng = stream(StreamRole::Outcome);
    r.followup = generate_followup(pop, ctx.outcome, outcome_rng);

    SelectionCoefficients sc = selection;
    sc.effects.intercept = scenario.gamma0_tuned;
    sc.xi = scenario.xi;
    Rng selection_rng = stream(StreamRole::Selection);
    r.attended = generate_attendance(pop, r.followup.y1, sc, selection_rng);

    Rng sampling_rng = stream(StreamRole::Sampling);
    r.sample = draw_sample(pop, r.attended, scenario.village_fraction, sampling_rng);
    return r;
}

std::array<ReplicateRecord, 2> run_replicate(const SimulationContext &ctx, const Scenario &scenario,
                                             const SelectionCoefficients &selection,
                                             const EstimatorOptions &options, std::uint64_t master_seed,
                                             std::size_t rep_index) {
    const Realization r = realize(ctx, scenario, selection, master_seed, rep_index);
    const Followup &followup = r.followup;
    const SurveySample survey = make_survey_sample(ctx.population, ctx.auxiliaries, r.sample, followup.y1);

    std::array<ReplicateRecord, 2> out;
    const std::array<Method, 2> methods{Method::Calibrated, Method::LogisticImputation};
    for (std::size_t k = 0; k < methods.size(); ++k) {
        ReplicateRecord rec = failed_record(scenario, rep_index, methods[k], followup.p_true, "");
        try {
            rec.estimate = methods[k] == Method::Calibrated ? estimate_calibrated(survey, ctx.auxiliaries, options)
                                                            : estimate_imputation(survey, ctx.auxiliaries, options);
        } catch (const EstimationError &e) {
            rec.failure_reason = e.what();
        }
        out[k] = std::move(rec);
    }
    return out;
}

int resolve_workers(int requested) noexcept {
    if (requested > 0) {
        return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<ReplicateRecord> run_scenario(const RunConfig &cfg, const SimulationContext &ctx,
                                          const Scenario &scenario, int workers) {
    const auto n_rep = static_cast<std::size_t>(cfg.n_rep);
    std::vector<ReplicateRecord> records(2 * n_rep);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto work = [&] {
        for (;;) {
            const std::size_t rep = next.fetch_add(1);
            if (rep >= n_rep) {
                return;
            }
            try {
                std::array<ReplicateRecord, 2> pair;
                if (cfg.population_redraw_per_replicate) {
                    RunConfig local = cfg;
                    local.population.rng_seed =
                        splitmix64(cfg.master_seed ^ StreamKey{scenario.ordinal, rep, StreamRole::Population}.packed());
                    const SimulationContext fresh = prepare_context(local);
                    pair = run_replicate(fresh, scenario, cfg.selection, cfg.estimators, cfg.master_seed, rep);
                } else {
                    pair = run_replicate(ctx, scenario, cfg.selection, cfg.estimators, cfg.master_seed, rep);
                }
                records[2 * rep] = std::move(pair[0]);
                records[2 * rep + 1] = std::move(pair[1]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(n_rep);
                return;
            }
        }
    };

    const int n_workers = std::max(1, std::min(resolve_workers(workers), cfg.n_rep));
    if (n_workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back(work);
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return records;
}

RunResult run_grid(const RunConfig &cfg, const RunOptions &options) {
    cfg.validate();
    auto log = [&](const std::string &msg) {
        if (options.log) {
            options.log(msg);
        }
    };
    const fs::path out_dir(cfg.output_dir);
    const fs::path chunk_dir = out_dir / "scenarios";
    fs::create_directories(chunk_dir);

    RunResult result;
    for (auto &s : build_grid(cfg.grid)) {
        if (options.filter.matches(s)) {
            result.scenarios.push_back(std::move(s));
        }
    }
    if (result.scenarios.empty()) {
        throw ConfigError("scenario filter matches no grid cell");
    }

    log("building census population");
    const SimulationContext ctx = prepare_context(cfg);
    log(fmt::format("population: {} villages, {} children, baseline rate {:.4f}, follow-up intercept {:.4f}",
                    ctx.population.n_villages(), ctx.population.total_children(), ctx.population.baseline_rate(),
                    ctx.outcome.effects.intercept));

    RunConfig tuning_cfg = cfg;
    tuning_cfg.grid.response_rates.clear();
    tuning_cfg.grid.xis.clear();
    for (const auto &s : result.scenarios) {
        tuning_cfg.grid.response_rates.push_back(s.response_rate_target);
        tuning_cfg.grid.xis.push_back(s.xi);
    }
    const auto previous = load_tuning_table(out_dir);
    TuneReport tuning = tune_all(tuning_cfg, ctx, previous ? &*previous : nullptr);
    if (previous && previous->hash == tuning.table.hash) {
        for (const auto &[key, value] : previous->entries) {
            tuning.table.entries.try_emplace(key, value);
        }
    }
    save_tuning_table(tuning.table, out_dir);
    log(fmt::format("selection intercepts: {} tuned, {} cached", tuning.tuned, tuning.cached));
    for (auto &s : result.scenarios) {
        s.gamma0_tuned = tuning.table.find(s.response_rate_target, s.xi)->gamma0;
    }

    // Manifest goes down before any replicate runs.
    const std::string hash = config_hash(cfg);
    json previous_manifest;
    if (std::ifstream in(out_dir / "manifest.json"); in) {
        try {
            previous_manifest = json::parse(in);
        } catch (const std::exception &) {
            previous_manifest = json();
        }
    }
    const bool resumable = previous_manifest.is_object() && previous_manifest.value("config_hash", "") == hash;

    json manifest;
    manifest["config_hash"] = hash;
    manifest["code_version"] = ANCHORSIM_VERSION;
    manifest["config"] = to_json(cfg);
    manifest["tuning"] = to_json(tuning.table);
    manifest["started_at"] = timestamp();
    json status = json::object();
    for (const auto &s : result.scenarios) {
        const bool done = resumable && previous_manifest["scenarios"].value(s.scenario_id, "") == "complete" &&
                          fs::exists(chunk_dir / (s.scenario_id + ".csv"));
        status[s.scenario_id] = done ? "complete" : "pending";
    }
    manifest["scenarios"] = status;
    write_atomically(out_dir / "manifest.json", manifest.dump(2) + "\n");

    for (const auto &s : result.scenarios) {
        const fs::path chunk = chunk_dir / (s.scenario_id + ".csv");
        std::vector<ReplicateRecord> records;
        if (status[s.scenario_id] == "complete") {
            records = csv::read_replicates(chunk);
            ++result.resumed_scenarios;
            log(fmt::format("{}: resumed from {}", s.scenario_id, chunk.string()));
        } else {
            records = run_scenario(cfg, ctx, s, cfg.workers);
            std::ostringstream out;
            csv::write_replicate_header(out);
            for (const auto &r : records) {
                csv::write_replicate_row(out, r);
            }
            write_atomically(chunk, out.str());
            status[s.scenario_id] = "complete";
            manifest["scenarios"] = status;
            write_atomically(out_dir / "manifest.json", manifest.dump(2) + "\n");
            const auto summary = summarize(records);
            for (const auto &row : summary) {
                log(fmt::format("{} {:<20} bias {} coverage {} equiv05 {} equiv075 {} failures {}", s.scenario_id,
                                method_label(row.method), row.bias ? format_bias(row.bias->value) : "NA",
                                row.coverage ? format_proportion(row.coverage->value) : "NA",
                                row.equiv05 ? format_proportion(row.equiv05->value) : "NA",
                                row.equiv075 ? format_proportion(row.equiv075->value) : "NA", row.failure_count));
                if (row.failure_alarm()) {
                    log(fmt::format("warning: {} {} failure rate above {:.0f}%", s.scenario_id,
                                    method_name(row.method), 100 * kFailureAlarmRate));
                }
            }
        }
        result.records.insert(result.records.end(), std::make_move_iterator(records.begin()),
                              std::make_move_iterator(records.end()));
    }

    result.summaries = summarize(result.records);
    std::ostringstream replicates;
    csv::write_replicate_header(replicates);
    for (const auto &r : result.records) {
        csv::write_replicate_row(replicates, r);
    }
    write_atomically(out_dir / "replicates.csv", replicates.str());
    std::ostringstream summary;
    csv::write_summary(summary, result.summaries);
    write_atomically(out_dir / "summary.csv", summary.str());

    manifest["finished_at"] = timestamp();
    write_atomically(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return result;
}

} // namespace anchorsim
